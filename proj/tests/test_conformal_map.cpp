#include "finsleroid/conformal_map.hpp"
#include "finsleroid/sampling.hpp"

#include <gtest/gtest.h>

using namespace finsleroid;

namespace {

const double kGrid[] = {-1.2, -0.5, 0.5, 1.0, 1.2, 2.0};

double mat_rel(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()); }

Vec4 pick(PointSampler& s, const DeformationParameter& c, Region r) {
  return s.point(c, r == Region::timelike ? (s.uniform() < 0.5 ? Sector::future_timelike : Sector::past_timelike)
                                          : Sector::spacelike);
}

}  // namespace

TEST(SectorCoordinates, Identities) {
  PointSampler s(41);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike}) {
      const Vec4 R = pick(s, c, reg);
      const SectorCoordinates sc = sector_coordinates(c, R);
      EXPECT_EQ(sc.region, reg);
      EXPECT_NEAR(sc.n.norm(), 1.0, 1e-15);
      const double B = aux_forms(c, R).B;
      if (reg == Region::timelike) {
        EXPECT_NEAR(sc.E * sc.E - c.h * c.h * sc.w * sc.w, sc.Q, 1e-14);
        EXPECT_NEAR(sc.Q, -B / (R[0] * R[0]), 1e-12 * std::abs(sc.Q));
        EXPECT_NEAR(sc.wv.norm(), std::abs(sc.w), 1e-15);
      } else {
        EXPECT_NEAR(c.h * c.h - sc.f * sc.f, sc.L, 1e-14);
        EXPECT_NEAR(sc.L, B / (sc.q * sc.q), 1e-12 * std::abs(sc.L));
      }
    }
  }
}

TEST(Rho, IdentityAtZero) {
  const auto c = derive_constants(0);
  const Vec4 R(2, 1, 0.5, 0.2);
  EXPECT_LT((rho(c, R) - R).norm(), 1e-15);
  EXPECT_LT(mat_rel(rho_jacobian(c, R), Mat4::Identity()), 1e-15);
  EXPECT_LT(mat_rel(rho_table(c, R), Mat4::Identity()), 1e-15);
  EXPECT_LT(mat_rel(eta_table(c, Vec4(0.5, 2, 0.1, 0)), Mat4::Identity()), 1e-15);
}

TEST(Rho, RoundTripAndAuxiliaryIdentity) {
  const auto c1 = derive_constants(1);
  const Vec4 R(2, 1, 0, 0);
  EXPECT_LT((eta(c1, rho(c1, R)) - R).norm() / R.norm(), 1e-11);
  EXPECT_NEAR(std::pow(R[0] - 0.5 * c1.g * 1.0, 2) - c1.h * c1.h, -aux_forms(c1, R).B, 1e-14);
  PointSampler s(42);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 200; ++i) {
      const Vec4 X = s.point(c);
      const Vec4 r = rho(c, X);
      EXPECT_LT((eta(c, r) - X).norm() / X.norm(), 1e-11);
      // nu(r) kappa(R) = 1
      EXPECT_NEAR(inverse_conformal_factor(c, r) * conformal_factor(c, X), 1.0, 1e-13);
      // flat interval of r is kappa F / h
      EXPECT_NEAR(pseudo_norm(r), conformal_factor(c, X) * fmf(c, X) / c.h, 1e-12 * pseudo_norm(r));
    }
  }
}

TEST(Jacobian, TablesAgainstDifferences) {
  PointSampler s(43);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike}) {
      for (int i = 0; i < 20; ++i) {
        const Vec4 R = pick(s, c, reg);
        const Mat4 J = rho_jacobian(c, R);
        EXPECT_LT(mat_rel(rho_table(c, R, reg), J), 1e-12) << g << " " << R.transpose();
        EXPECT_LT(mat_rel(rho_jacobian_fd(c, R), J), 1e-6);
        const Mat4 E = eta_table(c, R, reg);
        EXPECT_LT(mat_rel(E * J, Mat4::Identity()), 1e-12);
        EXPECT_LT(mat_rel(E, eta_jacobian(c, rho(c, R))), 1e-10);
        const double jk = aux_forms(c, R).j * conformal_factor(c, R);
        EXPECT_NEAR(J.determinant() / std::pow(jk, 4), 1.0, 1e-12);
      }
    }
  }
}

TEST(Jacobian, WrongTableRaises) {
  const auto c = derive_constants(1);
  EXPECT_THROW(rho_table(c, Vec4(3, 1, 0, 0), Region::spacelike), RegionMismatch);
  EXPECT_THROW(eta_table(c, Vec4(1, 3, 0, 0), Region::timelike), RegionMismatch);
  EXPECT_NO_THROW(rho_table(c, Vec4(1, 3, 0, 0), Region::spacelike));
}

TEST(Jacobian, TimelikeContractions) {
  const auto c = derive_constants(1);
  for (const Vec4& R : {Vec4(3, 1, 0, 0), Vec4(3, 1, 0.4, 0.2), Vec4(-3, 0.5, 0.4, 0.2)}) {
    const Mat4 J = rho_table(c, R, Region::timelike);
    const SectorCoordinates sc = sector_coordinates(c, R);
    const double jk = aux_forms(c, R).j * conformal_factor(c, R);
    EXPECT_NEAR(J.determinant(), std::pow(jk, 4), 1e-12 * std::pow(jk, 4));
    EXPECT_NEAR(Eigen::Matrix3d(J.bottomRightCorner(3, 3)).determinant(), (sc.E - c.h * sc.w * sc.w) * std::pow(jk, 3) / sc.Q,
                1e-12 * std::pow(jk, 3));
    // w^b rho_b^a = (E - h w^2) j kappa w^a / Q
    const Eigen::Vector3d lhs = J.bottomRightCorner(3, 3).transpose() * sc.wv;
    EXPECT_LT((lhs - (sc.E - c.h * sc.w * sc.w) * jk * sc.wv / sc.Q).norm(), 1e-12 * jk);
    const Eigen::Vector3d lhs2 = J.bottomRightCorner(3, 3) * sc.wv;
    EXPECT_LT((lhs2 - (sc.E - c.h * sc.w * sc.w) * jk * sc.wv / sc.Q).norm(), 1e-12 * jk);
  }
}

TEST(Jacobian, SpacelikeContractions) {
  const auto c = derive_constants(1);
  for (const Vec4& R : {Vec4(1, 3, 0, 0), Vec4(0.5, 2, -1, 0.3)}) {
    const Mat4 J = rho_table(c, R, Region::spacelike);
    const SectorCoordinates sc = sector_coordinates(c, R);
    const double jk = aux_forms(c, R).j * conformal_factor(c, R);
    const double want = (c.h - sc.f * sc.k) * jk / sc.L;
    EXPECT_NEAR(Eigen::Matrix3d(J.bottomRightCorner(3, 3)).determinant(), (c.h - sc.f * sc.k) * std::pow(jk, 3) / sc.L,
                1e-12 * std::pow(jk, 3));
    EXPECT_LT((J.bottomRightCorner(3, 3).transpose() * sc.n - want * sc.n).norm(), 1e-12 * jk);
    EXPECT_LT((J.bottomRightCorner(3, 3) * sc.n - want * sc.n).norm(), 1e-12 * jk);
  }
}

TEST(Jacobian, PositionContractions) {
  PointSampler s(44);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike}) {
      const Vec4 R = pick(s, c, reg);
      const Mat4 E = eta_table(c, R, reg);
      const SectorCoordinates sc = sector_coordinates(c, R);
      const Vec4 Rl = covector(c, R);
      const double F2 = std::pow(fmf(c, R), 2);
      const double jk = aux_forms(c, R).j * conformal_factor(c, R);
      const Vec4 v = E * Rl;  // R_p eta_m^p
      if (reg == Region::timelike) {
        EXPECT_NEAR(v[0], sc.E * F2 / (R[0] * jk * sc.Q), 1e-12 * std::abs(v[0]));
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(v[a + 1], -c.h * F2 * sc.wv[a] / (R[0] * jk * sc.Q), 1e-12 * v.norm());
      } else {
        EXPECT_NEAR(v[0], sc.f * F2 / (sc.q * jk * sc.L), 1e-12 * v.norm());
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(v[a + 1], -c.h * F2 * sc.n[a] / (sc.q * jk * sc.L), 1e-12 * v.norm());
      }
    }
  }
}

TEST(FlatMetric, Reconstructions) {
  PointSampler s(45);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 20; ++i) {
      const Vec4 R = s.point(c);
      const Mat4 s1 = flat_metric(c, R);
      const Mat4 s2 = flat_metric_from_jacobian(rho_jacobian(c, R));
      EXPECT_LT(mat_rel(s1, s2), 1e-8);
      EXPECT_LT(mat_rel(flat_metric_from_jacobian(rho_jacobian_fd(c, R)), s1), 1e-6);
      // the alternative normalisation with a factor 1/h^2 fails once g != 0
      EXPECT_GT(mat_rel(s1 / (c.h * c.h), s2), 1e-3);
    }
  }
}

TEST(KappaGradient, AgainstDifferences) {
  EXPECT_EQ(kappa_gradient(derive_constants(0), Vec4(2, 1, 0, 0)).norm(), 0.0);
  PointSampler s(46);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike}) {
      const Vec4 R = pick(s, c, reg);
      const auto d = fd::gradient([&](const Vec4& X) { return conformal_factor(c, X); }, R,
                                  fd::kFirstStep * regularity_scale(c, R));
      const Vec4 fdg(d[0], d[1], d[2], d[3]);
      const Vec4 kg = kappa_gradient(c, R);
      EXPECT_LT((fdg - kg).norm() / kg.norm(), 1e-6);
      // written with F^2 = |Psi| the coefficient changes sign between regions
      const double F2 = std::pow(fmf(c, R), 2);
      const Vec4 with_F2 = c.gamma * conformal_factor(c, R) * covector(c, R) / F2;
      EXPECT_LT((kg - (reg == Region::timelike ? 1.0 : -1.0) * with_F2).norm() / kg.norm(), 1e-13);
    }
  }
}

TEST(Flatness, ZeroAtZero) {
  EXPECT_LT(flatness_certificate(derive_constants(0), Vec4(3, 1, 1, 0)), 1e-12);
}

TEST(Flatness, CertificateExamples) {
  EXPECT_LT(flatness_certificate(derive_constants(1), Vec4(3, 1, 1, 0)), 1e-4);
  EXPECT_LT(flatness_certificate(derive_constants(-0.8), Vec4(1, 3, 0, 0)), 1e-4);
}

TEST(Flatness, OriginalMetricIsCurved) {
  // The same construction applied to g_pq itself does not vanish.
  const auto c = derive_constants(1);
  const Vec4 R(3, 1, 1, 0);
  const Tensor4 M = riemann_fd([&](const Vec4& X) -> Mat4 { return metric_tensor_closed(c, X, GuardBand{0}); }, R,
                               fd::kFirstStep * regularity_scale(c, R));
  EXPECT_GT(M.max_abs(), 1e-2);
}

TEST(Flatness, RandomSample) {
  PointSampler s(47);
  for (double g : {-1.2, 0.5}) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike})
      for (int i = 0; i < 4; ++i) {
        const Vec4 R = pick(s, c, reg);
        EXPECT_LT(flatness_certificate(c, R), 1e-4) << g << " " << R.transpose();
      }
  }
}

TEST(Divergence, DensityIdentity) {
  PointSampler s(48);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Region reg : {Region::timelike, Region::spacelike})
      for (int i = 0; i < 5; ++i) {
        const Vec4 R = pick(s, c, reg);
        const double want = density_divergence(c, R);
        EXPECT_LT(std::abs(density_divergence_fd(c, R) - want) / std::abs(want), 1e-5) << g << " " << R.transpose();
      }
  }
}
