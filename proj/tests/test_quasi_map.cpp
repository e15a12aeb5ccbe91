#include "finsleroid/conformal_map.hpp"
#include "finsleroid/gamma.hpp"
#include "finsleroid/o1_approx.hpp"
#include "finsleroid/sampling.hpp"

#include <gtest/gtest.h>

using namespace finsleroid;

namespace {

const double kGrid[] = {-1.2, -0.8, -0.2, 0.2, 0.8, 1.2, 2.0};

double mat_rel(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()); }

Vec4 regular_quasi_point(PointSampler& s, const DeformationParameter& c) { return sigma(c, s.point(c)); }

}  // namespace

TEST(Sigma, IdentityAtZero) {
  const auto c = derive_constants(0);
  const Vec4 R(2, 1, 0.3, -0.2);
  EXPECT_LT((sigma(c, R) - R).norm(), 1e-15);
  EXPECT_LT((mu(c, R) - R).norm(), 1e-15);
}

TEST(Sigma, ExtendedPrecisionOracle) {
  const auto c = derive_constants(2);
  const Vec4 t = sigma(c, Vec4(2, 1, 0, 0));
  EXPECT_NEAR(t[0], 1.8649332100338825087, 1e-14);
  EXPECT_NEAR(t[1], 2.6374138385499084704, 1e-14);
  EXPECT_EQ(t[2], 0.0);
  EXPECT_NEAR(pseudo_norm(t), 1.8649332100338825087, 1e-14);
  EXPECT_LT((mu(c, t) - Vec4(2, 1, 0, 0)).norm(), 1e-12);
}

TEST(Sigma, NormIdentityRoundTripAndHomogeneity) {
  PointSampler s(31);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    double worst_norm = 0, worst_rt = 0, worst_rt2 = 0;
    for (int i = 0; i < 1000; ++i) {
      const Vec4 R = s.point(c);
      const Vec4 t = sigma(c, R);
      worst_norm = std::max(worst_norm, std::abs(pseudo_norm(t) - fmf(c, R)) / fmf(c, R));
      worst_rt = std::max(worst_rt, (mu(c, t) - R).norm() / R.norm());
      worst_rt2 = std::max(worst_rt2, (sigma(c, mu(c, t)) - t).norm() / t.norm());
      if (i % 100 == 0) {
        EXPECT_LT((sigma(c, 3.0 * R) - 3.0 * t).norm() / t.norm(), 1e-14);
        EXPECT_LT((mu(c, 0.5 * t) - 0.5 * R).norm() / R.norm(), 1e-14);
      }
    }
    EXPECT_LT(worst_norm, 1e-12) << g;
    EXPECT_LT(worst_rt, 1e-10) << g;
    EXPECT_LT(worst_rt2, 1e-10) << g;
  }
}

TEST(Sigma, PreservesSector) {
  PointSampler s(32);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Sector want : {Sector::future_timelike, Sector::spacelike, Sector::past_timelike}) {
      const Vec4 t = sigma(c, s.point(c, want));
      EXPECT_EQ(classify(derive_constants(0), t), want);
    }
  }
}

TEST(Sigma, GuardBand) {
  const auto c = derive_constants(1);
  EXPECT_THROW(sigma(c, Vec4(-c.g_minus, 1, 0, 0)), ConeProximityError);
  EXPECT_THROW(mu(c, Vec4(1, 1, 0, 0)), ConeProximityError);
  EXPECT_THROW(sigma(c, Vec4(NAN, 1, 0, 0)), DomainError);
}

TEST(Jacobians, IdentityAtZero) {
  const auto c = derive_constants(0);
  const JacobianPair J = jacobians(c, Vec4(2, 1, 0.5, 0.1));
  EXPECT_LT(mat_rel(J.forward, Mat4::Identity()), 1e-15);
  EXPECT_NEAR(J.forward.determinant(), 1.0, 1e-15);
}

TEST(Jacobians, DeterminantOracle) {
  const auto c = derive_constants(2);
  const Vec4 R(2, 1e-3, 1, 0);
  const double j = aux_forms(c, R).j;
  EXPECT_NEAR(sigma_jacobian(c, R).determinant() / (std::pow(j, 4) * std::pow(c.h, 3)), 1.0, 1e-12);
  // On the axis direction itself the value is j^4 h^3 = 34.21354886985...
  EXPECT_NEAR(std::pow(aux_forms(c, Vec4(2, 1, 0, 0)).j, 4) * std::pow(c.h, 3), 34.213548869854718145, 1e-12);
}

TEST(Jacobians, DeterminantEulerAndReciprocity) {
  PointSampler s(33);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 200; ++i) {
      const Vec4 R = s.point(c);
      const double j4h3 = std::pow(aux_forms(c, R).j, 4) * std::pow(c.h, 3);
      const JacobianPair J = jacobians(c, R);
      EXPECT_LT(std::abs(J.forward.determinant() / j4h3 - 1), 1e-12);
      EXPECT_LT((J.forward.transpose() * R - sigma(c, R)).norm() / R.norm(), 1e-12);
      EXPECT_LT(mat_rel(J.forward * J.inverse, Mat4::Identity()), 1e-12);
      if (i % 10 == 0) {
        const JacobianPair Jf = jacobians(c, R, true);
        EXPECT_LT(std::abs(Jf.forward.determinant() / j4h3 - 1), 1e-6);
        EXPECT_LT(mat_rel(Jf.forward, J.forward), 1e-7);
        EXPECT_LT(mat_rel(mu_jacobian_fd(c, sigma(c, R)), J.inverse), 1e-7);
      }
    }
  }
}

TEST(QuasiMetric, FlatAtZeroAndDeterminant) {
  EXPECT_LT(mat_rel(quasi_metric(derive_constants(0), Vec4(2, 1, 0, 0)).upper, minkowski()), 1e-15);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    const QuasiMetric q = quasi_metric(c, Vec4(3, 1, 1, 0));
    EXPECT_NEAR(q.lower.determinant(), -std::pow(c.h, -6), 1e-12);
    EXPECT_NEAR(q.upper.determinant(), -std::pow(c.h, 6), 1e-12 * std::pow(c.h, 6));
    EXPECT_LT(mat_rel(q.lower * q.upper, Mat4::Identity()), 1e-14);
    EXPECT_NEAR(q.l_up.dot(q.lower * q.l_up), q.sigma2 > 0 ? 1.0 : -1.0, 1e-14);
  }
  // det n^ij = -8 at g = 2; the lowered form carries the reciprocal.
  EXPECT_NEAR(quasi_metric(derive_constants(2), Vec4(2, 1, 0, 0)).upper.determinant(), -8.0, 1e-12);
}

TEST(QuasiMetric, PushForwardOfMetric) {
  PointSampler s(34);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 20; ++i) {
      const Vec4 R = s.point(c);
      const Vec4 t = sigma(c, R);
      EXPECT_LT(mat_rel(quasi_metric_pushforward(c, R), quasi_metric(c, t).upper), 1e-6);
      const Mat4 T = sigma_jacobian(c, R);
      EXPECT_LT(mat_rel(T * quasi_metric(c, t).lower * T.transpose(), metric_tensor(c, R)), 1e-6);
    }
  }
}

TEST(Christoffel, ClosedFormAgainstConstruction) {
  EXPECT_EQ(christoffel_N(derive_constants(0), Vec4(2, 1, 0, 0)).max_abs(), 0.0);
  PointSampler s(35);
  for (double g : {1.0, 1.5, -0.8}) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 10; ++i) {
      const Vec4 t = regular_quasi_point(s, c);
      const Tensor3 N = christoffel_N(c, t);
      EXPECT_LT((N - christoffel_N_fd(c, t)).max_abs() / std::max(1e-3, N.max_abs()), 1e-6);
      double contr = 0, tr = 0;
      for (int m = 0; m < 4; ++m)
        for (int j = 0; j < 4; ++j) {
          double a = 0, b = 0;
          for (int i = 0; i < 4; ++i) {
            a += t[i] * N(i, m, j);
            b += N(m, i, i);
          }
          contr = std::max(contr, std::abs(a));
          tr = std::max(tr, std::abs(b));
        }
      EXPECT_LT(contr, 1e-14);
      EXPECT_LT(tr, 1e-14);
    }
  }
  const Tensor3 N1 = christoffel_N(derive_constants(1), Vec4(2, 1, 0, 0));
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(2 * N1(0, m, j) + N1(1, m, j), 0.0, 1e-15);
}

TEST(QuasiFrames, ReconstructionAndEuler) {
  EXPECT_LT(mat_rel(quasi_frames(derive_constants(0), Vec4(2, 1, 0, 0)).f, Mat4::Identity()), 1e-15);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    const Vec4 t(3, 1, 1, 0);
    const QuasiFrames F = quasi_frames(c, t);
    const QuasiMetric q = quasi_metric(c, t);
    EXPECT_LT(mat_rel(F.f * minkowski() * F.f.transpose(), q.lower), 1e-14);
    EXPECT_LT(mat_rel(F.m.transpose() * minkowski() * F.m, q.upper), 1e-14);
    EXPECT_LT(mat_rel(F.f * F.m, Mat4::Identity()), 1e-14);
    EXPECT_LT((F.f.transpose() * t - t).norm(), 1e-14);
  }
}

TEST(QuasiFrames, SpinConnectionContraction) {
  // (1/8) gamma^i R^PQ_i (gamma_P gamma_Q - gamma_Q gamma_P) = -(3/2) gamma t^j gamma_j / S^2
  for (const GammaAlgebra& G : {dirac_representation(), chiral_representation()}) {
    for (double g : {1.0, -0.6}) {
      const auto c = derive_constants(g);
      for (const Vec4& t : {Vec4(3, 1, 1, 0), Vec4(0.5, 2, -1, 0.3)}) {
        const QuasiFrames F = quasi_frames(c, t);
        const Mat4 nu = quasi_metric(c, t).upper;
        const Tensor3 Rq = quasi_ricci(c, t);
        std::array<CMat4, 4> gup;
        for (int i = 0; i < 4; ++i) {
          gup[i].setZero();
          for (int j = 0; j < 4; ++j)
            for (int P = 0; P < 4; ++P) gup[i] += nu(i, j) * F.f(j, P) * G.low(P);
        }
        CMat4 lhs = CMat4::Zero(), rhs = CMat4::Zero();
        for (int i = 0; i < 4; ++i)
          for (int P = 0; P < 4; ++P)
            for (int Q = 0; Q < 4; ++Q)
              lhs += gup[i] * Rq(P, Q, i) * (G.low(P) * G.low(Q) - G.low(Q) * G.low(P)) / 8.0;
        for (int j = 0; j < 4; ++j) rhs += -1.5 * c.gamma * G.low(j) * t[j] / minkowski_square(t);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ConformalMultiplier, Values) {
  EXPECT_EQ(conformal_multiplier(derive_constants(0), Vec4(2, 1, 0, 0)), 1.0);
  const auto c2 = derive_constants(2);
  EXPECT_NEAR(conformal_multiplier(c2, Vec4(std::sqrt(2.0), 0, 0, 0)), 1.0, 1e-15);
  const RTransform r0 = r_transform(derive_constants(0), Vec4(2, 1, 0.5, 0));
  EXPECT_LT((r0.r - Vec4(2, 1, 0.5, 0)).norm(), 1e-15);
  EXPECT_THROW(conformal_multiplier(c2, Vec4(1, 1, 0, 0)), ConeProximityError);
}

TEST(ConformalMultiplier, FlatInducedMetric) {
  PointSampler s(36);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 20; ++i) {
      const Vec4 t = regular_quasi_point(s, c);
      const RTransform rt = r_transform(c, t);
      const double xi = conformal_multiplier(c, t);
      const Mat4 cij = rt.k.transpose() * quasi_metric(c, t).upper * rt.k;
      EXPECT_LT(mat_rel(cij, xi * xi * minkowski()), 1e-12);
      // k(j, i) against differences of r(t)
      const double m = spatial_norm(t);
      const double h = 1e-3 * std::min({std::abs(t[0] - m), std::abs(t[0] + m), t.norm()});
      const Mat4 kfd = fd::jacobian([&](const Vec4& X) { return r_transform(c, X).r; }, t, h);
      EXPECT_LT(mat_rel(kfd, rt.k), 1e-7);
    }
  }
}

TEST(WavePhase, PlaneWaveAtZero) {
  const auto c = derive_constants(0);
  const Vec4 R(2, 1, 0.5, 0), k(1.3, -0.4, 0.2, 0.1);
  EXPECT_NEAR(wave_phase(c, R, k), k.dot(R), 1e-14);
}

TEST(WavePhase, RepresentationsAgree) {
  PointSampler s(37);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 100; ++i) {
      const Vec4 R = s.point(c);
      const Eigen::Vector3d d = s.direction();
      const Vec4 k(1.0, d[0], d[1], d[2]);  // null covector k_P
      const Vec4 t = sigma(c, R);
      const PhaseContext p = wave_phase_quasi(c, t, k);
      const double phi = wave_phase(c, R, k);
      EXPECT_LT(std::abs(p.phase - phi), 1e-12 * std::max(1.0, std::abs(phi)));
      const Vec4 r = rho(c, R);
      EXPECT_LT(std::abs(k.dot(r) - phi), 1e-12 * std::max(1.0, std::abs(phi)));
      const double eik = p.gradient.dot(quasi_metric(c, t).upper * p.gradient);
      EXPECT_LT(std::abs(eik), 1e-8 * p.gradient.squaredNorm());
      if (i % 10 == 0) {
        const double m = spatial_norm(t);
        const double h = 1e-3 * std::min({std::abs(t[0] - m), std::abs(t[0] + m), t.norm()});
        const auto d = fd::gradient([&](const Vec4& X) { return wave_phase_quasi(c, X, k).phase; }, t, h);
        const Vec4 gfd(d[0], d[1], d[2], d[3]);
        EXPECT_LT((gfd - p.gradient).norm() / p.gradient.norm(), 1e-7);
      }
    }
  }
}

TEST(WavePhase, MassiveEikonal) {
  const auto c = derive_constants(0.9);
  const Vec4 k(std::sqrt(1.0 + 0.29), 0.5, -0.2, 0.1);
  const Vec4 t = sigma(c, Vec4(3, 1, 0.4, 0.2));
  const PhaseContext p = wave_phase_quasi(c, t, k);
  EXPECT_NEAR(p.gradient.dot(quasi_metric(c, t).upper * p.gradient), p.xi * p.xi * minkowski_square(k), 1e-10);
}

TEST(WavePhase, FirstOrderFormConvergesQuadratically) {
  const Vec4 R(2, 1, 0, 0), k(1, -1, 0, 0);
  const ExpansionReport rep = expansion_report("phase", R, [&](double g) {
    return std::abs(wave_phase(derive_constants(g), R, k) - o1_phase(g, R, k));
  });
  EXPECT_TRUE(rep.pass) << rep.fit.slope << " " << rep.fit.r_squared;
  EXPECT_LT(std::abs(wave_phase(derive_constants(0.1), R, k) - o1_phase(0.1, R, k)), 0.05);
}
