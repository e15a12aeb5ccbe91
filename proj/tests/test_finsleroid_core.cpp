#include "finsleroid/conformal_map.hpp"
#include "finsleroid/sampling.hpp"

#include <gtest/gtest.h>

using namespace finsleroid;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double mat_rel(const Mat4& a, const Mat4& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()); }

const double kGrid[] = {-1.2, -0.8, -0.2, 0.2, 0.8, 1.2, 2.0};

}  // namespace

TEST(Constants, PseudoeuclideanLimit) {
  const auto c = derive_constants(0);
  EXPECT_EQ(c.h, 1.0);
  EXPECT_EQ(c.g_plus, 1.0);
  EXPECT_EQ(c.g_minus, -1.0);
  EXPECT_EQ(c.G, 0.0);
  EXPECT_EQ(c.gamma, 0.0);
}

TEST(Constants, GTwo) {
  const auto c = derive_constants(2);
  EXPECT_NEAR(c.h, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.g_plus, std::sqrt(2.0) - 1, 1e-15);
  EXPECT_NEAR(c.g_minus, -std::sqrt(2.0) - 1, 1e-15);
}

TEST(Constants, AlgebraicIdentities) {
  for (double g : {-3.0, -1.2, -0.3, 0.0, 1e-9, 0.5, 2.0, 7.0}) {
    const auto c = derive_constants(g);
    EXPECT_NEAR(c.g_plus * c.g_minus, -1.0, 1e-15) << g;
    EXPECT_NEAR(c.G_plus - c.G_minus, 2.0, 1e-15) << g;
    EXPECT_NEAR(c.g_sup_plus, 1.0 / c.g_plus, 1e-15) << g;
    EXPECT_NEAR(c.g_sup_plus + c.g_sup_minus, g, 1e-14) << g;
    EXPECT_NEAR(c.gamma, c.h - 1.0, 1e-15) << g;
    EXPECT_GE(c.h, 1.0);
    EXPECT_EQ(c.gamma == 0.0, g == 0.0);
  }
}

TEST(Constants, RejectsNonFinite) {
  EXPECT_THROW(derive_constants(NAN), DomainError);
  EXPECT_THROW(derive_constants(INFINITY), DomainError);
}

TEST(MetricFunction, PseudoeuclideanValues) {
  const auto c = derive_constants(0);
  EXPECT_NEAR(fmf(c, Vec4(2, 1, 0, 0)), std::sqrt(3.0), 1e-15);
  EXPECT_EQ(fmf(c, Vec4(1, 1, 0, 0)), 0.0);
  EXPECT_NEAR(fhf(c, Vec4(2, 1, 0, 0)), std::sqrt(3.0), 1e-15);
  EXPECT_EQ(fhf(c, Vec4(1, 1, 0, 0)), 0.0);
}

TEST(MetricFunction, ExtendedPrecisionOracle) {
  // 40-digit evaluation of the power-law form.
  const auto c = derive_constants(2);
  const Vec4 R(2, 1, 0, 0);
  EXPECT_NEAR(fmf(c, R), 1.8649332100338825087, 1e-14);
  const AuxForms a = aux_forms(c, R);
  EXPECT_NEAR(a.B, 1.0, 1e-14);
  EXPECT_NEAR(a.j, 1.8649332100338825087, 1e-14);
  EXPECT_NEAR(fmf(c, R), a.j * std::sqrt(std::abs(a.B)), 1e-14);
  const auto c1 = derive_constants(1);
  EXPECT_NEAR(fhf(c1, Vec4(2, 1, 0, 0)), 1.8031127658757414468, 1e-14);
}

TEST(MetricFunction, FactorizedForms) {
  PointSampler s(11);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 50; ++i) {
      const Vec4 R = s.point(c);
      const AuxForms a = aux_forms(c, R);
      EXPECT_LT(rel(fmf(c, R), a.j * std::sqrt(std::abs(a.B))), 1e-12);
      const AuxForms b = co_aux_forms(c, R);
      EXPECT_LT(rel(fhf(c, R), b.j * std::sqrt(std::abs(b.B))), 1e-12);
    }
  }
}

TEST(MetricFunction, SectorMatchesSignOfB) {
  PointSampler s(12);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (Sector want : {Sector::future_timelike, Sector::spacelike, Sector::past_timelike}) {
      for (int i = 0; i < 20; ++i) {
        const Vec4 R = s.point(c, want);
        EXPECT_EQ(classify(c, R), want);
        EXPECT_EQ(aux_forms(c, R).B < 0, is_timelike(want));
      }
    }
    const Vec4 on_cone(-c.g_minus, 1, 0, 0);
    EXPECT_EQ(classify(c, on_cone), Sector::future_isotropic);
    EXPECT_EQ(fmf(c, on_cone), 0.0);
  }
  EXPECT_THROW(classify(derive_constants(1), Vec4::Zero()), DomainError);
}

TEST(MetricFunction, GuardBandRaisesTypedError) {
  const auto c = derive_constants(1);
  const Vec4 near(-c.g_minus * (1 + 1e-9), 1, 0, 0);
  EXPECT_THROW(metric_tensor(c, near), ConeProximityError);
  EXPECT_THROW(metric_tensor(c, Vec4(2, 0, 0, 0)), ConeProximityError);
  EXPECT_NO_THROW(fmf(c, near));
}

TEST(MetricTensor, PseudoeuclideanLimit) {
  const auto c = derive_constants(0);
  for (const Vec4& R : {Vec4(2, 1, 0.3, 0), Vec4(0.5, 2, 1, 1), Vec4(-3, 1, 0, 0.5)}) {
    EXPECT_LT(mat_rel(metric_tensor_closed(c, R), minkowski()), 1e-15);
    EXPECT_LT(mat_rel(metric_tensor(c, R), minkowski()), 1e-9);
  }
}

TEST(MetricTensor, DeterminantAndSignature) {
  PointSampler s(13);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 40; ++i) {
      const Vec4 R = s.point(c);
      const double j8 = std::pow(aux_forms(c, R).j, 8);
      const Mat4 gf = metric_tensor(c, R);
      const Mat4 gc = metric_tensor_closed(c, R);
      EXPECT_LT(std::abs(gc.determinant() + j8) / j8, 1e-12);
      EXPECT_LT(std::abs(gf.determinant() + j8) / j8, 1e-6);
      EXPECT_LT(mat_rel(gf, gf.transpose()), 1e-15);
      EXPECT_LT(mat_rel(gf, gc), 1e-7) << g << " " << R.transpose();
      Eigen::SelfAdjointEigenSolver<Mat4> es(gc);
      EXPECT_EQ((es.eigenvalues().array() > 0).count(), 1);
    }
  }
}

TEST(MetricTensor, GTwoDeterminant) {
  const auto c = derive_constants(2);
  const Vec4 R(2, 1e-3, 1, 0);
  EXPECT_LT(rel(metric_tensor(c, R).determinant(), -std::pow(aux_forms(c, R).j, 8)), 1e-6);
}

TEST(MetricTensor, FrozenOracle) {
  // Exact Hessian of Psi/2 at 30 digits, g = 0.5, R = (3, 1, 1, 0).
  const auto c = derive_constants(0.5);
  Mat4 want;
  want << 0.901746088862225220730508216729, 0.195750825468199336693207715323, 0.195750825468199336693207715323, 0,
      0.195750825468199336693207715323, -1.64420806735769415312395930177, -0.293626238202299005039811572984, 0,
      0.195750825468199336693207715323, -0.293626238202299005039811572984, -1.64420806735769415312395930177, 0, 0, 0,
      0, -1.35058182915539514808414772879;
  EXPECT_LT(mat_rel(metric_tensor(c, Vec4(3, 1, 1, 0)), want), 1e-8);
  EXPECT_LT(mat_rel(metric_tensor_closed(c, Vec4(3, 1, 1, 0)), want), 1e-13);
}

TEST(MetricTensor, DegreeZeroHomogeneity) {
  PointSampler s(14);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    const Vec4 R = s.point(c);
    for (double lam : {0.5, 2.0, 3.0, 0.25}) EXPECT_LT(mat_rel(metric_tensor_closed(c, lam * R), metric_tensor_closed(c, R)), 1e-13);
  }
}

TEST(MetricTensor, LegendreDualityAllSectors) {
  PointSampler s(15);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 30; ++i) {
      const Vec4 R = s.point(c);
      const Vec4 P = covector(c, R);
      EXPECT_LT(rel(fhf(c, P), fmf(c, R)), 1e-12) << g << " " << R.transpose();
      EXPECT_LT((P - metric_tensor_closed(c, R) * R).norm() / P.norm(), 1e-12);
    }
  }
}

TEST(Cartan, VanishesAtZero) {
  const auto c = derive_constants(0);
  EXPECT_EQ(cartan_tensor(c, Vec4(2, 1, 0.5, 0)).max_abs(), 0.0);
  EXPECT_EQ(cartan_tensor_closed(c, Vec4(2, 1, 0.5, 0)).max_abs(), 0.0);
}

TEST(Cartan, SymmetryHomogeneityAndClosedForm) {
  PointSampler s(16);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 15; ++i) {
      const Vec4 R = s.point(c);
      const Tensor3 C = cartan_tensor(c, R);
      const Tensor3 Cc = cartan_tensor_closed(c, R);
      const double scale = Cc.max_abs();
      EXPECT_LT((C - Cc).max_abs() / scale, 1e-6) << g << " " << R.transpose();
      double contr = 0, asym = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
          double v = 0;
          for (int r = 0; r < 4; ++r) {
            v += Cc(p, q, r) * R[r];
            asym = std::max({asym, std::abs(C(p, q, r) - C(q, p, r)), std::abs(C(p, q, r) - C(p, r, q))});
          }
          contr = std::max(contr, std::abs(v));
        }
      EXPECT_LT(contr / (scale * R.norm()), 1e-12);
      EXPECT_EQ(asym, 0.0);
      const Mat4 gi = metric_tensor(c, R).inverse();
      const Vec4 tr = trace(C, gi);
      EXPECT_LT((tr - cartan_trace(c, R)).cwiseAbs().maxCoeff() / cartan_trace(c, R).cwiseAbs().maxCoeff(), 1e-6);
      const Vec4 Cp = cartan_trace(c, R);
      EXPECT_LT(rel(Cp.dot(inverse_metric_closed(c, R) * Cp) * signed_square(c, R), -4 * g * g), 1e-11);
    }
  }
}

TEST(Cartan, ContractionAtUnitScale) {
  // g = 1 and F = 2: C_p C^p = -4 g^2 / F^2 = -1.
  const auto c = derive_constants(1);
  Vec4 R(3, 1, 0.5, 0);
  R *= 2.0 / fmf(c, R);
  const Vec4 Cp = trace(cartan_tensor(c, R), metric_tensor(c, R).inverse());
  EXPECT_NEAR(Cp.dot(metric_tensor(c, R).inverse() * Cp), -1.0, 1e-6);
}

TEST(Curvature, IndicatrixValues) {
  EXPECT_EQ(indicatrix_curvature(derive_constants(0)), -1.0);
  EXPECT_EQ(indicatrix_curvature(derive_constants(2)), -2.0);
  EXPECT_EQ(curvature_constant(derive_constants(2)), 1.0);
}

TEST(Curvature, ZeroAtZero) {
  const auto c = derive_constants(0);
  EXPECT_EQ(curvature_tensor(c, Vec4(2, 1, 0.5, 0.1)).max_abs(), 0.0);
}

TEST(Curvature, ConstantModelFromFiniteDifferences) {
  PointSampler s(17);
  for (double g : {0.8, -0.8, 2.0}) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 10; ++i) {
      const Vec4 R = s.point(c);
      const Mat4 gm = metric_tensor(c, R);
      const double psi = signed_square(c, R);
      const Mat4 hpq = angular_metric(gm, gm * R, psi);
      const Tensor4 model = curvature_model(c, hpq, psi);
      EXPECT_LT((curvature_tensor(c, R) - model).max_abs() / model.max_abs(), 1e-5) << g << " " << R.transpose();
    }
  }
  const auto c = derive_constants(0.8);
  const Vec4 R(2, 0.5, 0.5, 0.5);
  const Tensor4 S = curvature_tensor(c, R);
  double anti = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int t = 0; t < 4; ++t) anti = std::max({anti, std::abs(S(p, q, r, t) + S(p, q, t, r))});
  EXPECT_LT(anti, 1e-14);
}

TEST(Frames, IdentityAtZero) {
  const auto c = derive_constants(0);
  const Frame4 f = invariant_frame(c, Vec4(2, 1, 0.3, 0.2));
  EXPECT_LT(mat_rel(f.e, Mat4::Identity()), 1e-15);
  EXPECT_LT(mat_rel(f.inv, Mat4::Identity()), 1e-15);
}

TEST(Frames, ReconstructionAndReciprocity) {
  PointSampler s(18);
  for (double g : kGrid) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 20; ++i) {
      const Vec4 R = s.point(c);
      const Frame4 f = invariant_frame(c, R);
      EXPECT_LT(mat_rel(f.e * f.inv, Mat4::Identity()), 1e-12);
      EXPECT_LT(mat_rel(f.e * minkowski() * f.e.transpose(), metric_tensor(c, R)), 1e-7);
      // e_q^P = sigma_q^P / h + (gamma/h) sigma^P R_q / Psi
      const Mat4 T = sigma_jacobian(c, R);
      const Mat4 alt = T / c.h + c.gamma / c.h * covector(c, R) * sigma(c, R).transpose() / signed_square(c, R);
      EXPECT_LT(mat_rel(f.e, alt), 1e-12);
    }
  }
}

TEST(Frames, RicciRotationTransformAndContraction) {
  PointSampler s(19);
  for (double g : {1.0, -0.8}) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 20; ++i) {
      const Vec4 R = s.point(c);
      const Tensor3 Rr = ricci_rotation(c, R);
      const Tensor3 Rq = quasi_ricci(c, sigma(c, R));
      const Mat4 T = sigma_jacobian(c, R);
      double res = 0, anti = 0;
      for (int P = 0; P < 4; ++P)
        for (int Q = 0; Q < 4; ++Q) {
          double contr = 0;
          for (int p = 0; p < 4; ++p) {
            double v = 0;
            for (int k = 0; k < 4; ++k) v += Rq(P, Q, k) * T(p, k);
            res = std::max(res, std::abs(v - Rr(P, Q, p)));
            anti = std::max(anti, std::abs(Rr(P, Q, p) + Rr(Q, P, p)));
            contr += Rr(P, Q, p) * R[p];
          }
          EXPECT_LT(std::abs(contr), 1e-12 * std::max(1.0, Rr.max_abs()));
        }
      EXPECT_LT(res / Rr.max_abs(), 1e-12);
      EXPECT_EQ(anti, 0.0);
    }
  }
}

TEST(Frames, CurlIdentityReproducesCurvature) {
  PointSampler s(20);
  for (double g : {1.0, -1.2}) {
    const auto c = derive_constants(g);
    for (int i = 0; i < 6; ++i) {
      const Vec4 R = s.point(c);
      const double step = fd::kFirstStep * regularity_scale(c, R);
      const auto dR = fd::gradient([&](const Vec4& X) { return ricci_rotation(c, X, GuardBand{0}); }, R, step);
      const Mat4 gm = metric_tensor_closed(c, R);
      const Mat4 elow = invariant_frame(c, R).inv * gm;  // e_Pt, row P
      const double psi = signed_square(c, R);
      const Mat4 hpq = angular_metric(gm, covector(c, R), psi);
      const Tensor4 S = curvature_model(c, hpq, psi);
      double res = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
          for (int t = 0; t < 4; ++t)
            for (int u = 0; u < 4; ++u) {
              double v = 0;
              for (int P = 0; P < 4; ++P)
                for (int Q = 0; Q < 4; ++Q) v += elow(P, t) * elow(Q, u) * (dR[p](P, Q, q) - dR[q](P, Q, p));
              res = std::max(res, std::abs(v - 2 * c.h / (1 + c.h) * S(p, q, t, u)));
            }
      EXPECT_LT(res / S.max_abs(), 1e-6) << g << " " << R.transpose();
    }
  }
}

TEST(Geodesics, StraightLinesAtZero) {
  const auto c = derive_constants(0);
  const GeodesicState d = geodesic_step(c, Vec4(2, 1, 0, 0), Vec4(1, 0.2, 0.1, 0));
  EXPECT_EQ(d.V.norm(), 0.0);
  EXPECT_THROW(geodesic_step(c, Vec4(2, 1, 0, 0), Vec4::Zero()), DomainError);
}

TEST(Geodesics, QuadraticScalingInTangent) {
  const auto c = derive_constants(1.3);
  const Vec4 R(2, 0.7, 0.2, -0.4), V(1, 0.3, -0.2, 0.1);
  const Vec4 a1 = geodesic_step(c, R, V).V, a2 = geodesic_step(c, R, 2.5 * V).V;
  EXPECT_LT((a2 - 6.25 * a1).norm() / a2.norm(), 1e-13);
}

TEST(Geodesics, ArcLengthRatePreserved) {
  const auto c = derive_constants(1);
  GeodesicState s0{Vec4(3, 1, 0.5, 0), Vec4(1, 0.2, 0.4, 0.1)};
  const auto path = integrate_geodesic(c, s0, 0.01, 100);
  const double r0 = arc_length_rate(c, path.front());
  double drift = 0;
  for (const auto& st : path) drift = std::max(drift, std::abs(arc_length_rate(c, st) - r0) / r0);
  EXPECT_LT(drift, 1e-8);
  // Radial data stays radial: the velocity keeps pointing along R.
  GeodesicState rad{Vec4(3, 1, 0, 0), Vec4(3, 1, 0, 0)};
  const auto rp = integrate_geodesic(c, rad, 0.01, 100);
  EXPECT_LT(std::abs(rp.back().R[2]), 1e-14);
}
