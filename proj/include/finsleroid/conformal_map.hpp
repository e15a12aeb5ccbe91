#pragma once

// Conformal flattening: the multiplier kappa with s_pq = kappa^2 g_pq flat,
// the flat coordinates r = rho(R) and their inverse eta, Jacobian tables in the
// timelike and spacelike regions, and a finite-difference zero-curvature check.

#include "finsleroid/metric_tensor.hpp"

namespace finsleroid {

enum class Region { timelike, spacelike };

inline std::string to_string(Region r) { return r == Region::timelike ? "timelike" : "spacelike"; }

inline Region region_of(const DeformationParameter& c, const Vec4& R) {
  const Sector s = classify(c, R);
  if (is_timelike(s)) return Region::timelike;
  if (s == Sector::spacelike) return Region::spacelike;
  throw ConeProximityError("isotropic point has no conformal region");
}

// Timelike: w = |R|/R0, E = 1 - g w/2, Q = E^2 - h^2 w^2 and wv^a = R^a/R0.
// Spacelike: k = R0/|R|, f = k - g/2, L = h^2 - f^2, q = |R|.
// n^a = R^a/|R| in both.
struct SectorCoordinates {
  Region region;
  double w = 0, E = 0, Q = 0;
  double k = 0, f = 0, L = 0, q = 0;
  Eigen::Vector3d wv = Eigen::Vector3d::Zero();
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
};

inline SectorCoordinates sector_coordinates(const DeformationParameter& c, const Vec4& R) {
  SectorCoordinates s;
  s.region = region_of(c, R);
  s.q = spatial_norm(R);
  if (s.q == 0) throw ConeProximityError("sector coordinates need |R| > 0");
  s.n = R.tail<3>() / s.q;
  if (s.region == Region::timelike) {
    s.w = s.q / R[0];
    s.E = 1.0 - 0.5 * c.g * s.w;
    s.Q = s.E * s.E - c.h * c.h * s.w * s.w;
    s.wv = R.tail<3>() / R[0];
  } else {
    s.k = R[0] / s.q;
    s.f = s.k - 0.5 * c.g;
    s.L = c.h * c.h - s.f * s.f;
  }
  return s;
}

// r = kappa sigma(R) / h
inline Vec4 rho(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Vec4 t = sigma(c, R, guard);
  return conformal_factor(c, R) * t / c.h;
}

// nu(r) = (h S(r) / sqrt 2)^{-gamma/h}, equal to 1/kappa at R = eta(r).
inline double inverse_conformal_factor(const DeformationParameter& c, const Vec4& r) {
  const double Sr = pseudo_norm(r);
  if (Sr == 0) throw ConeProximityError("flat point on the light cone");
  return std::exp(-c.gamma / c.h * std::log(c.h * Sr / std::sqrt(2.0)));
}

// Inverse of rho: t = h nu(r) r, then R = mu(t).
inline Vec4 eta(const DeformationParameter& c, const Vec4& r, const GuardBand& guard = {}) {
  if (!r.allFinite()) throw DomainError("non-finite flat point");
  return mu(c, c.h * r * inverse_conformal_factor(c, r), guard);
}

// rho_p^m = kappa e_p^m, row p.
inline Mat4 rho_jacobian(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  return conformal_factor(c, R) * invariant_frame(c, R, guard).e;
}

// eta_m^p evaluated at R = eta(r), row m.
inline Mat4 eta_jacobian_at(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  return invariant_frame(c, R, guard).inv / conformal_factor(c, R);
}

inline Mat4 eta_jacobian(const DeformationParameter& c, const Vec4& r) { return eta_jacobian_at(c, eta(c, r)); }

inline Mat4 rho_jacobian_fd(const DeformationParameter& c, const Vec4& R) {
  require_regular(c, R);
  return fd::jacobian([&](const Vec4& X) { return rho(c, X, GuardBand{0}); }, R, fd::kFirstStep * regularity_scale(c, R));
}

namespace detail {

inline void require_region(const SectorCoordinates& s, Region requested) {
  if (s.region != requested)
    throw RegionMismatch("point lies in the " + to_string(s.region) + " region, table requested for " +
                         to_string(requested));
}

}  // namespace detail

// Explicit rho_p^m tables (row p).
inline Mat4 rho_table(const DeformationParameter& c, const Vec4& R, Region requested) {
  require_regular(c, R);
  const SectorCoordinates s = sector_coordinates(c, R);
  detail::require_region(s, requested);
  const double jk = aux_forms(c, R).j * conformal_factor(c, R);
  const double h = c.h, g = c.g;
  Mat4 M;
  if (s.region == Region::timelike) {
    const double w = s.w, E = s.E, Q = s.Q;
    M(0, 0) = (E * (1 - g * w) - h * w * w) * jk / Q;
    for (int a = 0; a < 3; ++a) {
      M(a + 1, 0) = (h - E) * jk * s.wv[a] / Q;
      M(0, a + 1) = (h * Q - E + h * w * w) * jk * s.wv[a] / Q;
      for (int b = 0; b < 3; ++b)
        M(b + 1, a + 1) = (Q * (a == b) + ((1 - h) * w + 0.5 * g) * s.wv[b] * s.wv[a] / w) * jk / Q;
    }
  } else {
    const double k = s.k, f = s.f, L = s.L;
    M(0, 0) = (h - (k - g) * f) * jk / L;
    for (int a = 0; a < 3; ++a) {
      M(a + 1, 0) = (f - k * h) * jk * s.n[a] / L;
      M(0, a + 1) = (f - (k - g) * h) * jk * s.n[a] / L;
      for (int b = 0; b < 3; ++b) M(b + 1, a + 1) = (L * (a == b) + (c.gamma - 0.5 * g * k) * s.n[a] * s.n[b]) * jk / L;
    }
  }
  return M;
}

inline Mat4 rho_table(const DeformationParameter& c, const Vec4& R) { return rho_table(c, R, region_of(c, R)); }

// Explicit eta_m^p tables at R = eta(r) (row m).
inline Mat4 eta_table(const DeformationParameter& c, const Vec4& R, Region requested) {
  require_regular(c, R);
  const SectorCoordinates s = sector_coordinates(c, R);
  detail::require_region(s, requested);
  const double jk = aux_forms(c, R).j * conformal_factor(c, R);
  const double h = c.h, g = c.g;
  Mat4 M;
  if (s.region == Region::timelike) {
    const double w = s.w, E = s.E, Q = s.Q;
    M(0, 0) = (E - h * w * w) / (jk * Q);
    for (int a = 0; a < 3; ++a) {
      M(a + 1, 0) = (E - h) * s.wv[a] / (jk * Q);
      M(0, a + 1) = (E - h * w * w - h * Q) * s.wv[a] / (jk * Q);
      for (int b = 0; b < 3; ++b)
        M(b + 1, a + 1) = (Q * (a == b) + ((E - h) * w - 0.5 * g * Q) * s.wv[b] * s.wv[a] / w) / (jk * Q);
    }
  } else {
    const double k = s.k, f = s.f, L = s.L;
    M(0, 0) = (h - f * k) / (jk * L);
    for (int a = 0; a < 3; ++a) {
      M(a + 1, 0) = (k * h - f) * s.n[a] / (jk * L);
      M(0, a + 1) = ((k - g) * h - f) * s.n[a] / (jk * L);
      for (int b = 0; b < 3; ++b)
        M(b + 1, a + 1) = (L * (a == b) + (h - (k - g) * f - L) * s.n[b] * s.n[a]) / (jk * L);
    }
  }
  return M;
}

inline Mat4 eta_table(const DeformationParameter& c, const Vec4& R) { return eta_table(c, R, region_of(c, R)); }

// d kappa / dR^q = gamma kappa R_q / Psi; with F^2 = |Psi| the sign flips in the
// spacelike region.
inline Vec4 kappa_gradient(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  return c.gamma * conformal_factor(c, R) * covector(c, R) / signed_square(c, R);
}

// s_pq = kappa^2 g_pq
inline Mat4 flat_metric(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const double k = conformal_factor(c, R);
  return k * k * metric_tensor_closed(c, R, guard);
}

// rho_p^m rho_q^n e_mn
inline Mat4 flat_metric_from_jacobian(const Mat4& rho_p_m) { return rho_p_m * minkowski() * rho_p_m.transpose(); }

// Christoffel symbols of a metric field, stored as (p, t, r) for S_p^t_r.
template <class MetricFn>
Tensor3 christoffel_fd(const MetricFn& metric, const Vec4& R, double step) {
  const auto ds = fd::gradient(metric, R, step);
  const Mat4 si = Mat4(metric(R)).inverse();
  Tensor3 G;
  for (int p = 0; p < 4; ++p)
    for (int t = 0; t < 4; ++t)
      for (int r = 0; r < 4; ++r) {
        double v = 0;
        for (int s = 0; s < 4; ++s) v += si(t, s) * (ds[r](p, s) + ds[p](r, s) - ds[s](p, r));
        G(p, t, r) = 0.5 * v;
      }
  return G;
}

// Riemann tensor M(t, u, r, s) for M_t^u_rs of a metric field, from nested
// differences with the outer step ten times the inner one.
template <class MetricFn>
Tensor4 riemann_fd(const MetricFn& metric, const Vec4& R, double inner) {
  const double outer = 10.0 * inner;
  std::array<Tensor3, 4> dG;
  for (int s = 0; s < 4; ++s)
    dG[s] = fd::partial([&](const Vec4& X) { return christoffel_fd(metric, X, inner); }, R, s, outer);
  const Tensor3 G = christoffel_fd(metric, R, inner);
  Tensor4 M;
  for (int t = 0; t < 4; ++t)
    for (int u = 0; u < 4; ++u)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) {
          double v = dG[s](t, u, r) - dG[r](t, u, s);
          for (int w = 0; w < 4; ++w) v += G(t, w, r) * G(w, u, s) - G(t, w, s) * G(w, u, r);
          M(t, u, r, s) = v;
        }
  return M;
}

inline Tensor3 flat_christoffel(const DeformationParameter& c, const Vec4& R, double step) {
  return christoffel_fd([&](const Vec4& X) -> Mat4 { return flat_metric(c, X, GuardBand{0}); }, R, step);
}

inline Tensor4 flat_curvature(const DeformationParameter& c, const Vec4& R) {
  require_regular(c, R);
  return riemann_fd([&](const Vec4& X) -> Mat4 { return flat_metric(c, X, GuardBand{0}); }, R,
                    fd::kFirstStep * regularity_scale(c, R));
}

// max |M_t^u_rs|, expected to vanish.
inline double flatness_certificate(const DeformationParameter& c, const Vec4& R) {
  const Tensor4 M = flat_curvature(c, R);
  if (!M.all_finite())
    throw ConvergenceError("finite-difference curvature is not finite");
  return M.max_abs();
}

// Divergence of the density kappa^{-3} sqrt|det s| eta_0^p = kappa j^4 eta_0^p.
inline double density_divergence_fd(const DeformationParameter& c, const Vec4& R) {
  require_regular(c, R);
  const double h = fd::kFirstStep * regularity_scale(c, R);
  double div = 0;
  for (int p = 0; p < 4; ++p)
    div += fd::partial(
        [&](const Vec4& X) {
          const double j = aux_forms(c, X).j;
          return conformal_factor(c, X) * std::pow(j, 4) * eta_jacobian_at(c, X, GuardBand{0})(0, p);
        },
        R, p, h);
  return div;
}

// Closed form of the same divergence: -3 gamma E j^3 / (R0 Q) in the timelike
// region and 3 gamma f j^3 / (q L) in the spacelike one.
inline double density_divergence(const DeformationParameter& c, const Vec4& R) {
  require_regular(c, R);
  const SectorCoordinates s = sector_coordinates(c, R);
  const double j3 = std::pow(aux_forms(c, R).j, 3);
  if (s.region == Region::timelike) return -3.0 * c.gamma * s.E * j3 / (R[0] * s.Q);
  return 3.0 * c.gamma * s.f * j3 / (s.q * s.L);
}

}  // namespace finsleroid
