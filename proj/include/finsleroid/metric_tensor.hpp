#pragma once

// Metric tensor g_pq = (1/2) d^2 F^2 / dR^p dR^q (with the signed square), the
// Cartan tensor, curvature, invariant frames, Ricci rotation coefficients and
// geodesics.

#include "finsleroid/quasi_map.hpp"

#include <vector>

namespace finsleroid {

// Primary route: Richardson-extrapolated second differences of Psi/2.
inline Mat4 metric_tensor(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  const double h = fd::kSecondStep * regularity_scale(c, R);
  return fd::hessian([&](const Vec4& X) { return 0.5 * signed_square(c, X); }, R, h);
}

// Closed form g_pq = n_ij(sigma(R)) t_p^i t_q^j.
inline Mat4 metric_tensor_closed(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Mat4 T = sigma_jacobian(c, R, guard);
  const Vec4 t = sigma(c, R, guard);
  return T * quasi_metric(c, t).lower * T.transpose();
}

inline Mat4 inverse_metric_closed(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Mat4 Ti = sigma_jacobian(c, R, guard).inverse();
  const Vec4 t = sigma(c, R, guard);
  return Ti.transpose() * quasi_metric(c, t).upper * Ti;
}

// n^ij = t_p^i t_q^j g^pq from the finite-difference metric.
inline Mat4 quasi_metric_pushforward(const DeformationParameter& c, const Vec4& R) {
  const Mat4 T = sigma_jacobian(c, R);
  return T.transpose() * metric_tensor(c, R).inverse() * T;
}

// C_pqr = (1/4) d^3 Psi from third differences.
inline Tensor3 cartan_tensor(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  Tensor3 C;
  if (c.g == 0) return C;
  const double h = fd::kThirdStep * regularity_scale(c, R);
  auto quarter_psi = [&](const Vec4& X) { return 0.25 * signed_square(c, X); };
  for (int p = 0; p < 4; ++p)
    for (int q = p; q < 4; ++q)
      for (int r = q; r < 4; ++r) {
        const double v = fd::partial(quarter_psi, R, std::array<int, 3>{p, q, r}, h, 3);
        C(p, q, r) = C(p, r, q) = C(q, p, r) = C(q, r, p) = C(r, p, q) = C(r, q, p) = v;
      }
  return C;
}

// C_p = g^qr C_pqr = d ln J / dR^p with J = j^4.
inline Vec4 cartan_trace(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  return 4.0 * log_j_gradient(c, R);
}

inline Vec4 trace(const Tensor3& C, const Mat4& ginv) {
  Vec4 out = Vec4::Zero();
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) out[p] += ginv(q, r) * C(p, q, r);
  return out;
}

// h_pq = g_pq - R_p R_q / Psi
inline Mat4 angular_metric(const Mat4& g, const Vec4& Rlow, double psi) { return g - Rlow * Rlow.transpose() / psi; }

// Algebraic form C = (1/4)(h_pq C_r + h_pr C_q + h_qr C_p - C_p C_q C_r / C_t C^t).
inline Tensor3 cartan_from_trace(const Mat4& hpq, const Vec4& Cp, const Mat4& ginv) {
  Tensor3 C;
  const double CC = Cp.dot(ginv * Cp);
  if (CC == 0) return C;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        C(p, q, r) = 0.25 * (hpq(p, q) * Cp[r] + hpq(p, r) * Cp[q] + hpq(q, r) * Cp[p] - Cp[p] * Cp[q] * Cp[r] / CC);
  return C;
}

inline Tensor3 cartan_tensor_closed(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  if (c.g == 0) {
    require_regular(c, R, guard);
    return Tensor3{};
  }
  const Mat4 g = metric_tensor_closed(c, R, guard);
  const Mat4 gi = g.inverse();
  return cartan_from_trace(angular_metric(g, covector(c, R), signed_square(c, R)), cartan_trace(c, R), gi);
}

// C^p_qr = g^ps C_sqr, stored as (p, q, r).
inline Tensor3 raise_first(const Tensor3& C, const Mat4& ginv) {
  Tensor3 out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) {
        double s = 0;
        for (int t = 0; t < 4; ++t) s += ginv(p, t) * C(t, q, r);
        out(p, q, r) = s;
      }
  return out;
}

// S_pqrs = C_tqr C^t_ps - C_tqs C^t_pr
inline Tensor4 curvature_from_cartan(const Tensor3& C, const Mat4& ginv) {
  const Tensor3 Cu = raise_first(C, ginv);
  Tensor4 S;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) {
          double v = 0;
          for (int t = 0; t < 4; ++t) v += C(t, q, r) * Cu(t, p, s) - C(t, q, s) * Cu(t, p, r);
          S(p, q, r, s) = v;
        }
  return S;
}

// Curvature built entirely from finite-difference tensors.
inline Tensor4 curvature_tensor(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Mat4 g = metric_tensor(c, R, guard);
  return curvature_from_cartan(cartan_tensor(c, R, guard), g.inverse());
}

// (g^2/4)(h_pr h_qs - h_ps h_qr)/Psi
inline Tensor4 curvature_model(const DeformationParameter& c, const Mat4& hpq, double psi) {
  Tensor4 S;
  const double k = curvature_constant(c) / psi;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) S(p, q, r, s) = k * (hpq(p, r) * hpq(q, s) - hpq(p, s) * hpq(q, r));
  return S;
}

struct Frame4 {
  Mat4 e;    // e_q^P, row q
  Mat4 inv;  // e_P^q, row P
};

// e_q^P = sigma_q^r f_r^P and its inverse e_P^q = mu_r^q m_P^r.
inline Frame4 invariant_frame(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Mat4 T = sigma_jacobian(c, R, guard);
  const QuasiFrames q = quasi_frames(c, sigma(c, R, guard));
  return {T * q.f, q.m * T.inverse()};
}

// R^PQ_q = gamma (sigma^P e_q^Q - sigma^Q e_q^P) / Psi, stored as (P, Q, q).
inline Tensor3 ricci_rotation(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  const Mat4 e = invariant_frame(c, R, guard).e;
  const Vec4 t = sigma(c, R, guard);
  const double psi = signed_square(c, R);
  Tensor3 out;
  for (int P = 0; P < 4; ++P)
    for (int Q = 0; Q < 4; ++Q)
      for (int q = 0; q < 4; ++q) out(P, Q, q) = c.gamma * (t[P] * e(q, Q) - t[Q] * e(q, P)) / psi;
  return out;
}

struct GeodesicState {
  Vec4 R;
  Vec4 V;  // dR/ds
};

// d^2R^p/ds^2 = -C_q^p_r V^q V^r
inline GeodesicState geodesic_step(const DeformationParameter& c, const Vec4& R, const Vec4& V) {
  if (V.norm() == 0) throw DomainError("geodesic tangent must be nonzero");
  GeodesicState d{V, Vec4::Zero()};
  if (c.g == 0) return d;
  const Mat4 gi = inverse_metric_closed(c, R);
  const Tensor3 C = cartan_tensor_closed(c, R);
  for (int p = 0; p < 4; ++p) {
    double a = 0;
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) a += gi(p, s) * C(q, s, r) * V[q] * V[r];
    d.V[p] = -a;
  }
  return d;
}

inline std::vector<GeodesicState> integrate_geodesic(const DeformationParameter& c, GeodesicState s, double ds,
                                                     int steps) {
  std::vector<GeodesicState> path{s};
  auto add = [](const GeodesicState& a, const GeodesicState& b, double k) {
    return GeodesicState{a.R + k * b.R, a.V + k * b.V};
  };
  for (int n = 0; n < steps; ++n) {
    const GeodesicState k1 = geodesic_step(c, s.R, s.V);
    const GeodesicState a2 = add(s, k1, 0.5 * ds);
    const GeodesicState k2 = geodesic_step(c, a2.R, a2.V);
    const GeodesicState a3 = add(s, k2, 0.5 * ds);
    const GeodesicState k3 = geodesic_step(c, a3.R, a3.V);
    const GeodesicState a4 = add(s, k3, ds);
    const GeodesicState k4 = geodesic_step(c, a4.R, a4.V);
    s.R += ds / 6.0 * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
    s.V += ds / 6.0 * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V);
    path.push_back(s);
  }
  return path;
}

// |g_pq V^p V^q|, the squared arc-length rate.
inline double arc_length_rate(const DeformationParameter& c, const GeodesicState& s) {
  return std::abs(s.V.dot(metric_tensor_closed(c, s.R) * s.V));
}

}  // namespace finsleroid
