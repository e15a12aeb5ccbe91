#pragma once

// The map t = sigma(R) under which F becomes the flat interval S(t), its
// inverse mu, Jacobians, the induced quasi metric n_ij with its Christoffel
// symbols, quasi frames, the conformal multiplier xi and the wave phase.

#include "finsleroid/finite_difference.hpp"
#include "finsleroid/metric_function.hpp"

namespace finsleroid {

// S(t) = sqrt|e_ij t^i t^j|
inline double pseudo_norm(const Vec4& t) { return std::sqrt(std::abs(minkowski_square(t))); }

inline Vec4 sigma(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard, false);
  const double r = spatial_norm(R);
  const double j = aux_forms(c, R).j;
  Vec4 t;
  t[0] = j * (R[0] - 0.5 * c.g * r);
  t.tail<3>() = c.h * j * R.tail<3>();
  return t;
}

inline Vec4 mu(const DeformationParameter& c, const Vec4& t, const GuardBand& guard = {}) {
  if (!t.allFinite()) throw DomainError("non-finite quasi point");
  const double m = spatial_norm(t);
  const double n = t.norm();
  if (n == 0 || std::abs(t[0] - m) <= guard.cone * n || std::abs(t[0] + m) <= guard.cone * n)
    throw ConeProximityError("quasi point inside the guard band of the cone t0 = +-m");
  const double f = std::exp(0.25 * c.G * (std::log(std::abs(t[0] - m)) - std::log(std::abs(t[0] + m))));
  Vec4 R;
  R[0] = f * (t[0] + 0.5 * c.G * m);
  R.tail<3>() = f * t.tail<3>() / c.h;
  return R;
}

// T(p, i) = d sigma^i / dR^p in closed form.
inline Mat4 sigma_jacobian(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  const double r = spatial_norm(R);
  const double j = aux_forms(c, R).j;
  const Vec4 dl = log_j_gradient(c, R);
  const double A = R[0] - 0.5 * c.g * r;
  Vec4 dA;
  dA[0] = 1.0;
  dA.tail<3>() = -0.5 * c.g * R.tail<3>() / r;
  Mat4 T;
  for (int p = 0; p < 4; ++p) {
    T(p, 0) = j * (dl[p] * A + dA[p]);
    for (int a = 1; a < 4; ++a) T(p, a) = c.h * j * (dl[p] * R[a] + (p == a ? 1.0 : 0.0));
  }
  return T;
}

inline Mat4 sigma_jacobian_fd(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {}) {
  require_regular(c, R, guard);
  const double h = fd::kFirstStep * regularity_scale(c, R);
  return fd::jacobian([&](const Vec4& X) { return sigma(c, X, GuardBand{0}); }, R, h);
}

struct JacobianPair {
  Mat4 forward;  // t_p^i, row p
  Mat4 inverse;  // R_i^p = d mu^p / dt^i, row i
};

inline JacobianPair jacobians(const DeformationParameter& c, const Vec4& R, bool finite_difference = false,
                              const GuardBand& guard = {}) {
  JacobianPair J;
  J.forward = finite_difference ? sigma_jacobian_fd(c, R, guard) : sigma_jacobian(c, R, guard);
  J.inverse = J.forward.inverse();
  return J;
}

// Differentiates mu directly; used only to cross-check the inverted forward Jacobian.
inline Mat4 mu_jacobian_fd(const DeformationParameter& c, const Vec4& t) {
  const double m = spatial_norm(t);
  const double scale = std::min({std::abs(t[0] - m), std::abs(t[0] + m), m}) / std::sqrt(2.0);
  return fd::jacobian([&](const Vec4& X) { return mu(c, X, GuardBand{0}); }, t, fd::kFirstStep * scale);
}

struct QuasiMetric {
  Mat4 upper;  // n^ij
  Mat4 lower;  // n_ij
  Vec4 l_up;   // t^i / S
  Vec4 l_low;  // e_ij l^j
  double sigma2;  // e_ij t^i t^j, signed
};

// n^ij = h^2 e^ij - (g^2/4) t^i t^j / sigma2 and its inverse. With the signed
// square sigma2 the same expression covers the timelike and spacelike sectors.
inline QuasiMetric quasi_metric(const DeformationParameter& c, const Vec4& t) {
  QuasiMetric q;
  q.sigma2 = minkowski_square(t);
  if (q.sigma2 == 0) throw ConeProximityError("quasi metric undefined on the cone S(t) = 0");
  const Vec4 tl = lower(t);
  q.upper = c.h * c.h * minkowski() - 0.25 * c.g * c.g * t * t.transpose() / q.sigma2;
  q.lower = minkowski() / (c.h * c.h) + 0.25 * c.G * c.G * tl * tl.transpose() / q.sigma2;
  const double S = std::sqrt(std::abs(q.sigma2));
  q.l_up = t / S;
  q.l_low = tl / S;
  return q;
}

// N_i^m_j stored as N(i, m, j).
inline Tensor3 christoffel_N(const DeformationParameter& c, const Vec4& t) {
  const double s2 = minkowski_square(t);
  if (s2 == 0) throw ConeProximityError("Christoffel symbols undefined on the cone");
  const Vec4 tl = lower(t);
  const Mat4& e = minkowski();
  Tensor3 N;
  for (int i = 0; i < 4; ++i)
    for (int m = 0; m < 4; ++m)
      for (int j = 0; j < 4; ++j) N(i, m, j) = 0.25 * c.G * c.G * t[m] * (e(i, j) - tl[i] * tl[j] / s2) / s2;
  return N;
}

// Christoffel symbols of n_ij from finite differences of the closed-form metric.
inline Tensor3 christoffel_N_fd(const DeformationParameter& c, const Vec4& t) {
  const double m = spatial_norm(t);
  const double scale = std::min({std::abs(t[0] - m), std::abs(t[0] + m), t.norm()}) / std::sqrt(2.0);
  const double h = fd::kFirstStep * scale;
  const auto dn = fd::gradient([&](const Vec4& X) -> Mat4 { return quasi_metric(c, X).lower; }, t, h);
  const Mat4 nu = quasi_metric(c, t).upper;
  Tensor3 N;
  for (int i = 0; i < 4; ++i)
    for (int mm = 0; mm < 4; ++mm)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += nu(mm, k) * 0.5 * (dn[j](i, k) + dn[i](j, k) - dn[k](i, j));
        N(i, mm, j) = s;
      }
  return N;
}

// Curvature of the connection N, R(i, m, j, k) = d_j N_i^m_k - d_k N_i^m_j + N_s^m_j N_i^s_k - N_s^m_k N_i^s_j,
// with the derivatives taken by central differences of the closed form.
inline Tensor4 quasi_curvature(const DeformationParameter& c, const Vec4& t) {
  const double m = spatial_norm(t);
  const double scale = std::min({std::abs(t[0] - m), std::abs(t[0] + m), t.norm()}) / std::sqrt(2.0);
  const auto dN = fd::gradient([&](const Vec4& X) { return christoffel_N(c, X); }, t, fd::kFirstStep * scale);
  const Tensor3 N = christoffel_N(c, t);
  Tensor4 R;
  for (int i = 0; i < 4; ++i)
    for (int mm = 0; mm < 4; ++mm)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          double v = dN[j](i, mm, k) - dN[k](i, mm, j);
          for (int s = 0; s < 4; ++s) v += N(s, mm, j) * N(i, s, k) - N(s, mm, k) * N(i, s, j);
          R(i, mm, j, k) = v;
        }
  return R;
}

struct QuasiFrames {
  Mat4 f;  // f_i^P, row i: n_ij = e_PQ f_i^P f_j^Q
  Mat4 m;  // m_P^i, row P: n^ij = e^PQ m_P^i m_Q^j
};

inline QuasiFrames quasi_frames(const DeformationParameter& c, const Vec4& t) {
  const double s2 = minkowski_square(t);
  if (s2 == 0) throw ConeProximityError("quasi frames undefined on the cone");
  const Vec4 tl = lower(t);
  QuasiFrames F;
  F.f = (Mat4::Identity() + c.gamma * tl * t.transpose() / s2) / c.h;
  F.m = c.h * Mat4::Identity() - c.gamma * tl * t.transpose() / s2;
  return F;
}

// R^PQ_i stored as R(P, Q, i).
inline Tensor3 quasi_ricci(const DeformationParameter& c, const Vec4& t) {
  const double s2 = minkowski_square(t);
  const Mat4 f = quasi_frames(c, t).f;
  Tensor3 out;
  for (int P = 0; P < 4; ++P)
    for (int Q = 0; Q < 4; ++Q)
      for (int i = 0; i < 4; ++i) out(P, Q, i) = c.gamma * (t[P] * f(i, Q) - t[Q] * f(i, P)) / s2;
  return out;
}

// xi = (S^2/2)^{gamma/2}
inline double conformal_multiplier(const DeformationParameter& c, const Vec4& t) {
  const double s2 = std::abs(minkowski_square(t));
  if (s2 == 0) throw ConeProximityError("conformal multiplier undefined on the cone S(t) = 0");
  return std::exp(0.5 * c.gamma * std::log(0.5 * s2));
}

struct RTransform {
  Vec4 r;  // r^i = xi t^i / h
  Mat4 k;  // k(j, i) = dr^i / dt^j = xi f_j^i
};

inline RTransform r_transform(const DeformationParameter& c, const Vec4& t) {
  const double xi = conformal_multiplier(c, t);
  return {xi * t / c.h, xi * quasi_frames(c, t).f};
}

// kappa(R) = (F^2/2)^{gamma/2}, equal to xi(sigma(R)).
inline double conformal_factor(const DeformationParameter& c, const Vec4& R) {
  const double F = fmf(c, R);
  if (F == 0) throw ConeProximityError("conformal factor undefined on the cone");
  return std::exp(0.5 * c.gamma * std::log(0.5 * F * F));
}

struct PhaseContext {
  Vec4 k;         // covariant wave vector k_i
  double xi;      // conformal multiplier at t
  double phase;   // Phi = k_n t^n xi / h
  Vec4 gradient;  // dPhi/dt^j = xi f_j^P k_P
};

inline PhaseContext wave_phase_quasi(const DeformationParameter& c, const Vec4& t, const Vec4& k) {
  PhaseContext p;
  p.k = k;
  p.xi = conformal_multiplier(c, t);
  p.phase = k.dot(t) * p.xi / c.h;
  p.gradient = p.xi * quasi_frames(c, t).f * k;
  return p;
}

// Phi(R) = j kappa (k_0 A / h + k_a R^a), identical to k_n rho^n(R).
inline double wave_phase(const DeformationParameter& c, const Vec4& R, const Vec4& k) {
  require_regular(c, R, {}, false);
  const AuxForms a = aux_forms(c, R);
  return a.j * conformal_factor(c, R) * (k[0] * a.A / c.h + k.tail<3>().dot(R.tail<3>()));
}

}  // namespace finsleroid
