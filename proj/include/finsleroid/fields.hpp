#pragma once

// Scalar, electromagnetic and spinor fields on the deformed space. Fields are
// closures R -> value; operators are evaluated with local finite-difference
// stencils, with the metric, Jacobian density and Cartan coefficients taken in
// closed form.

#include "finsleroid/conformal_map.hpp"
#include "finsleroid/gamma.hpp"
#include "finsleroid/o1_approx.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <functional>
#include <numbers>
#include <vector>

namespace finsleroid {

using ScalarFn = std::function<cplx(const Vec4&)>;
using CovectorFn = std::function<CVec4(const Vec4&)>;
using SpinorFn = std::function<CVec4(const Vec4&)>;

enum class ScalarFlavor { standard, conformal };
enum class DiracFlavor { standard, conformal };

struct ComplexScalarField {
  ScalarFn eval;
  double m = 0;
  ScalarFlavor flavor = ScalarFlavor::standard;
};

struct VectorPotentialField {
  CovectorFn eval;  // covariant A_p
};

struct SpinorField {
  SpinorFn eval;
  double m = 0;
  GammaAlgebra gamma = dirac_representation();
};

// value is the operator output; scale is the sum of magnitudes of the terms
// that were added to form it, so relative() measures cancellation.
struct Residual {
  cplx value{};
  double scale = 0;
  double relative() const { return scale > 0 ? std::abs(value) / scale : std::abs(value); }
};

struct Residual4 {
  CVec4 value = CVec4::Zero();
  double scale = 0;
  double relative() const { return scale > 0 ? value.norm() / scale : value.norm(); }
};

// Stencil steps are fractions of `length`; 0 means the distance to the nearest
// singular locus. Pass a wavelength bound for rapidly oscillating fields.
struct Stencil {
  double length = 0;
};

inline double stencil_length(const DeformationParameter& c, const Vec4& R, const Stencil& s) {
  require_regular(c, R);
  const double L = regularity_scale(c, R);
  return s.length > 0 ? std::min(L, s.length) : L;
}

inline double jacobian_density(const DeformationParameter& c, const Vec4& R) {
  return std::pow(aux_forms(c, R).j, 4);
}

// C^q = g^qp d_p ln J, so that (1/J) d_p(J g^pq) = -C^q.
inline Vec4 cartan_trace_upper(const DeformationParameter& c, const Vec4& R) {
  return inverse_metric_closed(c, R) * (4.0 * log_j_gradient(c, R));
}

// ---------------------------------------------------------------- scalar field

struct ScalarJet {
  cplx value{};
  CVec4 grad = CVec4::Zero();
  CMat4 hess = CMat4::Zero();
};

inline ScalarJet scalar_jet(const ScalarFn& phi, const Vec4& R, double length, bool second = true) {
  ScalarJet d;
  d.value = phi(R);
  for (int p = 0; p < 4; ++p) d.grad[p] = fd::partial(phi, R, p, fd::kFirstStep * length);
  if (second)
    for (int p = 0; p < 4; ++p)
      for (int q = p; q < 4; ++q)
        d.hess(p, q) = d.hess(q, p) = fd::partial(phi, R, std::array<int, 2>{p, q}, fd::kSecondStep * length);
  return d;
}

namespace detail {

// (1/J) d_p(J g^pq d_q phi) = g^pq phi_pq - C^q phi_q
inline Residual box_terms(const DeformationParameter& c, const ScalarJet& d, const Vec4& R) {
  const Mat4 gi = inverse_metric_closed(c, R);
  const Vec4 Cu = cartan_trace_upper(c, R);
  Residual r;
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      const cplx t = gi(p, q) * d.hess(p, q);
      r.value += t;
      r.scale += std::abs(t);
    }
    const cplx t = -Cu[p] * d.grad[p];
    r.value += t;
    r.scale += std::abs(t);
  }
  return r;
}

}  // namespace detail

inline cplx scalar_box(const DeformationParameter& c, const ScalarFn& phi, const Vec4& R, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  return detail::box_terms(c, scalar_jet(phi, R, L), R).value;
}

// The same operator with every factor differentiated numerically: the divergence
// of J g^pq phi_q by a nested stencil. Independent of the Cartan trace.
inline cplx scalar_box_fd(const DeformationParameter& c, const ScalarFn& phi, const Vec4& R, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  auto flux = [&](const Vec4& X) {
    CVec4 grad;
    for (int q = 0; q < 4; ++q) grad[q] = fd::partial(phi, X, q, fd::kFirstStep * L);
    const Mat4 gi = metric_tensor_closed(c, X, GuardBand{0}).inverse();
    return CVec4(std::sqrt(std::abs(gi.inverse().determinant())) * gi.cast<cplx>() * grad);
  };
  cplx div = 0;
  for (int p = 0; p < 4; ++p) div += fd::partial(flux, R, p, fd::kSecondStep * L)[p];
  return div / jacobian_density(c, R);
}

// box phi + m^2 phi
inline Residual klein_gordon_residual(const DeformationParameter& c, const ScalarFn& phi, double m, const Vec4& R,
                                      const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const ScalarJet d = scalar_jet(phi, R, L);
  Residual r = detail::box_terms(c, d, R);
  const cplx t = m * m * d.value;
  r.value += t;
  r.scale += std::abs(t);
  return r;
}

// box phi - (g^2/4) phi / Psi + kappa^2 m^2 phi, Psi the signed square of F.
inline Residual conformal_scalar_residual(const DeformationParameter& c, const ScalarFn& phi, double m,
                                          const Vec4& R, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const ScalarJet d = scalar_jet(phi, R, L);
  Residual r = detail::box_terms(c, d, R);
  const double kappa = conformal_factor(c, R);
  const cplx t1 = -0.25 * c.g * c.g * d.value / signed_square(c, R);
  const cplx t2 = kappa * kappa * m * m * d.value;
  r.value += t1 + t2;
  r.scale += std::abs(t1) + std::abs(t2);
  return r;
}

inline Residual field_equation_residual(const DeformationParameter& c, const ComplexScalarField& f, const Vec4& R,
                                        const Stencil& s = {}) {
  return f.flavor == ScalarFlavor::standard ? klein_gordon_residual(c, f.eval, f.m, R, s)
                                            : conformal_scalar_residual(c, f.eval, f.m, R, s);
}

// Scalar solutions and mode families.

// e^{i k_p R^p}
inline ScalarFn plane_wave(const Vec4& k, cplx amplitude = 1.0) {
  return [=](const Vec4& R) { return amplitude * std::exp(kI * k.dot(R)); };
}

// kappa e^{i k_n rho^n}: solves the conformal equation for k on the mass shell.
inline ScalarFn conformal_scalar_wave(const DeformationParameter& c, const Vec4& k, cplx amplitude = 1.0) {
  return [=](const Vec4& R) {
    return amplitude * conformal_factor(c, R) * std::exp(kI * k.dot(rho(c, R, GuardBand{0})));
  };
}

// e^{i k_n sigma^n}: the first-order family, exact up to O(g^2).
inline ScalarFn sigma_scalar_mode(const DeformationParameter& c, const Vec4& k, cplx amplitude = 1.0) {
  return [=](const Vec4& R) { return amplitude * std::exp(kI * k.dot(sigma(c, R, GuardBand{0}))); };
}

// Exact solution u(S) of the quasi-pseudoeuclidean equation depending on
// S = |t_i t^i|^{1/2} only, pulled back by t = sigma(R): J_1(mS)/S inside the
// cone, K_1(mS)/S outside, 1/S^2 for m = 0. Solves box phi + m^2 phi = 0.
inline ScalarFn radial_quasi_solution(const DeformationParameter& c, double m) {
  if (m < 0) throw DomainError("mass must be non-negative");
  return [=](const Vec4& R) -> cplx {
    const Vec4 t = sigma(c, R, GuardBand{0});
    const double s2 = minkowski_square(t), S = std::sqrt(std::abs(s2));
    if (m == 0) return 1.0 / s2;
    return s2 > 0 ? std::cyl_bessel_j(1.0, m * S) / S : std::cyl_bessel_k(1.0, m * S) / S;
  };
}

// Exact massless solution (a_i t^i) |t_j t^j|^beta, beta = -1 + sqrt(1 + 3h^2)/2,
// pulled back by t = sigma(R). Not a function of F alone.
inline ScalarFn dipole_quasi_solution(const DeformationParameter& c, const Vec4& a) {
  const double beta = -1.0 + 0.5 * std::sqrt(1.0 + 3.0 * c.h * c.h);
  return [=](const Vec4& R) -> cplx {
    const Vec4 t = sigma(c, R, GuardBand{0});
    return a.dot(t) * std::pow(std::abs(minkowski_square(t)), beta);
  };
}

// exp(-m j kappa |R|) / (m j |R|)
inline ScalarFn yukawa(const DeformationParameter& c, double m) {
  if (!(m > 0)) throw DomainError("the Yukawa field needs m > 0");
  return [=](const Vec4& R) -> cplx {
    const double r = spatial_norm(R), j = aux_forms(c, R).j;
    return std::exp(-m * j * conformal_factor(c, R) * r) / (m * j * r);
  };
}

// (1 + (g/4)(1 + m|R|) ln|(R0-|R|)/(R0+|R|)|) e^{-m|R|} / (m|R|)
inline ScalarFn yukawa_o1(double g, double m) {
  if (!(m > 0)) throw DomainError("the Yukawa field needs m > 0");
  return [=](const Vec4& R) -> cplx {
    const double r = spatial_norm(R);
    return (1 + 0.25 * g * (1 + m * r) * log_ratio(R)) * std::exp(-m * r) / (m * r);
  };
}

// Current and energy-momentum.

// J_p = i (phi* d_p phi - phi d_p phi*) J
inline CVec4 scalar_current(const DeformationParameter& c, const ScalarFn& phi, const Vec4& R, double length) {
  const cplx v = phi(R);
  CVec4 Jp;
  for (int p = 0; p < 4; ++p) {
    const cplx d = fd::partial(phi, R, p, fd::kFirstStep * length);
    Jp[p] = kI * (std::conj(v) * d - v * std::conj(d));
  }
  return jacobian_density(c, R) * Jp;
}

struct CurrentReport {
  CVec4 current = CVec4::Zero();  // covariant J_p
  Residual divergence;            // d_p J^p
};

inline CurrentReport scalar_current_conservation(const DeformationParameter& c, const ScalarFn& phi, const Vec4& R,
                                                 const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  CurrentReport out;
  out.current = scalar_current(c, phi, R, L);
  auto upper = [&](const Vec4& X) {
    return CVec4(inverse_metric_closed(c, X, GuardBand{0}).cast<cplx>() * scalar_current(c, phi, X, L));
  };
  for (int p = 0; p < 4; ++p) {
    const cplx t = fd::partial(upper, R, p, fd::kSecondStep * L)[p];
    out.divergence.value += t;
    out.divergence.scale += std::abs(t);
  }
  out.divergence.scale += upper(R).norm() / L;
  return out;
}

struct DivergenceReport {
  CMat4 T = CMat4::Zero();  // T_p^q, row p
  Residual4 covariant;      // d_q T_p^q - C_p^r_q T_r^q + C_t^q_q T_p^t
  Residual4 plain;          // d_q T_p^q
};

// Covariant divergence of a mixed tensor field T_p^q with the Cartan
// coefficients C_p^r_q = g^rs C_psq, which are the Christoffel symbols of g_pq(R).
template <class TFn>
DivergenceReport covariant_divergence(const DeformationParameter& c, const TFn& T, const Vec4& R, double length) {
  DivergenceReport out;
  out.T = T(R);
  std::array<CMat4, 4> dT;
  for (int q = 0; q < 4; ++q) dT[q] = fd::partial(T, R, q, fd::kSecondStep * length);
  Tensor3 Gam;  // (p, r, q)
  Vec4 trace = Vec4::Zero();
  if (c.g != 0) {
    const Mat4 gi = inverse_metric_closed(c, R);
    Gam = raise_first(cartan_tensor_closed(c, R), gi);  // (s, p, q) = C^s_pq
    trace = 4.0 * log_j_gradient(c, R);
  }
  for (int p = 0; p < 4; ++p) {
    double sc = 0;
    for (int q = 0; q < 4; ++q) {
      out.plain.value[p] += dT[q](p, q);
      sc += std::abs(dT[q](p, q));
    }
    out.plain.scale += sc;
    cplx cov = out.plain.value[p];
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) {
        const cplx t = -Gam(r, p, q) * out.T(r, q);
        cov += t;
        sc += std::abs(t);
      }
    for (int t = 0; t < 4; ++t) {
      const cplx x = trace[t] * out.T(p, t);
      cov += x;
      sc += std::abs(x);
    }
    out.covariant.value[p] = cov;
    out.covariant.scale += sc;
  }
  // Floor for fields whose stress is locally constant.
  out.plain.scale += out.T.norm() / length;
  out.covariant.scale += out.T.norm() / length;
  return out;
}

// T_p^q = phi_p phi*^q + phi*_p phi^q - delta_p^q L, L = g^pq phi*_p phi_q - m^2 |phi|^2
inline CMat4 scalar_stress(const DeformationParameter& c, const ScalarFn& phi, double m, const Vec4& X,
                           double length) {
  const cplx v = phi(X);
  CVec4 d;
  for (int p = 0; p < 4; ++p) d[p] = fd::partial(phi, X, p, fd::kFirstStep * length);
  const CMat4 gi = inverse_metric_closed(c, X, GuardBand{0}).cast<cplx>();
  const CVec4 du = gi * d, dcu = gi * d.conjugate();
  const cplx Lag = d.dot(du) - m * m * std::norm(v);  // dot conjugates d
  CMat4 T = d * dcu.transpose() + d.conjugate() * du.transpose();
  T -= Lag * CMat4::Identity();
  return T;
}

inline DivergenceReport scalar_energy_momentum(const DeformationParameter& c, const ScalarFn& phi, double m,
                                               const Vec4& R, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  return covariant_divergence(c, [&](const Vec4& X) { return scalar_stress(c, phi, m, X, L); }, R, L);
}

// ------------------------------------------------------------ electromagnetism

// dA(p, q) = d_q A_p
inline CMat4 covector_jacobian(const CovectorFn& A, const Vec4& R, double length) {
  CMat4 d;
  for (int q = 0; q < 4; ++q) d.col(q) = fd::partial(A, R, q, fd::kFirstStep * length);
  return d;
}

// F_pq = d_q A_p - d_p A_q
inline CMat4 field_strength(const CovectorFn& A, const Vec4& R, double length) {
  const CMat4 d = covector_jacobian(A, R, length);
  return d - d.transpose();
}

// D^pq = J g^pt g^qs F_ts
inline CMat4 induction_density(const DeformationParameter& c, const CMat4& F, const Vec4& R) {
  const CMat4 gi = inverse_metric_closed(c, R, GuardBand{0}).cast<cplx>();
  return jacobian_density(c, R) * gi * F * gi;
}

// d_q D^pq
inline Residual4 maxwell_residual(const DeformationParameter& c, const CovectorFn& A, const Vec4& R,
                                  const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  auto D = [&](const Vec4& X) { return induction_density(c, field_strength(A, X, L), X); };
  Residual4 out;
  for (int q = 0; q < 4; ++q) {
    const CMat4 dD = fd::partial(D, R, q, fd::kSecondStep * L);
    for (int p = 0; p < 4; ++p) {
      out.value[p] += dD(p, q);
      out.scale += std::abs(dD(p, q));
    }
  }
  out.scale += D(R).norm() / L;
  return out;
}

// Largest |d_r F_pq + d_q F_rp + d_p F_qr| over index triples.
inline double cyclic_defect(const CovectorFn& A, const Vec4& R, double length) {
  std::array<CMat4, 4> dF;
  for (int r = 0; r < 4; ++r)
    dF[r] = fd::partial([&](const Vec4& X) { return field_strength(A, X, length); }, R, r, fd::kSecondStep * length);
  double m = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) m = std::max(m, std::abs(dF[r](p, q) + dF[q](r, p) + dF[p](q, r)));
  return m;
}

// T_p^q = -F_pr F^qr + (1/4) delta_p^q F_st F^st
inline CMat4 em_stress(const DeformationParameter& c, const CMat4& F, const Vec4& X) {
  const CMat4 gi = inverse_metric_closed(c, X, GuardBand{0}).cast<cplx>();
  const CMat4 Fu = gi * F * gi;
  const cplx inv = F.cwiseProduct(Fu).sum();
  return -F * Fu.transpose() + 0.25 * inv * CMat4::Identity();
}

inline DivergenceReport em_energy_momentum(const DeformationParameter& c, const CovectorFn& A, const Vec4& R,
                                           const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  return covariant_divergence(c, [&](const Vec4& X) { return em_stress(c, field_strength(A, X, L), X); }, R, L);
}

// Flat-space potentials B_m(r).
inline CovectorFn flat_plane_wave(const CVec4& b, const Vec4& k) {
  return [=](const Vec4& r) { return CVec4(b * std::exp(kI * k.dot(r))); };
}

inline CovectorFn flat_coulomb(double e) {
  return [=](const Vec4& r) {
    CVec4 B = CVec4::Zero();
    B[0] = e / spatial_norm(r);
    return B;
  };
}

// A_p(R) = rho_p^m(R) B_m(rho(R)).
inline CovectorFn em_export(const DeformationParameter& c, CovectorFn B) {
  return [c, B = std::move(B)](const Vec4& R) {
    return CVec4(rho_jacobian(c, R, GuardBand{0}).cast<cplx>() * B(rho(c, R, GuardBand{0})));
  };
}

// As above, refusing points outside the named region.
inline CovectorFn em_export(const DeformationParameter& c, CovectorFn B, Region region) {
  return [c, region, B = std::move(B)](const Vec4& R) {
    detail::require_region(sector_coordinates(c, R), region);
    return CVec4(rho_jacobian(c, R, GuardBand{0}).cast<cplx>() * B(rho(c, R, GuardBand{0})));
  };
}

// A_p = rho_p^0 e / (j kappa |R|)
inline CovectorFn coulomb(const DeformationParameter& c, double e = 1.0) { return em_export(c, flat_coulomb(e)); }

// First-order Coulomb potential: A_0 = e/|R| - (g/2) R0 e / S^2, A_a = (g/2) R^a e / S^2.
inline CovectorFn coulomb_o1(double g, double e = 1.0) {
  return [=](const Vec4& R) {
    const double r = spatial_norm(R), S2 = minkowski_square(R);
    CVec4 A;
    A[0] = e / r - 0.5 * g * R[0] * e / S2;
    for (int a = 1; a < 4; ++a) A[a] = 0.5 * g * R[a] * e / S2;
    return A;
  };
}

// The closed form as printed, kept for comparison:
// A_0 = (1 + (h-1)/L + (g/2)k - g^2/4) e/|R|, A_a = -((h-1)k + g/2) R^a e/|R|^2, k = R0/|R|, L = 1 + gk - k^2.
inline CovectorFn coulomb_printed(const DeformationParameter& c, double e = 1.0) {
  return [=](const Vec4& R) {
    const double r = spatial_norm(R), k = R[0] / r, L = 1 + c.g * k - k * k;
    CVec4 A;
    A[0] = (1 + (c.h - 1) / L + 0.5 * c.g * k - 0.25 * c.g * c.g) * e / r;
    for (int a = 1; a < 4; ++a) A[a] = -((c.h - 1) * k + 0.5 * c.g) * R[a] * e / (r * r);
    return A;
  };
}

// A_p = sigma_p^i a_i e^{i k_n sigma^n}: the first-order electromagnetic family.
inline CovectorFn sigma_em_mode(const DeformationParameter& c, const Vec4& k, const CVec4& a) {
  return [=](const Vec4& R) {
    const Vec4 t = sigma(c, R, GuardBand{0});
    return CVec4(sigma_jacobian(c, R, GuardBand{0}).cast<cplx>() * a * std::exp(kI * k.dot(t)));
  };
}

// Plane wave k_n = (k0, -k0, 0, 0), b_m = (0, 0, 0, b3), in the spacelike region.
struct PlaneWaveComponents {
  CVec4 lower = CVec4::Zero();  // A_p
  CVec4 upper = CVec4::Zero();  // A^p = g^pq A_q
  CMat4 F = CMat4::Zero();      // F_pq
  double phase = 0;
};

namespace detail {

inline SectorCoordinates spacelike_wave_coordinates(const DeformationParameter& c, const Vec4& R) {
  const SectorCoordinates s = sector_coordinates(c, R);
  require_region(s, Region::spacelike);
  if (std::abs(s.L) < 1e-12 * c.h * c.h) throw CausticError("L = 1 + gk - k^2 vanishes");
  return s;
}

// Shared structure of the general and R0 = 0 forms: jk = j kappa, ku = kappa / j.
inline PlaneWaveComponents plane_wave_from(const DeformationParameter& c, const Eigen::Vector3d& n, double k,
                                           double L, double jk, double ku, double phase, double b3) {
  const double h = c.h, g = c.g, gam = c.gamma, f = k - 0.5 * g;
  const cplx e = std::exp(kI * phase);
  PlaneWaveComponents w;
  w.phase = phase;
  const cplx lo = jk * b3 / L * e;
  const double side = gam - 0.5 * g * k;
  w.lower[0] = (0.5 * g * (2 * h - 1) - gam * k) * n[2] * lo;
  for (int a = 0; a < 3; ++a) w.lower[a + 1] = side * n[a] * n[2] * lo;
  w.lower[3] += L * lo;
  const cplx up = ku * (-b3) / L * e;
  const double side_up = h - (k - g) * f - L;
  w.upper[0] = (k * h - f) * n[2] * up;
  for (int a = 0; a < 3; ++a) w.upper[a + 1] = side_up * n[a] * n[2] * up;
  w.upper[3] += L * up;
  return w;
}

}  // namespace detail

// A_{k}p, A^p and F_pq = d_q A_p - d_p A_q = i k0 [(rho_q^0 - rho_q^1) A_p - (rho_p^0 - rho_p^1) A_q].
inline PlaneWaveComponents em_plane_wave_components(const DeformationParameter& c, const Vec4& R, double k0 = 1.0,
                                                    double b3 = 1.0) {
  require_regular(c, R);
  const SectorCoordinates s = detail::spacelike_wave_coordinates(c, R);
  const double j = aux_forms(c, R).j, kappa = conformal_factor(c, R);
  const Vec4 kn(k0, -k0, 0, 0);
  PlaneWaveComponents w =
      detail::plane_wave_from(c, s.n, s.k, s.L, j * kappa, kappa / j, kn.dot(rho(c, R)), b3);
  const Mat4 P = rho_table(c, R, Region::spacelike);
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      w.F(p, q) = kI * k0 * ((P(q, 0) - P(q, 1)) * w.lower[p] - (P(p, 0) - P(p, 1)) * w.lower[q]);
  return w;
}

// The six printed closed forms for F_01, F_02, F_03, F_12, F_13, F_23 (upper
// triangle filled, antisymmetric completion). They follow the opposite sign
// convention F_pq = d_p A_q - d_q A_p.
inline CMat4 em_plane_wave_field_printed(const DeformationParameter& c, const Vec4& R, double k0 = 1.0,
                                         double b3 = 1.0) {
  require_regular(c, R);
  const SectorCoordinates s = detail::spacelike_wave_coordinates(c, R);
  const double g = c.g, h = c.h, gam = c.gamma, k = s.k, f = s.f;
  const Eigen::Vector3d& n = s.n;
  const double jk = aux_forms(c, R).j * conformal_factor(c, R);
  const cplx base = jk * jk / s.L * b3 * k0 * kI * std::exp(kI * Vec4(k0, -k0, 0, 0).dot(rho(c, R)));
  const double a = gam * h - 0.5 * g * f, b = gam - 0.5 * g * k;
  CMat4 F = CMat4::Zero();
  F(0, 1) = (0.5 * g - gam * (k - g) + a * n[0]) * n[2] * base;
  F(0, 2) = a * n[1] * n[2] * base;
  F(0, 3) = a * n[2] * n[2] * base;
  F(1, 2) = b * (n[0] - n[1]) * n[2] * base;
  F(1, 3) = (f * k - h + (f - k * h) * n[0] - b * n[0] * n[0]) * n[2] * n[2] * base;
  F(2, 3) = (f - k * h - b * n[0]) * n[1] * base;
  return F - CMat4(F.transpose());
}

// At R0 = 0: k = 0, L = 1, F = c0 |R| and j = j0 constant, so j kappa = C |R|^gamma
// with C = j0 (c0^2/2)^{gamma/2}.
inline double axis_amplitude(const DeformationParameter& c) {
  const double c0 = std::pow(-c.g_minus, 0.5 * c.G_plus) * std::pow(c.g_plus, -0.5 * c.G_minus);
  const double j0 = std::pow(-c.g_minus / c.g_plus, -0.25 * c.G);
  return j0 * std::pow(0.5 * c0 * c0, 0.5 * c.gamma);
}

// Components on the hyperplane R0 = 0 with amplitudes C (potential) and C2
// (phase Phi_0 = k0 C2 |R|^gamma (-(G/2)|R| - R^1)). F uses the rho table
// rescaled to the same amplitude.
inline PlaneWaveComponents em_plane_wave_axis(const DeformationParameter& c, const Vec4& R, double k0 = 1.0,
                                              double b3 = 1.0, double C = NAN, double C2 = NAN) {
  if (R[0] != 0) throw RegionMismatch("axis formulas need R0 = 0");
  require_regular(c, R);
  if (std::isnan(C)) C = axis_amplitude(c);
  if (std::isnan(C2)) C2 = axis_amplitude(c);
  const double r = spatial_norm(R), pw = std::pow(r, c.gamma);
  const double j0 = std::pow(-c.g_minus / c.g_plus, -0.25 * c.G);
  const Eigen::Vector3d n = R.tail<3>() / r;
  const double phase = k0 * C2 * pw * (-0.5 * c.G * r - R[1]);
  PlaneWaveComponents w = detail::plane_wave_from(c, n, 0.0, 1.0, C * pw, C * pw / (j0 * j0), phase, b3);
  const double jk = aux_forms(c, R).j * conformal_factor(c, R);
  const Mat4 P = rho_table(c, R, Region::spacelike) * (C * pw / jk);
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      w.F(p, q) = kI * k0 * ((P(q, 0) - P(q, 1)) * w.lower[p] - (P(p, 0) - P(p, 1)) * w.lower[q]);
  return w;
}

// ---------------------------------------------------------------- spinor field

// Z_p = -(1/8) R^PQ_p (gamma_P gamma_Q - gamma_Q gamma_P)
inline std::array<CMat4, 4> spin_connection(const DeformationParameter& c, const GammaAlgebra& G, const Vec4& R) {
  std::array<CMat4, 4> Z;
  for (auto& z : Z) z.setZero();
  if (c.g == 0) return Z;
  const Tensor3 Rr = ricci_rotation(c, R, GuardBand{0});
  for (int P = 0; P < 4; ++P)
    for (int Q = 0; Q < 4; ++Q) {
      if (P == Q) continue;
      const CMat4 comm = G.low(P) * G.low(Q) - G.low(Q) * G.low(P);
      for (int p = 0; p < 4; ++p) Z[p] += -0.125 * Rr(P, Q, p) * comm;
    }
  return Z;
}

// gamma^p = g^pq e_q^P gamma_P
inline std::array<CMat4, 4> curved_gammas(const DeformationParameter& c, const GammaAlgebra& G, const Vec4& R) {
  const Mat4 gi = inverse_metric_closed(c, R, GuardBand{0});
  const Mat4 up = gi * invariant_frame(c, R, GuardBand{0}).e;  // (p, P)
  std::array<CMat4, 4> out;
  for (int p = 0; p < 4; ++p) {
    out[p].setZero();
    for (int P = 0; P < 4; ++P) out[p] += up(p, P) * G.low(P);
  }
  return out;
}

// Standard: -i gamma^p D_p psi + m psi. Conformal: i gamma^p D_p psi - kappa m psi.
inline Residual4 dirac_residual(const DeformationParameter& c, const SpinorField& f, const Vec4& R,
                                DiracFlavor flavor = DiracFlavor::conformal, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const auto gu = curved_gammas(c, f.gamma, R);
  const auto Z = spin_connection(c, f.gamma, R);
  const CVec4 psi = f.eval(R);
  const double sign = flavor == DiracFlavor::standard ? -1.0 : 1.0;
  const double mass = flavor == DiracFlavor::standard ? f.m : conformal_factor(c, R) * f.m;
  Residual4 out;
  for (int p = 0; p < 4; ++p) {
    const CVec4 d = fd::partial(f.eval, R, p, fd::kFirstStep * L);
    const CVec4 a = sign * kI * (gu[p] * d), b = -sign * kI * (gu[p] * (Z[p] * psi));
    out.value += a + b;
    out.scale += a.norm() + b.norm();
  }
  const CVec4 t = -sign * mass * psi;
  out.value += t;
  out.scale += t.norm();
  return out;
}

// kappa^alpha u e^{i k_n rho^n}; alpha = 3/2 solves the conformal equation.
inline SpinorFn conformal_spinor_wave(const DeformationParameter& c, const Vec4& k, const CVec4& u,
                                      double alpha = 1.5) {
  return [=](const Vec4& R) {
    return CVec4(std::pow(conformal_factor(c, R), alpha) * std::exp(kI * k.dot(rho(c, R, GuardBand{0}))) * u);
  };
}

// u e^{i k_n sigma^n}: the first-order spinor family.
inline SpinorFn sigma_spinor_mode(const DeformationParameter& c, const Vec4& k, const CVec4& u) {
  return [=](const Vec4& R) { return CVec4(std::exp(kI * k.dot(sigma(c, R, GuardBand{0}))) * u); };
}

inline void require_shell(const Vec4& k, double m, bool need_positive_energy = true) {
  const double tol = 1e-14 * std::max({1.0, k[0] * k[0], m * m});
  if (std::abs(minkowski_square(k) - m * m) > tol) throw ShellError("wave vector is off the mass shell");
  if (need_positive_energy && !(k[0] > 0)) throw ShellError("wave vector needs k_0 > 0");
}

// Orthonormal basis of the null space of gamma^P k_P + m (two columns).
inline Eigen::Matrix<cplx, 4, 2> spinor_amplitude_solve(const Vec4& k, double m, const GammaAlgebra& G) {
  if (!(m > 0)) throw ShellError("massless spinor amplitudes are excluded");
  require_shell(k, m);
  const CMat4 M = G.slash(k) + m * CMat4::Identity();
  Eigen::JacobiSVD<CMat4> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[2] > 1e-10 * sv[0] || sv[1] < 1e-6 * sv[0]) throw ShellError("shell matrix does not have rank 2");
  return svd.matrixV().rightCols<2>();
}

inline int numerical_rank(const CMat4& M, double rel = 1e-10) {
  Eigen::JacobiSVD<CMat4> svd(M);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < 4; ++i) r += sv[i] > rel * sv[0];
  return r;
}

// J^p = J psibar gamma^p psi with psibar = psi^+ gamma^0 (flat gamma^0).
inline CVec4 spinor_current(const DeformationParameter& c, const SpinorField& f, const Vec4& R) {
  const auto gu = curved_gammas(c, f.gamma, R);
  const CVec4 psi = f.eval(R);
  const Eigen::RowVector4cd bar = psi.adjoint() * f.gamma.up[0];
  CVec4 J;
  for (int p = 0; p < 4; ++p) J[p] = (bar * gu[p] * psi)(0, 0);
  return jacobian_density(c, R) * J;
}

inline Residual spinor_current_conservation(const DeformationParameter& c, const SpinorField& f, const Vec4& R,
                                            const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  Residual out;
  for (int p = 0; p < 4; ++p) {
    const cplx t = fd::partial([&](const Vec4& X) { return spinor_current(c, f, X); }, R, p, fd::kFirstStep * L)[p];
    out.value += t;
    out.scale += std::abs(t);
  }
  out.scale += spinor_current(c, f, R).norm() / L;
  return out;
}

// ------------------------------------------------------------ momentum operator

// P_n phi = -i kappa eta_n^q d_q(phi / kappa); the outer kappa makes single
// conformal waves eigenfunctions with eigenvalue k_n. Spinors use kappa^{3/2}.
inline CVec4 scalar_momentum(const DeformationParameter& c, const ScalarFn& phi, const Vec4& R, double weight = 1.0,
                             const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const Mat4 eta = eta_jacobian_at(c, R);
  auto reduced = [&](const Vec4& X) { return phi(X) / std::pow(conformal_factor(c, X), weight); };
  CVec4 d;
  for (int q = 0; q < 4; ++q) d[q] = fd::partial(reduced, R, q, fd::kFirstStep * L);
  return -kI * std::pow(conformal_factor(c, R), weight) * eta.cast<cplx>() * d;
}

// Column n holds P_n psi.
inline CMat4 spinor_momentum(const DeformationParameter& c, const SpinorFn& psi, const Vec4& R,
                             const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const Mat4 eta = eta_jacobian_at(c, R);
  auto reduced = [&](const Vec4& X) { return CVec4(psi(X) / std::pow(conformal_factor(c, X), 1.5)); };
  CMat4 d;  // column q = d_q
  for (int q = 0; q < 4; ++q) d.col(q) = fd::partial(reduced, R, q, fd::kFirstStep * L);
  return -kI * std::pow(conformal_factor(c, R), 1.5) * d * eta.transpose().cast<cplx>();
}

// M(n, p) = P_n A_p = -i eta_n^q (d_q A_p - eta_m^s (d_q rho_p^m) A_s)
inline CMat4 em_momentum(const DeformationParameter& c, const CovectorFn& A, const Vec4& R, const Stencil& s = {}) {
  const double L = stencil_length(c, R, s);
  const Mat4 eta = eta_jacobian_at(c, R);
  const CVec4 a = A(R);
  const CVec4 flat = eta.cast<cplx>() * a;  // eta_m^s A_s
  const CMat4 dA = covector_jacobian(A, R, L);
  CMat4 inner;  // (p, q)
  for (int q = 0; q < 4; ++q) {
    const Mat4 dP = fd::partial([&](const Vec4& X) { return rho_jacobian(c, X, GuardBand{0}); }, R, q,
                                fd::kFirstStep * L);
    inner.col(q) = dA.col(q) - dP.cast<cplx>() * flat;
  }
  return -kI * eta.cast<cplx>() * inner.transpose();
}

// max_n |P_n X - k_n X| / (|k| |X|) for the three actions.
inline double scalar_eigen_residual(const DeformationParameter& c, const ScalarFn& phi, const Vec4& k,
                                    const Vec4& R, double weight = 1.0) {
  const CVec4 P = scalar_momentum(c, phi, R, weight);
  const cplx v = phi(R);
  return (P - k.cast<cplx>() * v).cwiseAbs().maxCoeff() / (k.norm() * std::abs(v));
}

inline double spinor_eigen_residual(const DeformationParameter& c, const SpinorFn& psi, const Vec4& k,
                                    const Vec4& R) {
  const CMat4 P = spinor_momentum(c, psi, R);
  const CVec4 v = psi(R);
  double m = 0;
  for (int n = 0; n < 4; ++n) m = std::max(m, (P.col(n) - k[n] * v).norm());
  return m / (k.norm() * v.norm());
}

inline double em_eigen_residual(const DeformationParameter& c, const CovectorFn& A, const Vec4& k, const Vec4& R) {
  const CMat4 M = em_momentum(c, A, R);
  const CVec4 a = A(R);
  return (M - k.cast<cplx>() * a.transpose()).cwiseAbs().maxCoeff() / (k.norm() * a.norm());
}

// ----------------------------------------------------------- mode superposition

// One wave of a finite spectrum. k is covariant with k_0 > 0 on the shell;
// sign = +1 contributes amplitude e^{+i Phi}, sign = -1 amplitude e^{-i Phi}.
// The amplitude carries the quadrature weight and the measure d^3k / sqrt(2 k0).
struct WaveSpec {
  Vec4 k = Vec4::Zero();
  cplx amplitude{1.0};
  int sign = 1;
};

inline Vec4 on_shell(const Eigen::Vector3d& kspace, double m) {
  Vec4 k;
  k << std::sqrt(kspace.squaredNorm() + m * m), kspace;
  return k;
}

// Adds the conjugate partner of every entry, making the superposition real.
inline std::vector<WaveSpec> with_conjugates(const std::vector<WaveSpec>& s) {
  std::vector<WaveSpec> out = s;
  for (const auto& w : s) out.push_back({w.k, std::conj(w.amplitude), -w.sign});
  return out;
}

// Gauss-Legendre nodes on momenta k = s n, s in [-kmax, kmax], weighted by
// profile(s) / ((2 pi)^{3/2} sqrt(2 k0)).
template <unsigned N, class Profile>
std::vector<WaveSpec> gauss_spectrum(double m, const Eigen::Vector3d& direction, double kmax, Profile profile) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const Eigen::Vector3d n = direction.normalized();
  const double norm = std::pow(2 * std::numbers::pi, -1.5);
  std::vector<WaveSpec> out;
  auto add = [&](double s, double wt) {
    const Vec4 k = on_shell(s * n, m);
    out.push_back({k, wt * kmax * norm * cplx(profile(s)) / std::sqrt(2 * k[0]), 1});
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) {
      add(0, w[i]);
    } else {
      add(kmax * x[i], w[i]);
      add(-kmax * x[i], w[i]);
    }
  }
  return out;
}

enum class ScalarModeFamily { conformal, sigma };

// Single mode of a family: kappa e^{+-i k rho} or e^{+-i k sigma}.
inline cplx scalar_mode(const DeformationParameter& c, const WaveSpec& w, const Vec4& R, ScalarModeFamily family) {
  if (family == ScalarModeFamily::conformal)
    return w.amplitude * conformal_factor(c, R) * std::exp(double(w.sign) * kI * w.k.dot(rho(c, R, GuardBand{0})));
  return w.amplitude * std::exp(double(w.sign) * kI * w.k.dot(sigma(c, R, GuardBand{0})));
}

inline cplx mode_decomposition_sample(const DeformationParameter& c, const std::vector<WaveSpec>& spectrum,
                                      const Vec4& R, ScalarModeFamily family = ScalarModeFamily::conformal) {
  if (spectrum.empty()) throw DomainError("empty spectrum");
  cplx sum = 0;
  for (const auto& w : spectrum) sum += scalar_mode(c, w, R, family);
  return sum;
}

inline ScalarFn superposition(const DeformationParameter& c, std::vector<WaveSpec> spectrum,
                              ScalarModeFamily family = ScalarModeFamily::conformal) {
  if (spectrum.empty()) throw DomainError("empty spectrum");
  return [=, s = std::move(spectrum)](const Vec4& R) { return mode_decomposition_sample(c, s, R, family); };
}

}  // namespace finsleroid
