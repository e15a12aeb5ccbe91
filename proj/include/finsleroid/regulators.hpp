#pragma once

// Momentum-space regulator weights: the power-exponential weight W, the
// on-shell weight W1 built on the Finslerian dispersion relation, Macdonald
// functions from their integral representation and the limiting envelopes.

#include "finsleroid/constants.hpp"
#include "finsleroid/errors.hpp"
#include "finsleroid/metric_function.hpp"
#include "finsleroid/types.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>

namespace finsleroid {

struct RegulatorConfig {
  double g = 1;
  double nu = 2;
  double C = 1;
  double C2 = 1;
  double C4 = 1;
  double m = 1;

  double alpha() const { return C * g * g; }

  void validate() const {
    if (!(std::isfinite(g) && std::isfinite(nu) && std::isfinite(C) && std::isfinite(C4) && std::isfinite(m)))
      throw ConfigError("regulator constants must be finite");
    if (!(alpha() > 0)) throw ConfigError("alpha = C g^2 must be positive");
    if (!(nu > 0)) throw ConfigError("exponent nu must be positive");
    if (!(C2 > 0 && C4 > 0)) throw ConfigError("energy constants must be positive");
    if (!(m > 0)) throw ConfigError("mass must be positive");
  }
};

namespace detail {

// Integral over [0, inf) to near machine precision; throws on a non-finite or unsettled result.
inline double half_line(const std::function<double(double)>& f, double tol = 1e-14) {
  static thread_local boost::math::quadrature::exp_sinh<double> q;
  double err = 0, L1 = 0;
  double v;
  try {
    v = q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), tol, &err, &L1);
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("quadrature failed: ") + e.what());
  }
  if (!std::isfinite(v) || !std::isfinite(L1) || err > 1e-6 * std::max(L1, 1e-300))
    throw ConvergenceError("quadrature did not settle");
  return v;
}

}  // namespace detail

// C1 = 1 / int_0^inf exp(-alpha P^nu) P^3 dP, by quadrature.
inline double normalize_C1(const RegulatorConfig& cfg) {
  cfg.validate();
  const double a = cfg.alpha(), nu = cfg.nu;
  return 1.0 / detail::half_line([&](double P) { return std::exp(-a * std::pow(P, nu)) * P * P * P; });
}

inline double normalize_C1_closed(const RegulatorConfig& cfg) {
  cfg.validate();
  return cfg.nu * std::pow(cfg.alpha(), 4.0 / cfg.nu) / std::tgamma(4.0 / cfg.nu);
}

inline double weight_W(const RegulatorConfig& cfg, double P) {
  if (!(P >= 0)) throw DomainError("momentum magnitude must be non-negative");
  return normalize_C1_closed(cfg) * std::exp(-cfg.alpha() * std::pow(P, cfg.nu));
}

// int_0^inf Z(P) W(P) P^3 dP.
inline double weighted_momentum_integral(const RegulatorConfig& cfg, const std::function<double(double)>& Z) {
  const double C1 = normalize_C1_closed(cfg);
  const double a = cfg.alpha(), nu = cfg.nu;
  return C1 * detail::half_line([&](double P) {
           const double w = std::exp(-a * std::pow(P, nu));
           return w == 0 ? 0.0 : Z(P) * w * P * P * P;
         }, 1e-13);
}

// Closed form of the weighted moment of P^z.
inline double weighted_moment_closed(const RegulatorConfig& cfg, double z) {
  const double C1 = normalize_C1_closed(cfg);
  const double s = (z + 4) / cfg.nu;
  return C1 * std::tgamma(s) / (cfg.nu * std::pow(cfg.alpha(), s));
}

struct MacdonaldPair {
  double K0;
  double K1;
};

// K0(z) = int e^{-z cosh u} du,  K1(z) = z int e^{-z cosh u} sinh^2 u du.
inline MacdonaldPair macdonald(double z) {
  if (!(z > 0) || !std::isfinite(z)) throw DomainError("Macdonald argument must be positive");
  const double K0 = detail::half_line([z](double u) { return std::exp(-z * std::cosh(u)); });
  const double K1 = z * detail::half_line([z](double u) {
                      const double e = std::exp(-z * std::cosh(u));
                      if (e == 0) return 0.0;
                      const double s = std::sinh(u);
                      return e * s * s;
                    });
  return {K0, K1};
}

// Right-hand side of the derivative recurrence dK1/dz = -K1/z - K0.
inline double macdonald_K1_derivative(double z) {
  const auto k = macdonald(z);
  return -k.K1 / z - k.K0;
}

// On-shell energy K0 with H(g; K0, p) = 1 in the future co-cone, p = |P|/m.
inline double dispersion_energy(const DeformationParameter& c, double p) {
  if (!(p >= 0) || !std::isfinite(p)) throw DomainError("momentum ratio must be finite and non-negative");
  auto H = [&](double P0) { return fhf(c, Vec4(P0, p, 0, 0)); };
  double lo = std::max(0.0, p / c.g_sup_plus);
  double hi = lo + 1.0 + p;
  int grow = 0;
  while (!(H(hi) > 1)) {
    hi = lo + 2 * (hi - lo);
    if (++grow > 200) throw ConvergenceError("dispersion relation: no bracket");
  }
  auto f = [&](double P0) { return P0 <= lo ? -1.0 : H(P0) - 1.0; };
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(30), iters);
  double x = 0.5 * (a + b);
  for (int i = 0; i < 50; ++i) {
    const auto [u, v] = co_cone_factors(c, Vec4(x, p, 0, 0));
    const double lnH = std::log(H(x));
    if (lnH == 0) return x;
    (lnH < 0 ? a : b) = x;
    const double dlnH = 0.5 * c.G_sup_plus / u - 0.5 * c.G_sup_minus / v;
    double next = x - lnH / dlnH;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const double step = next - x;
    x = next;
    if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * x) return x;
  }
  if (b - a <= 1e-12 * x) return x;
  throw ConvergenceError("dispersion relation: Newton did not settle");
}

enum class EnergyForm { exact, simplified };

inline double normalized_energy(const RegulatorConfig& cfg, double P, EnergyForm form) {
  const double p = P / cfg.m;
  if (form == EnergyForm::simplified) return std::sqrt(1 + p * p);
  return dispersion_energy(derive_constants(cfg.g), p);
}

// C3 with 4 pi int W1 P^2 dP = 1.
inline double normalize_C3(const RegulatorConfig& cfg, EnergyForm form = EnergyForm::exact) {
  cfg.validate();
  const double b = cfg.C4 * cfg.g * cfg.g;
  const double I = detail::half_line(
      [&](double P) {
        const double e = std::exp(-b * normalized_energy(cfg, P, form));
        return e == 0 ? 0.0 : e * P * P;
      },
      1e-13);
  return 1.0 / (4 * std::numbers::pi * I);
}

// 1/(4 pi C3) for the simplified weight through Macdonald functions of beta = C4 g^2.
inline double simplified_normalization_bessel(const RegulatorConfig& cfg) {
  cfg.validate();
  const double b = cfg.C4 * cfg.g * cfg.g;
  const auto k = macdonald(b);
  return std::pow(cfg.m, 3) * (2 * k.K1 / (b * b) + k.K0 / b);
}

// The same quantity as printed: 2(8/g^2)^2 K1(g^2/8) + (8/g^2) K0(g^2/8).
inline double printed_normalization(double g) {
  const double b = g * g / 8;
  const auto k = macdonald(b);
  return 2 * k.K1 / (b * b) + k.K0 / b;
}

inline double weight_W1(const RegulatorConfig& cfg, double P, EnergyForm form = EnergyForm::exact) {
  if (!(P >= 0)) throw DomainError("momentum magnitude must be non-negative");
  const double C3 = normalize_C3(cfg, form);
  return C3 * std::exp(-cfg.C4 * cfg.g * cfg.g * normalized_energy(cfg, P, form));
}

// Unnormalized shapes exp(-C4 g^2 K0), the Maxwell envelope and the ultrarelativistic envelope.
inline double weight_W1_shape(const RegulatorConfig& cfg, double P, EnergyForm form = EnergyForm::exact) {
  return std::exp(-cfg.C4 * cfg.g * cfg.g * normalized_energy(cfg, P, form));
}

inline double maxwell_envelope(const RegulatorConfig& cfg, double P) {
  const double p = P / cfg.m;
  return std::exp(-0.5 * cfg.C4 * cfg.g * cfg.g * p * p);
}

inline double ultrarelativistic_envelope(const RegulatorConfig& cfg, double P) {
  return std::exp(-cfg.C4 * cfg.g * cfg.g * P / cfg.m);
}

// Large-momentum envelope of the exact weight: the on-shell energy approaches the co-cone P0 = |P|/g^+.
inline double cone_envelope(const RegulatorConfig& cfg, double P) {
  const auto c = derive_constants(cfg.g);
  return std::exp(-cfg.C4 * cfg.g * cfg.g * P / (cfg.m * c.g_sup_plus));
}

// Left side by separable one-dimensional quadratures, right side in closed form.
inline std::pair<double, double> gaussian_fourier_check(const RegulatorConfig& cfg, const Vec4& r) {
  cfg.validate();
  const double a = cfg.g * cfg.g / (cfg.m * cfg.m);
  const double h2 = 1 + 0.25 * cfg.g * cfg.g;
  double lhs = 1.0 / (std::pow(2 * std::numbers::pi, 4) * h2);
  for (int n = 0; n < 4; ++n) {
    const double rn = r[n];
    lhs *= 2 * detail::half_line([&](double k) { return std::cos(k * rn) * std::exp(-a * k * k); });
  }
  const double r2 = r.squaredNorm();
  const double m4 = std::pow(cfg.m, 4);
  const double rhs = m4 / (16 * std::numbers::pi * std::numbers::pi * h2 * std::pow(cfg.g, 4)) *
                     std::exp(-r2 * cfg.m * cfg.m / (4 * cfg.g * cfg.g));
  return {lhs, rhs};
}

}  // namespace finsleroid
