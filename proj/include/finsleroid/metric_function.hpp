#pragma once

// The Finsleroid metric function F, the Hamiltonian function H on momenta,
// their auxiliary forms, sector classification and the guard band around the
// singular loci.

#include "finsleroid/constants.hpp"
#include "finsleroid/errors.hpp"
#include "finsleroid/types.hpp"

#include <string>

namespace finsleroid {

enum class Sector { future_timelike, future_isotropic, spacelike, past_isotropic, past_timelike };

inline std::string to_string(Sector s) {
  switch (s) {
    case Sector::future_timelike: return "future-timelike";
    case Sector::future_isotropic: return "future-isotropic";
    case Sector::spacelike: return "spacelike";
    case Sector::past_isotropic: return "past-isotropic";
    case Sector::past_timelike: return "past-timelike";
  }
  return "?";
}

inline bool is_timelike(Sector s) { return s == Sector::future_timelike || s == Sector::past_timelike; }

// The two cone factors R0 + g_-|R| (future cone) and R0 + g_+|R| (past cone).
struct ConeFactors {
  double future;
  double past;
};

inline ConeFactors cone_factors(const DeformationParameter& c, const Vec4& R) {
  const double r = spatial_norm(R);
  return {R[0] + c.g_minus * r, R[0] + c.g_plus * r};
}

inline Sector classify(const DeformationParameter& c, const Vec4& R) {
  if (!R.allFinite()) throw DomainError("non-finite point");
  const auto [u, v] = cone_factors(c, R);
  if (u == 0 && v == 0) throw DomainError("the origin has no sector");
  if (u > 0) return Sector::future_timelike;
  if (u == 0) return Sector::future_isotropic;
  if (v > 0) return Sector::spacelike;
  if (v == 0) return Sector::past_isotropic;
  return Sector::past_timelike;
}

// Co-space factors P0 - |P|/g^+ and P0 - |P|/g^-.
inline ConeFactors co_cone_factors(const DeformationParameter& c, const Vec4& P) {
  const double p = spatial_norm(P);
  return {P[0] - p / c.g_sup_plus, P[0] - p / c.g_sup_minus};
}

inline Sector classify_covector(const DeformationParameter& c, const Vec4& P) {
  if (!P.allFinite()) throw DomainError("non-finite covector");
  const auto [u, v] = co_cone_factors(c, P);
  if (u == 0 && v == 0) throw DomainError("the zero covector has no sector");
  if (u > 0) return Sector::future_timelike;
  if (u == 0) return Sector::future_isotropic;
  if (v > 0) return Sector::spacelike;
  if (v == 0) return Sector::past_isotropic;
  return Sector::past_timelike;
}

struct AuxForms {
  double B;  // -(R0 + g_-|R|)(R0 + g_+|R|)
  double j;
  double A;  // R0 - g|R|/2
  double L;  // |R| - g R0/2
};

inline AuxForms aux_forms(const DeformationParameter& c, const Vec4& R) {
  const double r = spatial_norm(R);
  const auto [u, v] = cone_factors(c, R);
  AuxForms a;
  a.B = -u * v;
  a.j = std::exp(-0.25 * c.G * (std::log(std::abs(u)) - std::log(std::abs(v))));
  a.A = R[0] - 0.5 * c.g * r;
  a.L = r - 0.5 * c.g * R[0];
  return a;
}

inline AuxForms co_aux_forms(const DeformationParameter& c, const Vec4& P) {
  const double p = spatial_norm(P);
  const auto [u, v] = co_cone_factors(c, P);
  AuxForms a;
  a.B = -u * v;
  a.j = std::exp(0.25 * c.G * (std::log(std::abs(u)) - std::log(std::abs(v))));
  a.A = P[0] + 0.5 * c.g * p;
  a.L = p + 0.5 * c.g * P[0];
  return a;
}

inline double fmf(const DeformationParameter& c, const Vec4& R) {
  if (!R.allFinite()) throw DomainError("non-finite point");
  const auto [u, v] = cone_factors(c, R);
  return std::pow(std::abs(u), 0.5 * c.G_plus) * std::pow(std::abs(v), -0.5 * c.G_minus);
}

inline double fhf(const DeformationParameter& c, const Vec4& P) {
  if (!P.allFinite()) throw DomainError("non-finite covector");
  const auto [u, v] = co_cone_factors(c, P);
  return std::pow(std::abs(u), 0.5 * c.G_sup_plus) * std::pow(std::abs(v), -0.5 * c.G_sup_minus);
}

// Psi = -B j^2: equals +F^2 in the timelike sectors and -F^2 in the spacelike
// one. Its Hessian is the metric tensor with signature (+---) everywhere.
inline double signed_square(const DeformationParameter& c, const Vec4& R) {
  const auto [u, v] = cone_factors(c, R);
  const double F = fmf(c, R);
  return (u * v > 0 ? 1.0 : -1.0) * F * F;
}

struct GuardBand {
  double cone = 1e-6;  // relative distance to either cone factor and to |R| = 0
};

// The time axis |R| = 0 only matters once derivatives are taken.
inline void require_regular(const DeformationParameter& c, const Vec4& R, const GuardBand& guard = {},
                            bool check_axis = true) {
  if (!R.allFinite()) throw DomainError("non-finite point");
  const double n = R.norm();
  const auto [u, v] = cone_factors(c, R);
  const double r = spatial_norm(R);
  if (n == 0) throw ConeProximityError("point at the origin");
  if (std::abs(u) <= guard.cone * n) throw ConeProximityError("point inside the guard band of the future cone");
  if (std::abs(v) <= guard.cone * n) throw ConeProximityError("point inside the guard band of the past cone");
  if (check_axis && r <= guard.cone * n)
    throw ConeProximityError("point inside the guard band of the time axis |R| = 0");
}

// Coordinate distance to the nearest singular locus (both cones, the time
// axis); finite-difference steps are taken as fractions of it.
inline double regularity_scale(const DeformationParameter& c, const Vec4& R) {
  const auto [u, v] = cone_factors(c, R);
  const double du = std::abs(u) / std::sqrt(1.0 + c.g_minus * c.g_minus);
  const double dv = std::abs(v) / std::sqrt(1.0 + c.g_plus * c.g_plus);
  return std::min({spatial_norm(R), du, dv, R.norm()});
}

// d ln j / dR^p.
inline Vec4 log_j_gradient(const DeformationParameter& c, const Vec4& R) {
  const double r = spatial_norm(R);
  const auto [u, v] = cone_factors(c, R);
  Vec4 out;
  out[0] = -0.25 * c.G * (1.0 / u - 1.0 / v);
  const double radial = -0.25 * c.G * (c.g_minus / u - c.g_plus / v);
  out.tail<3>() = radial * R.tail<3>() / r;
  return out;
}

// R_p = (1/2) dPsi/dR^p, the covariant position vector; F^2 l_p up to sign.
inline Vec4 covector(const DeformationParameter& c, const Vec4& R) {
  const double r = spatial_norm(R);
  const auto [u, v] = cone_factors(c, R);
  const double j = aux_forms(c, R).j;
  const double psi = u * v * j * j;
  Vec4 out = psi * log_j_gradient(c, R);
  out[0] += 0.5 * (u + v) * j * j;
  out.tail<3>() += 0.5 * (c.g_minus * v + c.g_plus * u) * j * j * R.tail<3>() / r;
  return out;
}

}  // namespace finsleroid
