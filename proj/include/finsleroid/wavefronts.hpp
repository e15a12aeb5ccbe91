#pragma once

// Zero-phase surfaces of conformally flat plane waves. The axial wave vector
// k = (k0, -k0, 0, 0) has the closed form R^1(R^0, R_perp); other directions
// are solved by bisection along the propagation direction.

#include "finsleroid/constants.hpp"
#include "finsleroid/errors.hpp"
#include "finsleroid/types.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace finsleroid {

// (R0 - (g/2)|R|) k0 + h k_a R^a; vanishes exactly where the wave phase does.
inline double front_residual(const DeformationParameter& c, const Vec4& k, const Vec4& R) {
  return (R[0] - 0.5 * c.g * spatial_norm(R)) * k[0] + c.h * k.tail<3>().dot(R.tail<3>());
}

// R^1 on the axial front: h R0 - (g/2) sqrt(R0^2 + R_perp^2).
inline double front_point(const DeformationParameter& c, double R0, double R_perp) {
  if (!std::isfinite(R0) || !std::isfinite(R_perp) || R_perp < 0)
    throw DomainError("front_point needs finite R0 and R_perp >= 0");
  const double D = std::hypot(R0, R_perp);
  if (c.h * D - 0.5 * c.g * R0 < 0) throw BranchError("front branch sign condition violated");
  return c.h * R0 - 0.5 * c.g * D;
}

inline double vertex_velocity(const DeformationParameter& c) { return c.g_plus; }

// d^2 R^1 / d R_perp^2 at the vertex.
inline double vertex_curvature(const DeformationParameter& c, double R0) {
  if (R0 == 0) throw DomainError("the vertex is a conic point at R0 = 0");
  return -0.5 * c.g / std::abs(R0);
}

inline double asymptotic_cone(const DeformationParameter& c, double R_perp) {
  if (!(R_perp >= 0)) throw DomainError("R_perp must be non-negative");
  return -0.5 * c.g * R_perp;
}

// First-order front with h = 1.
inline double o1g_front(const DeformationParameter& c, double R0, double R_perp) {
  return R0 - 0.5 * c.g * std::hypot(R0, R_perp);
}

// Point on the front of an arbitrary wave vector: R = s n + offset with n the
// propagation direction -k_a/|k_a| and offset orthogonal to n.
inline Vec4 general_front_point(const DeformationParameter& c, const Vec4& k, double R0, const Eigen::Vector3d& offset) {
  const Eigen::Vector3d kv = k.tail<3>();
  const double kn = kv.norm();
  if (!(k[0] > 0) || kn == 0 || !(c.h * kn > 0.5 * std::abs(c.g) * k[0]))
    throw BranchError("front needs k0 > 0 and a dominant spatial wave vector");
  const Eigen::Vector3d n = -kv / kn;
  const Eigen::Vector3d rho = offset - offset.dot(n) * n;
  auto point = [&](double s) {
    Vec4 R;
    R << R0, s * n + rho;
    return R;
  };
  // Strictly increasing in s.
  auto f = [&](double s) { return -front_residual(c, k, point(s)); };
  double B = 1 + std::abs(R0) + rho.norm();
  for (int i = 0; f(-B) > 0 || f(B) < 0; ++i) {
    if (i > 200) throw ConvergenceError("front: no bracket");
    B *= 2;
  }
  std::uintmax_t iters = 400;
  auto [a, b] = boost::math::tools::bisect(f, -B, B, boost::math::tools::eps_tolerance<double>(52), iters);
  return point(0.5 * (a + b));
}

enum class FrontMotion { plane, vertex_trailing, vertex_leading };

inline std::string to_string(FrontMotion m) {
  switch (m) {
    case FrontMotion::plane: return "plane";
    case FrontMotion::vertex_trailing: return "vertex-trailing";
    case FrontMotion::vertex_leading: return "vertex-leading";
  }
  return "?";
}

// Fronts bulge backwards for g > 0 and point forward for g < 0.
inline FrontMotion front_motion(const DeformationParameter& c) {
  if (c.g == 0) return FrontMotion::plane;
  return c.g < 0 ? FrontMotion::vertex_leading : FrontMotion::vertex_trailing;
}

struct FrontGrid {
  double r_perp_max = 50;
  int n_perp = 51;
  int n_azimuth = 16;
  bool slice = false;  // the R^3 = 0 plane, R_perp signed
};

struct FrontSample {
  double g = 0;
  double R0 = 0;
  FrontMotion motion = FrontMotion::plane;
  double vertex = 0;
  std::vector<double> r_perp;
  std::vector<double> azimuth;
  std::vector<Eigen::Vector3d> points;  // (R^1, R^2, R^3), r_perp major, azimuth minor
};

inline FrontSample sample_front(const DeformationParameter& c, double R0, const FrontGrid& grid) {
  if (!(grid.r_perp_max > 0) || grid.n_perp < 2 || (!grid.slice && grid.n_azimuth < 1))
    throw DomainError("invalid front grid");
  FrontSample s;
  s.g = c.g;
  s.R0 = R0;
  s.motion = front_motion(c);
  s.vertex = front_point(c, R0, 0);
  if (grid.slice) {
    s.azimuth = {0.0};
    for (int i = 0; i < grid.n_perp; ++i) {
      const double y = -grid.r_perp_max + 2 * grid.r_perp_max * i / (grid.n_perp - 1);
      s.r_perp.push_back(y);
      s.points.emplace_back(front_point(c, R0, std::abs(y)), y, 0.0);
    }
    return s;
  }
  for (int a = 0; a < grid.n_azimuth; ++a) s.azimuth.push_back(2 * std::numbers::pi * a / grid.n_azimuth);
  for (int i = 0; i < grid.n_perp; ++i) {
    const double rp = grid.r_perp_max * i / (grid.n_perp - 1);
    s.r_perp.push_back(rp);
    const double x = front_point(c, R0, rp);
    for (double phi : s.azimuth) s.points.emplace_back(x, rp * std::cos(phi), rp * std::sin(phi));
  }
  return s;
}

inline std::vector<FrontSample> sample_front_family(const DeformationParameter& c, const std::vector<double>& R0s,
                                                    const FrontGrid& grid) {
  std::vector<FrontSample> out;
  out.reserve(R0s.size());
  for (double R0 : R0s) out.push_back(sample_front(c, R0, grid));
  return out;
}

}  // namespace finsleroid
