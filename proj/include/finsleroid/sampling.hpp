#pragma once

// Reproducible random regular points. The generator is mt19937_64 and the
// uniform variate is built from its raw bits, so a seed gives the same points
// on every platform.

#include "finsleroid/metric_function.hpp"

#include <random>

namespace finsleroid {

class PointSampler {
 public:
  explicit PointSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  Eigen::Vector3d direction() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double s = std::sqrt(1.0 - z * z);
    return {s * std::cos(phi), s * std::sin(phi), z};
  }

  // A point of the requested sector with |R| in [0.5, 2] and R0/|R| kept a
  // fixed fraction away from both cone slopes.
  Vec4 point(const DeformationParameter& c, Sector s) {
    const double ku = -c.g_minus;  // future cone slope
    const double kv = -c.g_plus;   // past cone slope
    const double gap = ku - kv;
    double k = 0;
    switch (s) {
      case Sector::future_timelike: k = ku + gap * uniform(0.15, 1.5); break;
      case Sector::past_timelike: k = kv - gap * uniform(0.15, 1.5); break;
      case Sector::spacelike: k = kv + gap * uniform(0.15, 0.85); break;
      default: throw DomainError("isotropic sectors are not sampled");
    }
    const double q = uniform(0.5, 2.0);
    Vec4 R;
    R[0] = k * q;
    R.tail<3>() = q * direction();
    return R;
  }

  // Same, with the sector drawn at random.
  Vec4 point(const DeformationParameter& c) {
    const double u = uniform();
    return point(c, u < 0.4 ? Sector::future_timelike : u < 0.8 ? Sector::spacelike : Sector::past_timelike);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace finsleroid
