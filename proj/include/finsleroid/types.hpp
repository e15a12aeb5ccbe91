#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace finsleroid {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using cplx = std::complex<double>;
using CVec4 = Eigen::Vector4cd;
using CMat4 = Eigen::Matrix4cd;

inline constexpr cplx kI{0.0, 1.0};

// e_ij = e^ij = diag(1,-1,-1,-1)
inline const Mat4& minkowski() {
  static const Mat4 e = Vec4(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return e;
}

inline double minkowski_sign(int i) { return i == 0 ? 1.0 : -1.0; }

inline double spatial_norm(const Vec4& v) { return v.tail<3>().norm(); }

inline Vec4 lower(const Vec4& v) { return Vec4(v[0], -v[1], -v[2], -v[3]); }

inline double minkowski_square(const Vec4& v) { return v[0] * v[0] - v.tail<3>().squaredNorm(); }

// Totally general 4x4x4 array; index order follows the call order.
class Tensor3 {
 public:
  double& operator()(int p, int q, int r) { return a_[16 * p + 4 * q + r]; }
  double operator()(int p, int q, int r) const { return a_[16 * p + 4 * q + r]; }
  double max_abs() const {
    double m = 0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
  }
  friend Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
    Tensor3 c;
    for (int i = 0; i < 64; ++i) c.a_[i] = a.a_[i] + b.a_[i];
    return c;
  }
  friend Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
    Tensor3 c;
    for (int i = 0; i < 64; ++i) c.a_[i] = a.a_[i] - b.a_[i];
    return c;
  }
  friend Tensor3 operator/(const Tensor3& a, double s) { return (1.0 / s) * a; }
  friend Tensor3 operator*(double s, const Tensor3& a) {
    Tensor3 c;
    for (int i = 0; i < 64; ++i) c.a_[i] = s * a.a_[i];
    return c;
  }

 private:
  std::array<double, 64> a_{};
};

class Tensor4 {
 public:
  double& operator()(int p, int q, int r, int s) { return a_[64 * p + 16 * q + 4 * r + s]; }
  double operator()(int p, int q, int r, int s) const { return a_[64 * p + 16 * q + 4 * r + s]; }
  double max_abs() const {
    double m = 0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
  }
  friend Tensor4 operator+(const Tensor4& a, const Tensor4& b) {
    Tensor4 c;
    for (int i = 0; i < 256; ++i) c.a_[i] = a.a_[i] + b.a_[i];
    return c;
  }
  friend Tensor4 operator-(const Tensor4& a, const Tensor4& b) {
    Tensor4 c;
    for (int i = 0; i < 256; ++i) c.a_[i] = a.a_[i] - b.a_[i];
    return c;
  }
  friend Tensor4 operator*(double s, const Tensor4& a) {
    Tensor4 c;
    for (int i = 0; i < 256; ++i) c.a_[i] = s * a.a_[i];
    return c;
  }
  friend Tensor4 operator/(const Tensor4& a, double s) { return (1.0 / s) * a; }

 private:
  std::array<double, 256> a_{};
};

}  // namespace finsleroid
