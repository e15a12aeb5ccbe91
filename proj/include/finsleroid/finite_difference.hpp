#pragma once

// Central finite differences on functions of a 4-vector, with Richardson
// extrapolation over halved steps. Works for any value type closed under
// addition and scaling (double, complex, Eigen vectors and matrices).

#include "finsleroid/types.hpp"

#include <array>
#include <type_traits>

namespace finsleroid::fd {

// Relative steps (multiplied by a local regularity scale) tuned for the
// roundoff/truncation balance of each derivative order after two levels
// of Richardson extrapolation.
inline constexpr double kFirstStep = 1e-3;
inline constexpr double kSecondStep = 4e-3;
inline constexpr double kThirdStep = 1.2e-2;

template <class F>
using value_t = std::decay_t<std::invoke_result_t<const F&, const Vec4&>>;

namespace detail {

template <class F>
value_t<F> nested(const F& f, const Vec4& x, const int* dirs, int n, double h) {
  using T = value_t<F>;
  if (n == 0) return f(x);
  Vec4 a = x, b = x;
  a[dirs[0]] += h;
  b[dirs[0]] -= h;
  T d = nested(f, a, dirs + 1, n - 1, h);
  T e = nested(f, b, dirs + 1, n - 1, h);
  return T((d - e) / (2.0 * h));
}

template <class T>
T richardson(const std::array<T, 3>& D, int levels, int order = 2) {
  const double q = std::pow(2.0, order);
  if (levels <= 1) return D[0];
  T r1 = T((q * D[1] - D[0]) / (q - 1.0));
  if (levels == 2) return r1;
  T r2 = T((q * D[2] - D[1]) / (q - 1.0));
  const double q2 = q * q;
  return T((q2 * r2 - r1) / (q2 - 1.0));
}

}  // namespace detail

// Mixed partial derivative along the listed coordinate directions.
template <class F, std::size_t N>
value_t<F> partial(const F& f, const Vec4& x, const std::array<int, N>& dirs, double h, int levels = 2) {
  using T = value_t<F>;
  std::array<T, 3> D{};
  for (int l = 0; l < levels && l < 3; ++l)
    D[l] = detail::nested(f, x, dirs.data(), static_cast<int>(N), h / std::pow(2.0, l));
  return detail::richardson(D, levels);
}

template <class F>
value_t<F> partial(const F& f, const Vec4& x, int k, double h, int levels = 2) {
  return partial(f, x, std::array<int, 1>{k}, h, levels);
}

template <class F>
std::array<value_t<F>, 4> gradient(const F& f, const Vec4& x, double h, int levels = 2) {
  std::array<value_t<F>, 4> g;
  for (int k = 0; k < 4; ++k) g[k] = partial(f, x, k, h, levels);
  return g;
}

// J(p, i) = d f_i / d x^p for vector-valued f.
template <class F>
Mat4 jacobian(const F& f, const Vec4& x, double h, int levels = 2) {
  Mat4 J;
  for (int p = 0; p < 4; ++p) J.row(p) = Vec4(partial(f, x, p, h, levels)).transpose();
  return J;
}

template <class F>
Mat4 hessian(const F& f, const Vec4& x, double h, int levels = 2) {
  Mat4 H;
  for (int p = 0; p < 4; ++p)
    for (int q = p; q < 4; ++q) H(p, q) = H(q, p) = partial(f, x, std::array<int, 2>{p, q}, h, levels);
  return H;
}

// Derivative of a function of one real variable.
template <class F>
auto derivative1d(const F& f, double x, double h, int levels = 3) {
  using T = std::decay_t<std::invoke_result_t<const F&, double>>;
  std::array<T, 3> D{};
  for (int l = 0; l < levels && l < 3; ++l) {
    const double s = h / std::pow(2.0, l);
    D[l] = T((f(x + s) - f(x - s)) / (2.0 * s));
  }
  return detail::richardson(D, levels);
}

template <class F>
auto second_derivative1d(const F& f, double x, double h, int levels = 3) {
  using T = std::decay_t<std::invoke_result_t<const F&, double>>;
  std::array<T, 3> D{};
  for (int l = 0; l < levels && l < 3; ++l) {
    const double s = h / std::pow(2.0, l);
    D[l] = T((f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s));
  }
  return detail::richardson(D, levels);
}

}  // namespace finsleroid::fd
