#pragma once

// Expansions of the metric, Cartan tensor, j and the phase to first order in g,
// and least-squares order fits of exact-minus-approximate residuals.

#include "finsleroid/metric_tensor.hpp"

#include <string>
#include <vector>

namespace finsleroid {

// ln |(R0 - |R|)/(R0 + |R|)|, the absolute ratio covering the spacelike sector.
inline double log_ratio(const Vec4& R) {
  const double r = spatial_norm(R);
  const double a = R[0] - r, b = R[0] + r;
  if (a == 0 || b == 0) throw ConeProximityError("first-order expansions are singular on the light cone");
  if (r == 0) throw ConeProximityError("first-order expansions need |R| > 0");
  return std::log(std::abs(a / b));
}

namespace detail {

struct O1Parts {
  double r, R0, S2, l;
};

inline O1Parts o1_parts(const Vec4& R) {
  const double l = log_ratio(R);
  const double r = spatial_norm(R);
  return {r, R[0], R[0] * R[0] - r * r, l};
}

}  // namespace detail

inline Mat4 o1_metric(double g, const Vec4& R) {
  const auto [r, R0, S2, l] = detail::o1_parts(R);
  Mat4 m;
  m(0, 0) = 1 - g * r * R0 / S2 - 0.5 * g * l;
  for (int a = 1; a < 4; ++a) {
    m(0, a) = m(a, 0) = g * r * R[a] / S2;
    for (int b = 1; b < 4; ++b) m(a, b) = (a == b ? -1 + 0.5 * g * l : 0.0) - g * R[a] * R[b] * R0 / (r * S2);
  }
  return m;
}

inline Mat4 o1_inverse_metric(double g, const Vec4& R) {
  const auto [r, R0, S2, l] = detail::o1_parts(R);
  Mat4 m;
  m(0, 0) = 1 + g * r * R0 / S2 + 0.5 * g * l;
  for (int a = 1; a < 4; ++a) {
    m(0, a) = m(a, 0) = g * r * R[a] / S2;
    for (int b = 1; b < 4; ++b) m(a, b) = (a == b ? -1 - 0.5 * g * l : 0.0) + g * R[a] * R[b] * R0 / (r * S2);
  }
  return m;
}

inline double o1_j(double g, const Vec4& R) { return 1 - 0.25 * g * log_ratio(R); }

inline double o1_metric_determinant(double g, const Vec4& R) { return -1 + 2 * g * log_ratio(R); }

// S_pqr with C_pqr = g S_pqr + O(g^2).
inline Tensor3 cartan_leading(const Vec4& R) {
  const auto [r, R0, S2, l] = detail::o1_parts(R);
  (void)l;
  const double S4 = S2 * S2;
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  Tensor3 S;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int s = 0; s < 4; ++s) {
        int sp[3], n = 0;
        for (int i : {p, q, s})
          if (i != 0) sp[n++] = i;
        double v = 0;
        if (n == 0) {
          v = r * r * r / S4;
        } else if (n == 1) {
          v = -R0 * r * R[sp[0]] / S4;
        } else if (n == 2) {
          const int a = sp[0], b = sp[1];
          v = 0.5 * r / S2 * d(a, b) + 0.5 * R[a] * R[b] * (R0 * R0 + r * r) / (r * S4);
        } else {
          const int a = sp[0], b = sp[1], c = sp[2];
          v = -0.5 * R0 / (r * S2) * (d(a, b) * R[c] + d(a, c) * R[b] + d(b, c) * R[a]) +
              0.5 * R0 * R[a] * R[b] * R[c] * (R0 * R0 - 3 * r * r) / (r * r * r * S4);
        }
        S(p, q, s) = v;
      }
  return S;
}

// S_p^q_r = e^qs S_psr: the middle index alone flips sign when spatial.
inline Tensor3 cartan_leading_mixed(const Vec4& R) {
  const Tensor3 S = cartan_leading(R);
  Tensor3 out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) out(p, q, r) = minkowski_sign(q) * S(p, q, r);
  return out;
}

// The mixed components assembled from the printed sign table
// S_0^0_0 = S_000, S_0^a_0 = -S_0a0, S_a^0_0 = -S_a00, S_a^b_c = -S_abc,
// extended to the remaining index patterns by the symmetry of S.
inline Tensor3 cartan_leading_mixed_printed(const Vec4& R) {
  const Tensor3 S = cartan_leading(R);
  Tensor3 out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) {
        const int spatial = (p != 0) + (q != 0) + (r != 0);
        double sign = 1;
        if (spatial == 1) sign = -1;  // S_0^a_0, S_a^0_0 and S_0^0_a alike
        if (spatial == 2) sign = q != 0 ? -1 : 1;
        if (spatial == 3) sign = -1;
        out(p, q, r) = sign * S(p, q, r);
      }
  return out;
}

// S^pqr = e^ps e^qt e^rv S_ptv.
inline Tensor3 cartan_leading_upper(const Vec4& R) {
  const Tensor3 S = cartan_leading(R);
  Tensor3 out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r) out(p, q, r) = minkowski_sign(p) * minkowski_sign(q) * minkowski_sign(r) * S(p, q, r);
  return out;
}

// S_p with C_p = g S_p + O(g^2), in dimension N = 4.
inline Vec4 cartan_trace_leading(const Vec4& R) {
  const auto [r, R0, S2, l] = detail::o1_parts(R);
  (void)l;
  Vec4 s;
  s[0] = -2 * r / S2;
  s.tail<3>() = 2 * R0 * R.tail<3>() / (r * S2);
  return s;
}

inline Vec4 cartan_trace_leading_upper(const Vec4& R) { return lower(cartan_trace_leading(R)); }

// d_p C^p = -(N/2) g (N-2) R0 / (|R| (R0^2 - |R|^2)), N = 4.
inline double o1_cartan_divergence(double g, const Vec4& R) {
  const auto [r, R0, S2, l] = detail::o1_parts(R);
  (void)l;
  return -4 * g * R0 / (r * S2);
}

// d_p C^p with C^p = g^pq C_q from the closed forms, by central differences.
inline double cartan_divergence(const DeformationParameter& c, const Vec4& R) {
  require_regular(c, R);
  const double h = fd::kFirstStep * regularity_scale(c, R);
  double div = 0;
  for (int p = 0; p < 4; ++p)
    div += fd::partial(
        [&](const Vec4& X) {
          const Vec4 Cu = inverse_metric_closed(c, X, GuardBand{0}) * cartan_trace(c, X, GuardBand{0});
          return Cu[p];
        },
        R, p, h);
  return div;
}

// (1 - (g/4) ln|(R0-|R|)/(R0+|R|)|) k_p R^p - (g/2)|R| k_0
inline double o1_phase(double g, const Vec4& R, const Vec4& k) {
  return (1 - 0.25 * g * log_ratio(R)) * k.dot(R) - 0.5 * g * spatial_norm(R) * k[0];
}

// Deviations of the quasi-space objects from their flat values; all O(g^2).
struct QuasiDeviation {
  double metric_lower;  // max |n_ij - e_ij|
  double metric_upper;  // max |n^ij - e^ij|
  double connection;    // max |N_i^k_j|
  double curvature;     // max |R_i^m_jk| of N
  double rotation;      // max |R^PQ_i|
  double gamma;         // |h - 1|
};

inline QuasiDeviation o1_quasi_objects(const DeformationParameter& c, const Vec4& t) {
  const QuasiMetric q = quasi_metric(c, t);
  QuasiDeviation d;
  d.metric_lower = (q.lower - minkowski()).cwiseAbs().maxCoeff();
  d.metric_upper = (q.upper - minkowski()).cwiseAbs().maxCoeff();
  d.connection = christoffel_N(c, t).max_abs();
  d.curvature = quasi_curvature(c, t).max_abs();
  d.rotation = quasi_ricci(c, t).max_abs();
  d.gamma = std::abs(c.gamma);
  return d;
}

inline const std::vector<double>& default_g_grid() {
  static const std::vector<double> grid{0.2, 0.1, 0.05, 0.025};
  return grid;
}

struct SlopeFit {
  double slope = 0;
  double r_squared = 0;
};

// Least squares of log(residual) against log(g).
inline SlopeFit fit_log_log(const std::vector<double>& g, const std::vector<double>& res) {
  if (g.size() != res.size() || g.size() < 2) throw DomainError("slope fit needs at least two matched samples");
  const double n = static_cast<double>(g.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(res[i] > 0) || !std::isfinite(res[i])) return {NAN, 0};
    const double x = std::log(std::abs(g[i])), y = std::log(res[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  SlopeFit f;
  f.slope = cxy / vx;
  f.r_squared = vy == 0 ? 1.0 : cxy * cxy / (vx * vy);
  return f;
}

struct ExpansionReport {
  std::string quantity;
  Vec4 point = Vec4::Zero();
  std::vector<double> g;
  std::vector<double> residual;
  SlopeFit fit;
  double window_lo = 1.8, window_hi = 2.2;
  bool pass = false;
};

template <class F>
ExpansionReport expansion_report(std::string quantity, const Vec4& R, F&& residual_at,
                                 const std::vector<double>& grid = default_g_grid(), double expected = 2.0) {
  ExpansionReport rep;
  rep.quantity = std::move(quantity);
  rep.point = R;
  rep.g = grid;
  rep.window_lo = expected - 0.2;
  rep.window_hi = expected + 0.2;
  for (double g : grid) rep.residual.push_back(residual_at(g));
  rep.fit = fit_log_log(rep.g, rep.residual);
  rep.pass = rep.fit.slope >= rep.window_lo && rep.fit.slope <= rep.window_hi && rep.fit.r_squared >= 0.99;
  return rep;
}

// Order check robust to sign cancellation between the g^2 and g^3 terms: fits
// max(|r(g)|, |r(-g)|) = |a| g^2 + |b| g^3 + ..., whose slope lies in [2, 3]
// whenever the residual is O(g^2). Only the lower window edge applies.
template <class F>
ExpansionReport two_sided_report(std::string quantity, const Vec4& R, F&& residual_at,
                                 const std::vector<double>& grid = default_g_grid(), double expected = 2.0) {
  ExpansionReport rep = expansion_report(
      std::move(quantity), R, [&](double g) { return std::max(residual_at(g), residual_at(-g)); }, grid, expected);
  rep.window_hi = INFINITY;
  rep.pass = rep.fit.slope >= rep.window_lo && rep.fit.r_squared >= 0.99;
  return rep;
}

}  // namespace finsleroid
