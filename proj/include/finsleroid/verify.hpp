#pragma once

// Identity suites run by `finsleroid_cli verify`. Each suite evaluates its
// identities at seeded random regular points for one value of g and keeps the
// worst residual per identity.

#include "finsleroid/conformal_map.hpp"
#include "finsleroid/fields.hpp"
#include "finsleroid/o1_approx.hpp"
#include "finsleroid/quasi_map.hpp"
#include "finsleroid/regulators.hpp"
#include "finsleroid/sampling.hpp"
#include "finsleroid/wavefronts.hpp"

#include <bit>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace finsleroid {

struct CheckResult {
  std::string suite;
  std::string identity;
  double g = NAN;  // NaN for checks that span a g grid
  Vec4 point = Vec4::Constant(NAN);
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
  std::string error;  // set when the check threw
};

struct VerifyConfig {
  std::vector<double> g_values{-1.2, -0.5, 0.5, 1.0, 2.0};
  // Keys: "suite.identity", "identity", "suite", or "fd" for every finite-difference check.
  std::map<std::string, double> tolerance;
  std::uint64_t seed = 2024;
  int samples = 20;

  double tol(const std::string& suite, const std::string& identity, double fallback, bool fd) const {
    for (const std::string& key : {suite + "." + identity, identity, suite, std::string(fd ? "fd" : "")}) {
      if (key.empty()) continue;
      auto it = tolerance.find(key);
      if (it != tolerance.end()) return it->second;
    }
    return fallback;
  }
};

// Collects the worst residual per identity, in first-seen order.
class SuiteRun {
 public:
  SuiteRun(const VerifyConfig& cfg, std::string suite, double g) : cfg_(cfg), suite_(std::move(suite)), g_(g) {}

  void check(const std::string& identity, const Vec4& R, double residual, double tol, bool fd = false) {
    CheckResult& r = slot(identity, tol, fd);
    if (std::isnan(r.point[0]) || !(residual <= r.residual)) {
      r.residual = residual;
      r.point = R;
    }
    r.pass = r.pass && residual <= r.tolerance;
  }

  // Runs fn and records a failing row when it throws.
  void guarded(const std::string& identity, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      CheckResult& r = slot(identity, 0, false);
      r.pass = false;
      r.residual = NAN;
      r.error = e.what();
    }
  }

  std::vector<CheckResult> results() const { return rows_; }

 private:
  CheckResult& slot(const std::string& identity, double tol, bool fd) {
    for (auto& r : rows_)
      if (r.identity == identity) return r;
    CheckResult r;
    r.suite = suite_;
    r.identity = identity;
    r.g = g_;
    r.tolerance = cfg_.tol(suite_, identity, tol, fd);
    r.residual = 0;
    r.pass = true;
    rows_.push_back(r);
    return rows_.back();
  }

  const VerifyConfig& cfg_;
  std::string suite_;
  double g_;
  std::vector<CheckResult> rows_;
};

namespace verify_detail {

inline double mat_rel(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Per-job seed derived from the run seed, the suite and g.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t suite, double g) {
  const auto bits = std::bit_cast<std::uint64_t>(g);
  std::seed_seq seq{seed, seed >> 32, suite, bits, bits >> 32};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (std::uint64_t(w[0]) << 32) | w[1];
}

inline Vec4 pick(PointSampler& s, const DeformationParameter& c, Region r) {
  return s.point(c, r == Region::timelike ? (s.uniform() < 0.5 ? Sector::future_timelike : Sector::past_timelike)
                                          : Sector::spacelike);
}

}  // namespace verify_detail

inline std::vector<CheckResult> verify_core(const VerifyConfig& cfg, double g) {
  using namespace verify_detail;
  SuiteRun run(cfg, "core", g);
  const auto c = derive_constants(g);
  PointSampler s(mix(cfg.seed, 1, g));
  run.check("indicatrix-curvature", Vec4::Zero(), std::abs(indicatrix_curvature(c) + 1 + 0.25 * g * g), 1e-15);
  for (int i = 0; i < cfg.samples; ++i) {
    const Vec4 R = s.point(c);
    run.guarded("closed-forms", [&] {
      const Mat4 gm = metric_tensor_closed(c, R);
      const double j8 = std::pow(aux_forms(c, R).j, 8);
      const Vec4 P = covector(c, R);
      run.check("legendre-duality", R, rel(fhf(c, P), fmf(c, R)), 1e-12);
      run.check("metric-determinant", R, std::abs(gm.determinant() + j8) / j8, 1e-12);
      run.check("metric-euler", R, (P - gm * R).norm() / P.norm(), 1e-12);
      const Tensor3 C = cartan_tensor_closed(c, R);
      double contr = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
          double v = 0;
          for (int r = 0; r < 4; ++r) v += C(p, q, r) * R[r];
          contr = std::max(contr, std::abs(v));
        }
      run.check("cartan-euler", R, contr / (std::max(C.max_abs(), 1e-300) * R.norm()), 1e-12);
      if (g != 0) {
        const Vec4 Cp = cartan_trace(c, R);
        run.check("cartan-contraction", R, rel(Cp.dot(inverse_metric_closed(c, R) * Cp) * signed_square(c, R), -4 * g * g),
                  1e-11);
      }
    });
    run.guarded("metric-fd", [&] { run.check("metric-fd", R, mat_rel(metric_tensor(c, R), metric_tensor_closed(c, R)), 1e-7, true); });
    if (i % 4 == 0 && g != 0)
      run.guarded("curvature-model", [&] {
        const Mat4 gm = metric_tensor_closed(c, R);
        const double psi = signed_square(c, R);
        const Tensor4 model = curvature_model(c, angular_metric(gm, gm * R, psi), psi);
        run.check("curvature-model", R, (curvature_tensor(c, R) - model).max_abs() / model.max_abs(), 1e-5, true);
      });
  }
  return run.results();
}

inline std::vector<CheckResult> verify_quasi(const VerifyConfig& cfg, double g) {
  using namespace verify_detail;
  SuiteRun run(cfg, "quasi-map", g);
  const auto c = derive_constants(g);
  PointSampler s(mix(cfg.seed, 2, g));
  for (int i = 0; i < cfg.samples; ++i) {
    const Vec4 R = s.point(c);
    run.guarded("quasi-map", [&] {
      const Vec4 t = sigma(c, R);
      run.check("norm-identity", R, rel(pseudo_norm(t), fmf(c, R)), 1e-12);
      run.check("round-trip", R, (mu(c, t) - R).norm() / R.norm(), 1e-10);
      const double j4h3 = std::pow(aux_forms(c, R).j, 4) * std::pow(c.h, 3);
      const JacobianPair J = jacobians(c, R);
      run.check("jacobian-determinant", R, std::abs(J.forward.determinant() / j4h3 - 1), 1e-12);
      run.check("jacobian-euler", R, (J.forward.transpose() * R - t).norm() / R.norm(), 1e-12);
      const QuasiMetric q = quasi_metric(c, t);
      run.check("quasi-metric-determinant", R, std::abs(q.upper.determinant() / std::pow(c.h, 6) + 1), 1e-12);
      run.check("quasi-metric-inverse", R, mat_rel(q.lower * q.upper, Mat4::Identity()), 1e-12);
      run.check("conformal-multiplier", R, rel(conformal_multiplier(c, t), conformal_factor(c, R)), 1e-12);
    });
    run.guarded("jacobian-fd", [&] {
      const Mat4 Jf = sigma_jacobian_fd(c, R);
      run.check("jacobian-fd", R, mat_rel(Jf, sigma_jacobian(c, R)), 1e-7, true);
    });
  }
  return run.results();
}

inline std::vector<CheckResult> verify_conformal(const VerifyConfig& cfg, double g) {
  using namespace verify_detail;
  SuiteRun run(cfg, "conformal-map", g);
  const auto c = derive_constants(g);
  PointSampler s(mix(cfg.seed, 3, g));
  const int heavy = std::max(1, cfg.samples / 5);
  for (Region reg : {Region::timelike, Region::spacelike})
    for (int i = 0; i < cfg.samples; ++i) {
      const Vec4 R = pick(s, c, reg);
      run.guarded("rho", [&] {
        run.check("rho-round-trip", R, (eta(c, rho(c, R)) - R).norm() / R.norm(), 1e-10);
        run.check("jacobian-table", R, mat_rel(rho_table(c, R), rho_jacobian(c, R)), 1e-12);
        run.check("flat-metric", R, mat_rel(flat_metric_from_jacobian(rho_jacobian(c, R)), flat_metric(c, R)), 1e-12);
      });
      if (i < heavy) {
        run.guarded("flatness-certificate", [&] { run.check("flatness-certificate", R, flatness_certificate(c, R), 1e-4, true); });
        run.guarded("density-divergence", [&] {
          const double want = density_divergence(c, R);
          run.check("density-divergence", R, std::abs(density_divergence_fd(c, R) - want) / std::max(std::abs(want), 1e-12), 1e-5,
                    true);
        });
      }
    }
  return run.results();
}

inline std::vector<CheckResult> verify_fields(const VerifyConfig& cfg, double g) {
  using namespace verify_detail;
  SuiteRun run(cfg, "fields", g);
  const auto c = derive_constants(g);
  PointSampler s(mix(cfg.seed, 4, g));
  const GammaAlgebra G = dirac_representation();
  const Vec4 k = on_shell(Eigen::Vector3d(0.3, 0.2, -0.1), 1.0);
  const Vec4 kn(1.0, -1.0, 0.0, 0.0);
  const auto scalar = conformal_scalar_wave(c, k);
  const auto yuk = yukawa(c, 1.0);
  const auto coul = coulomb(c);
  const auto wave = em_export(c, flat_plane_wave(CVec4(0, 0, 0, 1), kn));
  const auto spinor = conformal_spinor_wave(c, k, spinor_amplitude_solve(k, 1.0, G).col(0));
  const SpinorField f{spinor, 1.0, G};
  for (int i = 0; i < cfg.samples; ++i) {
    const Vec4 R = s.point(c);
    auto fd_check = [&](const std::string& name, double tol, const std::function<double()>& value) {
      run.guarded(name, [&] { run.check(name, R, value(), tol, true); });
    };
    fd_check("scalar-wave", 1e-5, [&] { return conformal_scalar_residual(c, scalar, 1.0, R).relative(); });
    fd_check("yukawa", 1e-5, [&] { return conformal_scalar_residual(c, yuk, 1.0, R).relative(); });
    fd_check("coulomb", 1e-5, [&] { return maxwell_residual(c, coul, R).relative(); });
    fd_check("em-wave", 1e-5, [&] { return maxwell_residual(c, wave, R).relative(); });
    fd_check("spinor-wave", 1e-5, [&] { return dirac_residual(c, f, R).relative(); });
    if (i % 4 == 0) {
      fd_check("scalar-eigen", 1e-6, [&] { return scalar_eigen_residual(c, scalar, k, R); });
      fd_check("spinor-eigen", 1e-6, [&] { return spinor_eigen_residual(c, spinor, k, R); });
      fd_check("em-eigen", 1e-6, [&] { return em_eigen_residual(c, wave, kn, R); });
    }
  }
  return run.results();
}

inline std::vector<CheckResult> verify_regulators(const VerifyConfig& cfg, double g) {
  using namespace verify_detail;
  SuiteRun run(cfg, "regulators", g);
  if (g == 0) return run.results();  // the weights are not analytic at g = 0
  RegulatorConfig rc;
  rc.g = g;
  run.guarded("power-weight", [&] {
    run.check("power-normalization", Vec4::Zero(), rel(normalize_C1(rc), normalize_C1_closed(rc)), 1e-10);
    for (int z = 0; z <= 8; ++z)
      run.check("moments", Vec4(z, 0, 0, 0),
                rel(weighted_momentum_integral(rc, [z](double P) { return std::pow(P, z); }), weighted_moment_closed(rc, z)), 1e-9);
  });
  run.guarded("bessel-normalization", [&] {
    RegulatorConfig e = rc;
    e.C4 = 0.125;
    run.check("bessel-normalization", Vec4::Zero(),
              rel(1.0 / (4 * std::numbers::pi * normalize_C3(e, EnergyForm::simplified)), simplified_normalization_bessel(e)),
              1e-8);
  });
  run.guarded("fourier", [&] {
    for (const Vec4& r : {Vec4(0, 0, 0, 0), Vec4(0.3, -0.5, 1.1, 0.2)}) {
      const auto [lhs, rhs] = gaussian_fourier_check(rc, r);
      run.check("fourier", r, rel(lhs, rhs), 1e-10);
    }
  });
  run.guarded("dispersion", [&] {
    const auto c = derive_constants(g);
    for (double p : {0.1, 1.0, 10.0}) {
      // |ln H| over K0 d(ln H)/dK0: the relative energy error, well conditioned near the co-cone.
      const double K0 = dispersion_energy(c, p);
      const auto [u, v] = co_cone_factors(c, Vec4(K0, p, 0, 0));
      const double slope = 0.5 * c.G_sup_plus / u - 0.5 * c.G_sup_minus / v;
      run.check("dispersion", Vec4(K0, p, 0, 0), std::abs(std::log(fhf(c, Vec4(K0, p, 0, 0)))) / (K0 * slope), 1e-12);
    }
  });
  return run.results();
}

inline std::vector<CheckResult> verify_wavefronts(const VerifyConfig& cfg, double g) {
  SuiteRun run(cfg, "wavefronts", g);
  const auto c = derive_constants(g);
  PointSampler s(verify_detail::mix(cfg.seed, 5, g));
  const Vec4 kax(1.0, -1.0, 0.0, 0.0);
  run.guarded("front", [&] {
    for (int i = 0; i < cfg.samples; ++i) {
      const double R0 = s.uniform(-50, 50), rp = s.uniform(0, 50), phi = s.uniform(0, 2 * std::numbers::pi);
      const Vec4 R(R0, front_point(c, R0, rp), rp * std::cos(phi), rp * std::sin(phi));
      run.check("front-equation", R, std::abs(front_residual(c, kax, R)) / (1 + R.norm()), 1e-12);
      Vec4 k;
      k << 1.0, s.direction() * s.uniform(0.6 * std::abs(c.G) + 0.1, 3.0);
      const Vec4 Q = general_front_point(c, k, R0, s.direction() * rp);
      run.check("general-front", Q, std::abs(front_residual(c, k, Q)) / (k.norm() * (1 + Q.norm())), 1e-12);
    }
    for (double R0 : {1.0, 10.0, 45.0}) {
      const double speed = front_point(c, R0 + 1, 0) - front_point(c, R0, 0);
      run.check("vertex-speed", Vec4(R0, 0, 0, 0), std::abs(speed - vertex_velocity(c)), 1e-12);
      const double d2 = fd::second_derivative1d([&](double y) { return c.h * R0 - 0.5 * c.g * std::hypot(R0, y); }, 0.0, 0.05 * R0);
      run.check("vertex-curvature", Vec4(R0, 0, 0, 0), std::abs(d2 - vertex_curvature(c, R0)), 1e-8, true);
    }
    for (double rp : {0.5, 3.0, 40.0})
      run.check("cone-at-origin", Vec4(0, 0, rp, 0), std::abs(front_point(c, 0, rp) - asymptotic_cone(c, rp)), 1e-12);
  });
  return run.results();
}

// Order-2 fits of exact-minus-first-order residuals at fixed points.
inline std::vector<ExpansionReport> o1_expansion_reports() {
  const Vec4 mp(2.0, 1.0, 0.5, 0.0), ax(2.0, 1.0, 0.0, 0.0), dg(3.0, 1.0, 1.0, 1.0), sp(0.5, 1.5, 0.8, 1.1);
  auto mx = [](const Mat4& m) { return m.cwiseAbs().maxCoeff(); };
  std::vector<ExpansionReport> out;
  out.push_back(expansion_report("metric", mp, [&](double g) { return mx(metric_tensor(derive_constants(g), mp) - o1_metric(g, mp)); }));
  out.push_back(expansion_report("inverse-metric", mp, [&](double g) {
    return mx(inverse_metric_closed(derive_constants(g), mp) - o1_inverse_metric(g, mp));
  }));
  out.push_back(expansion_report("metric-product", mp, [&](double g) {
    return mx(o1_metric(g, mp) * o1_inverse_metric(g, mp) - Mat4::Identity());
  }));
  out.push_back(expansion_report("j", dg, [&](double g) { return std::abs(aux_forms(derive_constants(g), dg).j - o1_j(g, dg)); }));
  out.push_back(expansion_report("determinant", dg, [&](double g) {
    return std::abs(metric_tensor_closed(derive_constants(g), dg).determinant() - o1_metric_determinant(g, dg));
  }));
  const Tensor3 S = cartan_leading(ax);
  out.push_back(expansion_report("cartan", ax, [&](double g) { return (cartan_tensor(derive_constants(g), ax) - g * S).max_abs(); }));
  for (const Vec4& R : {ax, dg}) {
    const Vec4 St = cartan_trace_leading(R);
    out.push_back(expansion_report("cartan-trace", R, [&](double g) {
      return (cartan_trace(derive_constants(g), R) - g * St).cwiseAbs().maxCoeff();
    }));
    out.push_back(expansion_report("cartan-contraction", R, [&](double g) {
      const auto c = derive_constants(g);
      const Vec4 Cp = cartan_trace(c, R);
      return std::abs(Cp.dot(inverse_metric_closed(c, R) * Cp));
    }));
  }
  out.push_back(expansion_report("cartan-divergence", ax, [&](double g) {
    return std::abs(cartan_divergence(derive_constants(g), ax) - o1_cartan_divergence(g, ax));
  }));
  out.push_back(expansion_report("curvature", ax, [&](double g) { return curvature_tensor(derive_constants(g), ax).max_abs(); }));
  using Field = double QuasiDeviation::*;
  const std::pair<const char*, Field> quasi[] = {{"quasi-metric-lower", &QuasiDeviation::metric_lower},
                                                 {"quasi-metric-upper", &QuasiDeviation::metric_upper},
                                                 {"quasi-connection", &QuasiDeviation::connection},
                                                 {"quasi-curvature", &QuasiDeviation::curvature},
                                                 {"quasi-rotation", &QuasiDeviation::rotation},
                                                 {"gamma", &QuasiDeviation::gamma}};
  for (const auto& [name, f] : quasi)
    out.push_back(expansion_report(name, ax, [&, f = f](double g) { return o1_quasi_objects(derive_constants(g), ax).*f; }));
  for (const auto& [R, k] : {std::pair{ax, Vec4(1.0, -1.0, 0.0, 0.0)}, std::pair{sp, Vec4(1.3, 0.4, -0.2, 0.7)}})
    out.push_back(expansion_report("phase", R, [&](double g) {
      return std::abs(wave_phase(derive_constants(g), R, k) - o1_phase(g, R, k));
    }));
  for (const auto& [R0, rp] : {std::pair{2.0, 1.0}, std::pair{-3.0, 4.0}})
    out.push_back(expansion_report("front", Vec4(R0, 0, rp, 0), [&](double g) {
      const auto c = derive_constants(g);
      return std::abs(front_point(c, R0, rp) - o1g_front(c, R0, rp));
    }));
  for (const Vec4& R : {Vec4(2.0, 1.0, 0.5, 0.3), sp}) {
    out.push_back(expansion_report("coulomb", R, [&](double g) {
      return (coulomb(derive_constants(g))(R) - coulomb_o1(g)(R)).norm();
    }));
    out.push_back(expansion_report("yukawa", R, [&](double g) {
      return std::abs(yukawa(derive_constants(g), 1.0)(R) - yukawa_o1(g, 1.0)(R));
    }));
  }
  return out;
}

inline std::vector<CheckResult> verify_o1(const VerifyConfig& cfg) {
  SuiteRun run(cfg, "o1g-approx", NAN);
  run.guarded("expansions", [&] {
    for (const ExpansionReport& rep : o1_expansion_reports()) {
      // Distance of the fitted slope from 2; an unreliable fit counts as infinite.
      const double d = rep.fit.r_squared >= 0.99 && std::isfinite(rep.fit.slope) ? std::abs(rep.fit.slope - 2.0) : INFINITY;
      run.check("slope:" + rep.quantity, rep.point, d, 0.2);
    }
  });
  return run.results();
}

using SuiteFn = std::vector<CheckResult> (*)(const VerifyConfig&, double);

inline const std::vector<std::pair<std::string, SuiteFn>>& verify_suites() {
  static const std::vector<std::pair<std::string, SuiteFn>> s{{"core", verify_core},           {"quasi-map", verify_quasi},
                                                              {"conformal-map", verify_conformal}, {"fields", verify_fields},
                                                              {"regulators", verify_regulators}, {"wavefronts", verify_wavefronts}};
  return s;
}

// Jobs run concurrently; results come back in (suite, g) order whatever the scheduling.
inline std::vector<CheckResult> run_verification(const VerifyConfig& cfg) {
  std::vector<std::future<std::vector<CheckResult>>> jobs;
  for (const auto& [name, fn] : verify_suites())
    for (double g : cfg.g_values) jobs.push_back(std::async(std::launch::async, fn, std::cref(cfg), g));
  jobs.push_back(std::async(std::launch::async, [&cfg] { return verify_o1(cfg); }));
  std::vector<CheckResult> out;
  for (auto& j : jobs) {
    auto part = j.get();
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace finsleroid
