// finsleroid_cli: verification suites, front samples, field samples and regulator tables.
// Exit codes: 0 pass, 1 verification failure, 2 usage or I/O error, 3 numerical-domain failure.

#include "finsleroid/fields.hpp"
#include "finsleroid/regulators.hpp"
#include "finsleroid/verify.hpp"
#include "finsleroid/wavefronts.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace finsleroid;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2, kDomain = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0 ? 0.0 : x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

// Writes to a file, or to stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw UsageError("write failed: " + (path_.empty() ? std::string("stdout") : path_));
  }

 private:
  std::string path_;
  std::ofstream file_;
};

// Flat key = value file; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Moves --config FILE out of argv and inserts its entries as flags after the
// subcommand, skipping keys already given on the command line.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

// ------------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<double> g;
  std::vector<std::string> tol;
  std::uint64_t seed = 2024;
  int samples = 20;
  std::string out;
  std::string format = "json";
};

int cmd_verify(const VerifyArgs& a) {
  VerifyConfig cfg;
  if (!a.g.empty()) cfg.g_values = a.g;
  cfg.seed = a.seed;
  if (a.samples < 1) throw UsageError("--samples must be positive");
  cfg.samples = a.samples;
  for (const auto& t : a.tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--tol expects NAME=VAL, got " + t);
    try {
      cfg.tolerance[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--tol value is not a number: " + t);
    }
  }
  const auto rows = run_verification(cfg);

  Output out(a.out);
  if (a.format == "json") {
    nlohmann::ordered_json report = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["suite"] = r.suite;
      j["identity"] = r.identity;
      j["g"] = r.g;
      j["point"] = {r.point[0], r.point[1], r.point[2], r.point[3]};
      j["residual"] = r.residual;
      j["tolerance"] = r.tolerance;
      j["pass"] = r.pass;
      if (!r.error.empty()) j["error"] = r.error;
      report.push_back(j);
    }
    out.stream() << report.dump(2) << "\n";
  } else {
    auto& s = out.stream();
    s << "suite,identity,g,R0,R1,R2,R3,residual,tolerance,pass,error\n";
    for (const auto& r : rows)
      s << r.suite << ',' << r.identity << ',' << num(r.g) << ',' << num(r.point[0]) << ',' << num(r.point[1]) << ','
        << num(r.point[2]) << ',' << num(r.point[3]) << ',' << num(r.residual) << ',' << num(r.tolerance) << ','
        << (r.pass ? "true" : "false") << ',' << csv_field(r.error) << '\n';
  }
  out.finish();

  bool failed = false, errored = false;
  for (const auto& r : rows) {
    if (r.pass) continue;
    failed = true;
    errored = errored || !r.error.empty();
    std::cerr << "FAIL " << r.suite << " " << r.identity << " g=" << num(r.g) << " residual=" << num(r.residual)
              << " tolerance=" << num(r.tolerance) << (r.error.empty() ? "" : " error: " + r.error) << "\n";
  }
  if (errored) return kDomain;
  return failed ? kFail : kPass;
}

// -------------------------------------------------------------------- front

struct FrontArgs {
  double g = 0;
  std::vector<double> r0;
  std::string slice = "2d";
  double r_perp_max = 50;
  int n_perp = 51;
  int n_azimuth = 16;
  std::string out;
  std::string svg;
};

void write_svg(const std::string& path, double g, const std::vector<FrontSample>& fronts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open SVG file: " + path);
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : fronts)
    for (const auto& p : s.points) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1.0});
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
  // Horizontal axis R^1, vertical axis R_perp pointing up.
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0) << ' ' << num(-y1) << ' ' << num(x1 - x0) << ' '
    << num(y1 - y0) << "\">\n";
  f << "<title>zero-phase fronts, g = " << num(g) << "</title>\n";
  const double stroke = 0.004 * std::max(x1 - x0, y1 - y0);
  for (const auto& s : fronts) {
    f << "<polyline data-R0=\"" << num(s.R0) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"" << num(stroke)
      << "\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) f << (i ? " " : "") << num(s.points[i][0]) << ',' << num(-s.points[i][1]);
    f << "\"/>\n";
  }
  f << "</svg>\n";
  if (!f) throw UsageError("write failed: " + path);
}

int cmd_front(const FrontArgs& a) {
  if (a.r0.empty()) throw UsageError("--r0 needs at least one value");
  const auto c = derive_constants(a.g);
  FrontGrid grid;
  grid.r_perp_max = a.r_perp_max;
  grid.n_perp = a.n_perp;
  grid.n_azimuth = a.n_azimuth;
  grid.slice = a.slice == "2d";
  const auto fronts = sample_front_family(c, a.r0, grid);
  Output out(a.out);
  auto& s = out.stream();
  s << "g,R0,Rperp,azimuth,R1,R2,R3\n";
  for (const auto& f : fronts) {
    const std::size_t na = f.azimuth.size();
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      const auto& p = f.points[i];
      s << num(f.g) << ',' << num(f.R0) << ',' << num(f.r_perp[i / na]) << ',' << num(f.azimuth[i % na]) << ',' << num(p[0])
        << ',' << num(p[1]) << ',' << num(p[2]) << '\n';
    }
  }
  out.finish();
  if (!a.svg.empty()) {
    FrontGrid sl = grid;
    sl.slice = true;
    write_svg(a.svg, a.g, sample_front_family(c, a.r0, sl));
  }
  for (const auto& f : fronts)
    std::cerr << "R0=" << num(f.R0) << " vertex=" << num(f.vertex) << " motion=" << to_string(f.motion) << "\n";
  return kPass;
}

// -------------------------------------------------------------------- field

struct FieldArgs {
  std::string family;
  double g = 0;
  std::string points;
  double m = 1;
  double e = 1;
  std::vector<double> k{0.3, 0.2, -0.1};
  std::string out;
};

std::vector<Vec4> read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read points file: " + path);
  std::vector<Vec4> pts;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream is(line);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        v.clear();
        break;  // header or junk line
      }
    }
    if (v.empty()) continue;
    if (v.size() != 4) throw UsageError(path + ":" + std::to_string(n) + ": expected four coordinates R0,R1,R2,R3");
    pts.emplace_back(v[0], v[1], v[2], v[3]);
  }
  if (pts.empty()) throw UsageError("no points in " + path);
  return pts;
}

int cmd_field(const FieldArgs& a) {
  const auto c = derive_constants(a.g);
  const auto pts = read_points(a.points);
  if (a.k.size() != 3) throw UsageError("--k expects three spatial components");
  const Vec4 k = on_shell(Eigen::Vector3d(a.k[0], a.k[1], a.k[2]), a.m);
  const Vec4 kn(1.0, -1.0, 0.0, 0.0);

  int ncomp = 4;
  std::function<CVec4(const Vec4&)> value;
  std::function<double(const Vec4&)> residual;
  if (a.family == "yukawa" || a.family == "scalar-wave") {
    ncomp = 1;
    const ScalarFn phi = a.family == "yukawa" ? yukawa(c, a.m) : conformal_scalar_wave(c, k);
    value = [phi](const Vec4& R) { return CVec4(phi(R), 0, 0, 0); };
    residual = [&, phi](const Vec4& R) { return conformal_scalar_residual(c, phi, a.m, R).relative(); };
  } else if (a.family == "coulomb" || a.family == "em-wave") {
    const CovectorFn A = a.family == "coulomb" ? coulomb(c, a.e) : em_export(c, flat_plane_wave(CVec4(0, 0, 0, 1), kn));
    value = A;
    residual = [&, A](const Vec4& R) { return maxwell_residual(c, A, R).relative(); };
  } else if (a.family == "spinor-wave") {
    const GammaAlgebra G = dirac_representation();
    const SpinorFn psi = conformal_spinor_wave(c, k, spinor_amplitude_solve(k, a.m, G).col(0));
    value = psi;
    residual = [&, psi, G](const Vec4& R) { return dirac_residual(c, SpinorField{psi, a.m, G}, R).relative(); };
  } else {
    throw UsageError("unknown family " + a.family);
  }

  Output out(a.out);
  auto& s = out.stream();
  s << "family,g,R0,R1,R2,R3,status";
  for (int i = 0; i < ncomp; ++i) s << ",re" << i << ",im" << i;
  s << ",residual\n";
  int domain = 0;
  for (const Vec4& R : pts) {
    std::string status = "ok";
    CVec4 v = CVec4::Constant(cplx(NAN, NAN));
    double res = NAN;
    try {
      require_regular(c, R);
      v = value(R);
      res = residual(R);
    } catch (const ConeProximityError& e) {
      status = "cone-proximity";
      ++domain;
    } catch (const Error& e) {
      status = std::string("error: ") + e.what();
      ++domain;
    }
    s << a.family << ',' << num(a.g) << ',' << num(R[0]) << ',' << num(R[1]) << ',' << num(R[2]) << ',' << num(R[3]) << ','
      << csv_field(status);
    for (int i = 0; i < ncomp; ++i) s << ',' << num(v[i].real()) << ',' << num(v[i].imag());
    s << ',' << num(res) << '\n';
  }
  out.finish();
  if (domain) std::cerr << domain << " of " << pts.size() << " points marked (cone proximity or domain error)\n";
  return kPass;
}

// ------------------------------------------------------------------ weights

struct WeightArgs {
  double g = 1;
  double nu = 2;
  double cconst = 1;
  double c4 = 1;
  double m = 1;
  double p_max = 10;
  int n = 41;
  std::string out;
};

int cmd_weights(const WeightArgs& a) {
  Output out(a.out);
  auto& s = out.stream();
  s << "kind,name,x,value,reference,status\n";
  auto row = [&](const std::string& kind, const std::string& name, double x, double v, double ref, const std::string& status) {
    s << kind << ',' << name << ',' << num(x) << ',' << num(v) << ',' << num(ref) << ',' << csv_field(status) << '\n';
  };
  if (a.g == 0) {
    row("error", "normalization", NAN, NAN, NAN, "non-analytic normalization");
    out.finish();
    std::cerr << "the regulator weights are not analytic at g = 0\n";
    return kDomain;
  }
  RegulatorConfig cfg;
  cfg.g = a.g;
  cfg.nu = a.nu;
  cfg.C = a.cconst;
  cfg.C4 = a.c4;
  cfg.m = a.m;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (a.n < 2 || !(a.p_max > 0)) throw UsageError("--n must be >= 2 and --pmax positive");

  int errors = 0;
  auto guarded = [&](const std::string& kind, const std::string& name, double x, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      ++errors;
      row(kind, name, x, NAN, NAN, std::string("error: ") + e.what());
    }
  };
  auto status = [](double v, double ref, double tol) {
    return std::abs(v - ref) <= tol * std::abs(ref) ? std::string("ok") : std::string("mismatch");
  };

  double C3 = NAN;
  guarded("normalization", "C1", NAN, [&] {
    const double q = normalize_C1(cfg), ref = normalize_C1_closed(cfg);
    row("normalization", "C1", NAN, q, ref, status(q, ref, 1e-10));
  });
  guarded("normalization", "W", NAN, [&] {
    const double v = weighted_momentum_integral(cfg, [](double) { return 1.0; });
    row("normalization", "W", NAN, v, 1.0, status(v, 1.0, 1e-8));
  });
  guarded("normalization", "C3", NAN, [&] {
    C3 = normalize_C3(cfg);
    const double check = 4 * std::numbers::pi * C3 *
                         detail::half_line([&](double P) { return weight_W1_shape(cfg, P) * P * P; }, 1e-13);
    row("normalization", "C3", NAN, C3, NAN, "ok");
    row("normalization", "W1", NAN, check, 1.0, status(check, 1.0, 1e-8));
  });
  guarded("normalization", "C3-simplified", NAN, [&] {
    const double q = 1.0 / (4 * std::numbers::pi * normalize_C3(cfg, EnergyForm::simplified));
    const double ref = simplified_normalization_bessel(cfg);
    row("normalization", "C3-simplified-inverse", NAN, q, ref, status(q, ref, 1e-8));
  });
  for (int z = 0; z <= 8; ++z)
    guarded("moment", "P^z", z, [&] {
      const double q = weighted_momentum_integral(cfg, [z](double P) { return std::pow(P, z); });
      const double ref = weighted_moment_closed(cfg, z);
      row("moment", "P^z", z, q, ref, status(q, ref, 1e-9));
    });
  for (int i = 0; i < a.n; ++i) {
    const double P = a.p_max * i / (a.n - 1);
    guarded("curve", "W", P, [&] { row("curve", "W", P, weight_W(cfg, P), NAN, "ok"); });
  }
  if (std::isfinite(C3))
    for (int i = 0; i < a.n; ++i) {
      const double P = a.p_max * i / (a.n - 1);
      guarded("curve", "W1", P, [&] { row("curve", "W1", P, C3 * weight_W1_shape(cfg, P), NAN, "ok"); });
    }
  out.finish();
  return errors ? kDomain : kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsleroid identity checks, front and field samples, regulator tables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "finsleroid_cli 1.0");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run the identity suites and write a report");
  verify->add_option("--g", va.g, "comma-separated g values")->delimiter(',');
  verify->add_option("--tol", va.tol, "tolerance override NAME=VAL (suite.identity, identity, suite or fd)");
  verify->add_option("--seed", va.seed, "random seed");
  verify->add_option("--samples", va.samples, "random points per suite and g");
  verify->add_option("--out", va.out, "output path (default stdout)");
  verify->add_option("--format", va.format, "report format")->check(CLI::IsMember({"json", "csv"}));

  FrontArgs fa;
  auto* front = app.add_subcommand("front", "sample zero-phase fronts of the axial plane wave");
  front->add_option("--g", fa.g, "deformation parameter")->required();
  front->add_option("--r0", fa.r0, "comma-separated R0 values")->delimiter(',')->required()->allow_extra_args(false);
  front->add_option("--slice", fa.slice, "2d: the R^3 = 0 plane; 3d: full azimuth")->check(CLI::IsMember({"2d", "3d"}));
  front->add_option("--rperp-max", fa.r_perp_max, "largest transverse distance");
  front->add_option("--n-perp", fa.n_perp, "transverse samples");
  front->add_option("--n-azimuth", fa.n_azimuth, "azimuth samples in 3d mode");
  front->add_option("--out", fa.out, "CSV output path (default stdout)");
  front->add_option("--svg", fa.svg, "also write the 2d slices as SVG polylines");

  FieldArgs fi;
  auto* field = app.add_subcommand("field", "evaluate an exact solution and its field-equation residual");
  field->add_option("--family", fi.family, "solution family")
      ->required()
      ->check(CLI::IsMember({"coulomb", "yukawa", "scalar-wave", "em-wave", "spinor-wave"}));
  field->add_option("--g", fi.g, "deformation parameter")->required();
  field->add_option("--points", fi.points, "file of R0,R1,R2,R3 rows")->required();
  field->add_option("--m", fi.m, "mass");
  field->add_option("--e", fi.e, "Coulomb charge");
  field->add_option("--k", fi.k, "spatial wave vector k1,k2,k3 of the scalar and spinor waves")->delimiter(',');
  field->add_option("--out", fi.out, "CSV output path (default stdout)");

  WeightArgs wa;
  auto* weights = app.add_subcommand("weights", "tabulate regulator weights, normalizations and moments");
  weights->add_option("--g", wa.g, "deformation parameter");
  weights->add_option("--nu", wa.nu, "exponent of the power weight");
  weights->add_option("--cconst", wa.cconst, "constant C in alpha = C g^2");
  weights->add_option("--c4", wa.c4, "constant C4 of the on-shell weight");
  weights->add_option("--m", wa.m, "mass");
  weights->add_option("--pmax", wa.p_max, "largest momentum of the curves");
  weights->add_option("--n", wa.n, "curve samples");
  weights->add_option("--out", wa.out, "CSV output path (default stdout)");

  try {
    std::vector<std::string> args = merge_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (*verify) return cmd_verify(va);
    if (*front) return cmd_front(fa);
    if (*field) return cmd_field(fi);
    if (*weights) return cmd_weights(wa);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kDomain;
  }
  return kUsage;
}
