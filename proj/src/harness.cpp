#include "helmest/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace helmest {

// ---- configuration ----------------------------------------------------------

namespace {

class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  // Every key must be consumed or listed; unknown keys are configuration typos.
  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail(it.key(), "unknown field");
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  const Json& at(const char* k) const { return j_.at(k); }
  std::string path(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

  double num(const char* k, double def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number()) fail(k, "expected a number");
    return j_.at(k).get<double>();
  }
  int integer(const char* k, int def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number_integer()) fail(k, "expected an integer");
    return j_.at(k).get<int>();
  }
  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) fail(k, "expected true or false");
    return j_.at(k).get<bool>();
  }
  std::string str(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) fail(k, "expected a string");
    return j_.at(k).get<std::string>();
  }
  std::vector<double> nums(const char* k) const {
    std::vector<double> out;
    if (!has(k)) return out;
    if (!j_.at(k).is_array()) fail(k, "expected an array of numbers");
    for (const auto& e : j_.at(k)) {
      if (!e.is_number()) fail(k, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
    throw ConfigError("field '" + (k.empty() ? where_ : path(k)) + "': " + msg);
  }

 private:
  const Json& j_;
  std::string where_;
};

PresetParams parse_preset_params(const Reader& r) {
  r.allow_only({"id", "n", "delta", "eta", "beta", "kappa", "eta_c", "diagonal"});
  PresetParams p;
  if (r.has("n")) p.n = r.integer("n", 3);
  if (r.has("delta")) p.delta = r.num("delta", 0.5);
  if (r.has("eta")) p.eta = r.num("eta", 0);
  if (r.has("beta")) p.beta = r.num("beta", 0);
  if (r.has("kappa")) p.kappa = r.num("kappa", 0);
  if (r.has("eta_c")) p.eta_c = r.num("eta_c", 0);
  if (r.has("diagonal")) p.diagonal = r.nums("diagonal");
  return p;
}

// Constant coefficients given explicitly.
CoefficientSet parse_coefficients(const Reader& r) {
  r.allow_only({"n", "delta", "a", "diagonal", "b", "c"});
  const int n = r.integer("n", 3);
  const double delta = r.num("delta", 0.5);
  if (n < 3) r.fail("n", "dimension must be at least 3");
  CoefficientSet C = identity_preset(n, delta);
  C.id = "custom";
  if (r.has("diagonal") && r.has("a")) r.fail("a", "give either 'a' or 'diagonal'");
  if (r.has("diagonal")) {
    const auto d = r.nums("diagonal");
    if (static_cast<int>(d.size()) != n) r.fail("diagonal", "needs n entries");
    C = diagonal_preset(d, delta);
    C.id = "custom";
  } else if (r.has("a")) {
    const Json& a = r.at("a");
    if (!a.is_array() || static_cast<int>(a.size()) != n) r.fail("a", "expected an n x n array");
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      if (!a[i].is_array() || static_cast<int>(a[i].size()) != n) r.fail("a", "expected an n x n array");
      for (int j = 0; j < n; ++j) {
        if (!a[i][j].is_number()) r.fail("a", "entries must be numbers");
        A(i, j) = a[i][j].get<double>();
      }
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14 * A.cwiseAbs().maxCoeff())
      r.fail("a", "matrix is not symmetric");
    C.a = MatrixField::constant(A);
    C.radial.reset();
    if ((A - A(0, 0) * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() == 0) {
      const double s = A(0, 0);
      C.radial = RadialCoefficients{[s](double) { return s; }, [](double) { return 0.0; }};
    }
  }
  if (r.has("b")) {
    const auto b = r.nums("b");
    if (static_cast<int>(b.size()) != n) r.fail("b", "needs n entries");
    C.b = VectorField(JetField<double>::constant(n, b));
    bool zero = true;
    for (double e : b) zero = zero && e == 0.0;
    if (!zero) C.radial.reset();
  }
  if (r.has("c")) {
    const double c = r.num("c", 0.0);
    C.c = PotentialField::constant(n, c);
    if (C.radial) {
      auto alpha = C.radial->alpha;
      C.radial = RadialCoefficients{alpha, [c](double) { return c; }};
    }
  }
  C.validate();
  return C;
}

IdentitySuiteOptions parse_identity(const Reader& r) {
  r.allow_only({"n", "draws", "points", "seed", "R", "margin", "amplitude", "oracle_every"});
  IdentitySuiteOptions o;
  o.n = r.integer("n", o.n);
  o.draws = r.integer("draws", o.draws);
  o.points = r.integer("points", o.points);
  o.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<int>(o.seed)));
  o.R = r.num("R", o.R);
  o.margin = r.num("margin", o.margin);
  o.coefficient_amplitude = r.num("amplitude", o.coefficient_amplitude);
  o.oracle_every = r.integer("oracle_every", o.oracle_every);
  if (o.n < 2 || o.draws < 1 || o.points < 1 || !(o.R > 0)) r.fail("", "invalid identity suite options");
  return o;
}

LemmaSuiteOptions parse_lemmas(const Reader& r) {
  r.allow_only({"n", "delta", "trials", "slack", "seed", "beta", "exterior", "obstacle_r0", "per_octave",
                "angular_scale", "refine_every"});
  LemmaSuiteOptions o;
  o.n = r.integer("n", o.n);
  o.delta = r.num("delta", o.delta);
  o.trials = r.integer("trials", o.trials);
  o.slack = r.num("slack", o.slack);
  o.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<int>(o.seed)));
  o.beta = r.num("beta", o.beta);
  o.exterior = r.boolean("exterior", o.exterior);
  o.obstacle_r0 = r.num("obstacle_r0", o.obstacle_r0);
  o.per_octave = r.integer("per_octave", o.per_octave);
  o.angular_scale = r.num("angular_scale", o.angular_scale);
  o.refine_every = r.integer("refine_every", o.refine_every);
  if (o.n < 3 || o.trials < 1 || !(o.delta > 0 && o.delta < 1)) r.fail("", "invalid lemma suite options");
  return o;
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  Reader top(j, "");
  top.allow_only({"name", "description", "seed", "preset", "coefficients", "domain", "mode", "sweep", "solver",
                  "norms", "assertions"});
  Scenario s;
  s.name = top.str("name", s.name);
  s.seed = static_cast<std::uint64_t>(top.integer("seed", 1));

  if (top.has("preset") && top.has("coefficients")) top.fail("preset", "give either 'preset' or 'coefficients'");
  if (top.has("preset")) {
    const Json& p = top.at("preset");
    if (p.is_string()) {
      s.preset = p.get<std::string>();
      s.coeffs = make_preset(s.preset);
    } else {
      Reader r(p, "preset");
      s.preset = r.str("id", "");
      if (s.preset.empty()) r.fail("id", "missing preset id");
      s.coeffs = make_preset(s.preset, parse_preset_params(r));
    }
    s.has_coefficients = true;
  } else if (top.has("coefficients")) {
    s.coeffs = parse_coefficients(Reader(top.at("coefficients"), "coefficients"));
    s.preset = "custom";
    s.has_coefficients = true;
  }
  const int n = s.has_coefficients ? s.coeffs.n : 3;

  s.domain = DomainSpec::whole_space(n);
  if (top.has("domain")) {
    Reader r(top.at("domain"), "domain");
    r.allow_only({"kind", "r0"});
    const std::string kind = r.str("kind", "whole-space");
    if (kind == "ball") {
      const double r0 = r.num("r0", 1.0);
      if (!(r0 > 0)) r.fail("r0", "must be positive");
      s.domain = DomainSpec::ball(n, r0);
    } else if (kind != "whole-space") {
      r.fail("kind", "expected 'whole-space' or 'ball'");
    }
  }

  const std::string mode = top.str("mode", "homogeneous");
  if (mode == "homogeneous")
    s.mode = Mode::homogeneous;
  else if (mode == "nonhomogeneous")
    s.mode = Mode::nonhomogeneous;
  else
    top.fail("mode", "expected 'homogeneous' or 'nonhomogeneous'");

  if (top.has("sweep")) {
    Reader r(top.at("sweep"), "sweep");
    r.allow_only({"lambda", "eps", "pairs"});
    if (r.has("pairs")) {
      if (r.has("lambda") || r.has("eps")) r.fail("pairs", "give either 'pairs' or 'lambda'/'eps' lists");
      const Json& pairs = r.at("pairs");
      if (!pairs.is_array()) r.fail("pairs", "expected an array of [lambda, eps]");
      for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          r.fail("pairs", "expected an array of [lambda, eps]");
        s.sweep.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
    } else {
      auto lam = r.nums("lambda"), eps = r.nums("eps");
      if (lam.empty()) lam = {-5, -1, 0, 1, 5, 20};
      if (eps.empty()) eps = {1, 0.3, 0.1, 0.03};
      for (double e : eps)
        for (double l : lam) s.sweep.emplace_back(l, e);
    }
    for (const auto& [l, e] : s.sweep)
      if (!(e > 0) || !std::isfinite(l)) r.fail("eps", "every eps must be positive and every lambda finite");
  }

  if (top.has("solver")) {
    Reader r(top.at("solver"), "solver");
    r.allow_only({"path", "radial_h", "Rmax", "L", "h", "tolerance", "restart", "max_iterations", "source"});
    auto& v = s.solver;
    v.path = r.str("path", v.path);
    if (v.path != "auto" && v.path != "radial" && v.path != "grid3d")
      r.fail("path", "expected 'auto', 'radial' or 'grid3d'");
    v.radial_h = r.num("radial_h", v.radial_h);
    if (r.has("Rmax")) {
      if (r.at("Rmax").is_string()) {
        if (r.at("Rmax").get<std::string>() != "auto") r.fail("Rmax", "expected a number or 'auto'");
      } else {
        v.Rmax = r.num("Rmax", 200);
      }
    }
    v.L = r.num("L", v.L);
    v.h = r.num("h", v.h);
    v.tolerance = r.num("tolerance", v.tolerance);
    v.restart = r.integer("restart", v.restart);
    v.max_iterations = r.integer("max_iterations", v.max_iterations);
    if (!(v.radial_h > 0) || !(v.L > 0) || !(v.h > 0) || !(v.tolerance > 0)) r.fail("", "sizes must be positive");
    if (r.has("source")) {
      Reader q(r.at("source"), "solver.source");
      q.allow_only({"center", "width", "amplitude", "phase", "scale"});
      v.source.center = q.num("center", v.source.center);
      v.source.width = q.num("width", v.source.width);
      v.source.amplitude = q.num("amplitude", v.source.amplitude);
      v.source.phase = q.num("phase", v.source.phase);
      v.source.scale = q.num("scale", v.source.scale);
      if (!(v.source.width > 0) || !(v.source.scale > 0)) q.fail("", "width and scale must be positive");
    }
  }

  if (top.has("norms")) {
    Reader r(top.at("norms"), "norms");
    r.allow_only({"per_octave", "jmin", "input", "field", "sigma"});
    s.norms.per_octave = r.integer("per_octave", s.norms.per_octave);
    s.norms.jmin = r.integer("jmin", s.norms.jmin);
    if (r.has("input")) s.norms.input = r.str("input", "");
    if (r.has("field")) {
      s.norms.field = r.str("field", "");
      if (*s.norms.field != "gaussian") r.fail("field", "only 'gaussian' is available");
    }
    s.norms.sigma = r.num("sigma", s.norms.sigma);
    if (s.norms.per_octave < 4 || s.norms.jmin > 0) r.fail("", "per_octave >= 4 and jmin <= 0 required");
  }

  if (top.has("assertions")) {
    Reader r(top.at("assertions"), "assertions");
    r.allow_only({"slack", "estimates", "auxiliary", "scaling", "scaling_tolerance", "identity_suite",
                  "lemma_suite", "condition_suite", "solver_suite", "solver_suite_quick"});
    auto& a = s.assertions;
    a.slack = r.num("slack", a.slack);
    a.estimates = r.boolean("estimates", a.estimates);
    a.auxiliary = r.boolean("auxiliary", a.auxiliary);
    a.scaling = r.nums("scaling");
    a.scaling_tolerance = r.num("scaling_tolerance", a.scaling_tolerance);
    if (r.has("identity_suite")) a.identity = parse_identity(Reader(r.at("identity_suite"), "assertions.identity_suite"));
    if (r.has("lemma_suite")) a.lemmas = parse_lemmas(Reader(r.at("lemma_suite"), "assertions.lemma_suite"));
    a.condition_suite = r.boolean("condition_suite", false);
    a.solver_suite = r.boolean("solver_suite", false);
    a.solver_suite_quick = r.boolean("solver_suite_quick", false);
    if (a.slack < 0) r.fail("slack", "must be non-negative");
    for (double f : a.scaling)
      if (!(f > 0)) r.fail("scaling", "factors must be positive");
  }
  if (!s.sweep.empty() && !s.has_coefficients) top.fail("sweep", "a sweep needs 'preset' or 'coefficients'");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

// ---- estimates ----------------------------------------------------------------

cd SourceSpec::value(double r) const {
  const double u = (scale * r - center) / width;
  return scale * scale * amplitude * std::polar(1.0, phase) * std::exp(-u * u);
}

EstimateConstants constants_from(const ConditionReport& r) {
  EstimateConstants k;
  k.n = r.n;
  k.N = r.N;
  k.nu = r.nu;
  k.Cplus = r.Cplus.value();
  k.Cminus = r.Cminus.value();
  k.Ca = r.Ca.value();
  k.M0 = r.M0.value_or(std::numeric_limits<double>::quiet_NaN());
  return k;
}

namespace {

InequalityCheck make_check(std::string name, double lhs, double rhs, double slack) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = std::isfinite(lhs) && lhs <= (1 + slack) * rhs;
  return c;
}

}  // namespace

std::vector<InequalityCheck> estimate_checks(Mode mode, const EstimateConstants& k, const FieldNorms& m,
                                             double lambda, double eps, double slack) {
  std::vector<InequalityCheck> out;
  const double n = k.n;
  if (mode == Mode::homogeneous) {
    const double f2 = m.f.Ydot_dual * m.f.Ydot_dual, v2 = m.v.Ydot * m.v.Ydot;
    out.push_back(make_check("main_estimate", m.v.Xdot * m.v.Xdot + m.grad.Ydot * m.grad.Ydot, k.M0 * f2, slack));
    out.push_back(make_check("lambda_estimate", std::abs(lambda) * v2,
                             2 * n * n * (k.nu + 1) * (k.nu + 1) * k.M0 * f2, slack));
    out.push_back(make_check("eps_estimate", std::abs(eps) * v2, 9 * (k.nu + 1) * k.M0 * f2, slack));
  } else {
    const double f2 = m.f.Y_dual * m.f.Y_dual, v2 = m.v.Y * m.v.Y, cp = k.Cplus * k.Cplus + 1;
    out.push_back(make_check("main_estimate", m.v.X * m.v.X + m.grad.Y * m.grad.Y, 1e9 * cp * f2, slack));
    out.push_back(make_check("lambda_estimate", std::abs(lambda) * v2, 1e10 * cp * cp * f2, slack));
    out.push_back(make_check("eps_estimate", std::abs(eps) * v2, 1e10 * cp * f2, slack));
  }
  return out;
}

std::vector<InequalityCheck> auxiliary_checks(Mode mode, const EstimateConstants& k, const FieldNorms& m,
                                              double lambda, double eps, double slack) {
  std::vector<InequalityCheck> out;
  const double n = k.n, N = k.N, Ca = k.Ca, Cp2 = k.Cplus * k.Cplus, Cm2 = k.Cminus * k.Cminus;
  const double lp = std::max(lambda, 0.0), lm = std::max(-lambda, 0.0);
  if (mode == Mode::homogeneous) {
    const double v2 = m.v.Ydot * m.v.Ydot, x = m.v.Xdot, g = m.grad.Ydot, f = m.f.Ydot_dual;
    out.push_back(make_check("aux_eps", std::abs(eps) * v2, 3 * (1 + N) * (f + g) * x, slack));
    if (lambda >= 0)
      out.push_back(make_check("aux_lambda_pos", lp * v2,
                               2 * N * g * g + 4 * (Cp2 + N * (n + 1) + n * n * Ca + 1) * x * x + f * f, slack));
    else
      out.push_back(make_check("aux_lambda_neg", lm * v2, 2 * (Cm2 + N + n * n * Ca + 1) * x * x + f * f, slack));
  } else {
    const double v2 = m.v.Y * m.v.Y, x = m.v.X, g = m.grad.Y, f = m.f.Y_dual;
    out.push_back(make_check("aux_eps", std::abs(eps) * v2, std::sqrt(5.0) * x * f + 6 * N * x * g, slack));
    if (lambda >= 0)
      out.push_back(make_check("aux_lambda_pos", lp * v2,
                               3 * (N + 6 * Cp2) * g * g + 3 * (N * (n + 1) + n * n * Ca + 3 * Cp2) * x * x + f * f,
                               slack));
    else
      out.push_back(make_check("aux_lambda_neg", lm * v2,
                               18 * Cm2 * g * g + 3 * (N + n * n * Ca + 6 * Cm2 + 1) * x * x + f * f, slack));
  }
  return out;
}

bool EstimateRecord::pass() const {
  if (!error.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const InequalityCheck* EstimateRecord::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

bool use_radial(const Scenario& s) {
  if (s.solver.path == "radial") {
    if (!s.coeffs.radial) throw ConfigError("field 'solver.path': coefficients are not radial");
    return true;
  }
  if (s.solver.path == "grid3d") return false;
  if (s.coeffs.radial) return true;
  if (s.coeffs.n != 3) throw ConfigError("non-radial coefficients need n = 3 for the grid solver");
  return false;
}

}  // namespace

SolveResult solve_point(const Scenario& s, double lambda, double eps, double* Rmax_used) {
  const double r0 = s.domain.kind() == DomainSpec::Kind::ball ? s.domain.r0() : 0.0;
  const SourceSpec src = s.solver.source;
  if (use_radial(s)) {
    RadialSolveSpec spec;
    spec.n = s.coeffs.n;
    spec.r0 = r0;
    spec.Rmax = s.solver.Rmax.value_or(auto_rmax(lambda, eps));
    spec.m = static_cast<int>(std::ceil((spec.Rmax - r0) / s.solver.radial_h)) + 1;
    spec.alpha = s.coeffs.radial->alpha;
    spec.c = s.coeffs.radial->c;
    spec.lambda = lambda;
    spec.eps = eps;
    spec.f = [src](double r) { return src.value(r); };
    if (Rmax_used) *Rmax_used = spec.Rmax;
    return solve_radial(spec);
  }
  Grid3DSolveSpec spec;
  spec.L = s.solver.L;
  spec.h = s.solver.h;
  spec.coeffs = s.coeffs;
  spec.obstacle_r0 = r0;
  spec.lambda = lambda;
  spec.eps = eps;
  spec.tolerance = s.solver.tolerance;
  spec.restart = s.solver.restart;
  spec.max_iterations = s.solver.max_iterations;
  spec.f = [src](const Point& x) { return src.value(norm(x)); };
  if (Rmax_used) *Rmax_used = s.solver.L;
  SolveResult r = solve_3d(spec);
  const double ind = truncation_indicator(lambda, eps, s.solver.L);
  if (ind < 5.0) {
    std::ostringstream os;
    os << "truncation indicator " << ind << " < 5 at L = " << s.solver.L;
    r.truncation_warning = os.str();
  }
  return r;
}

FieldNorms measure(const Scenario& s, const SolveResult& r) {
  const int n = r.radial ? r.radial->n : 3;
  ShellFn shells;
  double extent = 0;
  if (r.radial) {
    shells = radial_field_shells(*r.radial);
    extent = r.radial->rmax();
  } else if (r.grid) {
    shells = grid_field_shells(*r.grid, s.has_coefficients ? s.coeffs.b : VectorField::zero(3));
    extent = r.grid->L * std::sqrt(3.0);
  } else {
    throw FormatError("solve result holds no field");
  }
  const SourceSpec src = s.solver.source;
  const double src_extent = (src.center + 12 * src.width) / src.scale;
  const ShellGrid grid = shell_grid_for_extent(std::max(extent, src_extent), s.norms.per_octave, s.norms.jmin);
  const auto P = compute_profiles(grid, kFieldChannels, shells, n);
  FieldNorms m;
  m.v = norm_bundle(P[kV2], true);
  m.grad = norm_bundle(P[kG2], true);
  const double r0 = s.domain.kind() == DomainSpec::Kind::ball ? s.domain.r0() : 0.0;
  const ShellFn fsh = radial_shells(
      n, [src, r0](double rho, double* out) { out[0] = rho < r0 ? 0.0 : std::norm(src.value(rho)); }, 1);
  const auto F = compute_profiles(grid, 1, fsh, n);
  m.f = norm_bundle(F[0]);
  return m;
}

EstimateRecord evaluate_point(const Scenario& s, const EstimateConstants& k, double lambda, double eps) {
  EstimateRecord rec;
  rec.lambda = lambda;
  rec.eps = eps;
  try {
    rec.path = use_radial(s) ? "radial" : "grid3d";
    const SolveResult r = solve_point(s, lambda, eps, &rec.Rmax);
    rec.iterations = r.iterations;
    rec.relative_residual = r.relative_residual;
    rec.truncation_warning = r.truncation_warning.value_or("");
    rec.norms = measure(s, r);
    const double slack = s.assertions.slack;
    if (s.assertions.estimates)
      for (auto& c : estimate_checks(s.mode, k, rec.norms, lambda, eps, slack)) rec.checks.push_back(c);
    if (s.assertions.auxiliary)
      for (auto& c : auxiliary_checks(s.mode, k, rec.norms, lambda, eps, slack)) rec.checks.push_back(c);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

double ScalingCheck::relative_change() const {
  const double d = std::max(std::abs(base_ratio), std::abs(scaled_ratio));
  return d > 0 ? std::abs(scaled_ratio - base_ratio) / d : 0.0;
}

std::vector<ScalingCheck> scaling_checks(const Scenario& s, const EstimateConstants& k) {
  std::vector<ScalingCheck> out;
  auto ratio = [&](const Scenario& sc, double l, double e) {
    const FieldNorms m = measure(sc, solve_point(sc, l, e));
    return estimate_checks(sc.mode, k, m, l, e, 0.0)[0].ratio();
  };
  for (const auto& [l, e] : s.sweep) {
    const double base = ratio(s, l, e);
    for (double f : s.assertions.scaling) {
      Scenario sc = s;
      sc.solver.source.scale *= f;
      if (sc.solver.Rmax) *sc.solver.Rmax /= f;
      ScalingCheck c;
      c.s = f;
      c.lambda = l;
      c.eps = e;
      c.base_ratio = base;
      c.scaled_ratio = ratio(sc, f * f * l, f * f * e);
      out.push_back(c);
    }
  }
  return out;
}

// ---- orchestration ------------------------------------------------------------

ScenarioReport run_scenario(Scenario s, const RunOptions& opt) {
  if (opt.seed) {
    s.seed = *opt.seed;
    if (s.assertions.identity) s.assertions.identity->seed = *opt.seed;
    if (s.assertions.lemmas) s.assertions.lemmas->seed = *opt.seed;
  }
  ScenarioReport rep;
  rep.scenario = s;
  rep.forced = opt.force;
  bool ok = true;
  const bool want_conditions = opt.stage != Stage::identity;
  const bool want_estimates = opt.stage == Stage::estimates || opt.stage == Stage::all;

  if (want_conditions && s.has_coefficients) {
    rep.conditions = certify(s.coeffs, s.domain, s.mode);
    if (!rep.conditions->pass()) {
      ok = false;
      std::ostringstream os;
      os << (rep.conditions->trapped ? "Trapped" : "ConditionsFailed") << ":";
      for (const auto& r : rep.conditions->records)
        if (r.gating && !r.pass) os << " [" << r.name << ": " << r.measured << " vs " << r.threshold << "]";
      rep.diagnostics.push_back(os.str());
    }
  }

  if (opt.stage == Stage::identity || opt.stage == Stage::all) {
    if (s.assertions.identity || opt.stage == Stage::identity) {
      IdentitySuiteOptions io = s.assertions.identity.value_or(IdentitySuiteOptions{});
      if (!s.assertions.identity) io.seed = s.seed;
      rep.identity = identity_suite(io);
      ok = ok && rep.identity->pass();
    }
  }

  if (opt.stage == Stage::all) {
    if (s.assertions.lemmas) {
      try {
        rep.lemmas = lemma_suite(*s.assertions.lemmas);
        ok = ok && rep.lemmas->pass();
      } catch (const Error& e) {
        rep.diagnostics.push_back(e.what());
        ok = false;
      }
    }
    if (s.assertions.condition_suite) {
      rep.condition_items = condition_suite();
      for (const auto& i : rep.condition_items) ok = ok && i.pass;
    }
    if (s.assertions.solver_suite) {
      rep.solver_items = solver_suite(s.assertions.solver_suite_quick);
      for (const auto& i : rep.solver_items) ok = ok && i.pass;
    }
  }

  if (want_estimates && !s.sweep.empty()) {
    const bool blocked = rep.conditions && !rep.conditions->pass() && !opt.force;
    if (blocked) {
      rep.diagnostics.push_back("ConditionsFailed: sweep skipped (use --force to run anyway)");
    } else {
      const EstimateConstants k = constants_from(*rep.conditions);
      if (s.mode == Mode::homogeneous && !std::isfinite(k.M0) && s.assertions.estimates)
        rep.diagnostics.push_back("M0 is undefined for these coefficients; homogeneous estimates cannot pass");
      for (const auto& [l, e] : s.sweep) {
        rep.records.push_back(evaluate_point(s, k, l, e));
        ok = ok && rep.records.back().pass();
      }
      if (!s.assertions.scaling.empty()) {
        try {
          rep.scaling = scaling_checks(s, k);
          for (const auto& c : rep.scaling) ok = ok && c.pass(s.assertions.scaling_tolerance);
        } catch (const Error& e) {
          rep.diagnostics.push_back(e.what());
          ok = false;
        }
      }
    }
  }
  rep.pass = ok;
  return rep;
}

// ---- reports --------------------------------------------------------------

namespace {

Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json sup_json(const SupEstimate& s) {
  Json j;
  j["value"] = num(s.value());
  j["divergent"] = s.divergent;
  j["refinement_change"] = num(s.refinement_change);
  j["argmax"] = s.argmax;
  return j;
}

Json check_json(const InequalityCheck& c) {
  Json j;
  j["name"] = c.name;
  j["lhs"] = num(c.lhs);
  j["rhs"] = num(c.rhs);
  j["ratio"] = num(c.ratio());
  j["pass"] = c.pass;
  return j;
}

Json items_json(const std::vector<SuiteItem>& items) {
  Json a = Json::array();
  for (const auto& i : items) {
    Json j;
    j["name"] = i.name;
    j["value"] = num(i.value);
    j["target"] = num(i.target);
    j["pass"] = i.pass;
    if (!i.detail.empty()) j["detail"] = i.detail;
    a.push_back(j);
  }
  return a;
}

}  // namespace

Json to_json(const NormBundle& b) {
  Json j;
  j["Xdot"] = num(b.Xdot);
  j["X"] = num(b.X);
  j["Ydot"] = num(b.Ydot);
  j["Y"] = num(b.Y);
  j["Ydot_dual"] = num(b.Ydot_dual);
  j["Y_dual"] = num(b.Y_dual);
  j["Xdot_dual"] = num(b.Xdot_dual);
  j["X_dual"] = num(b.X_dual);
  j["argmax_Xdot"] = num(b.argmax_Xdot);
  j["argmax_X"] = num(b.argmax_X);
  j["argmax_Ydot"] = num(b.argmax_Ydot);
  j["argmax_Y"] = num(b.argmax_Y);
  return j;
}

Json to_json(const ConditionReport& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  j["n"] = r.n;
  j["delta"] = r.delta;
  j["N"] = num(r.N);
  j["nu"] = num(r.nu);
  j["matrix_norm"] = r.matrix_norm;
  j["cloud_points"] = r.cloud_points;
  Json c;
  c["Ca"] = sup_json(r.Ca);
  c["Cb"] = sup_json(r.Cb);
  c["C_minus"] = sup_json(r.Cminus);
  c["C_plus"] = sup_json(r.Cplus);
  c["Cc"] = sup_json(r.Cc);
  c["CI"] = sup_json(r.CI);
  j["constants"] = c;
  j["caseA_min"] = num(r.caseA_min);
  j["caseA_argmin"] = r.caseA_argmin;
  j["K0"] = r.K0 ? num(*r.K0) : Json();
  j["K"] = r.K ? num(*r.K) : Json();
  j["M0"] = r.M0 ? num(*r.M0) : Json();
  j["trapped"] = r.trapped;
  Json recs = Json::array();
  for (const auto& x : r.records) {
    Json e;
    e["name"] = x.name;
    e["measured"] = num(x.measured);
    e["threshold"] = num(x.threshold);
    e["strict"] = x.strict;
    e["gating"] = x.gating;
    e["pass"] = x.pass;
    e["boundary"] = x.boundary;
    if (!x.argmax.empty()) e["argmax"] = x.argmax;
    if (!x.note.empty()) e["note"] = x.note;
    recs.push_back(e);
  }
  j["records"] = recs;
  j["pass"] = r.pass();
  return j;
}

Json to_json(const ScenarioReport& r) {
  Json j;
  const Scenario& s = r.scenario;
  j["scenario"] = s.name;
  j["preset"] = s.preset;
  j["n"] = s.has_coefficients ? s.coeffs.n : 3;
  j["mode"] = to_string(s.mode);
  j["domain"] = s.domain.kind() == DomainSpec::Kind::ball ? Json{{"kind", "ball"}, {"r0", s.domain.r0()}}
                                                         : Json{{"kind", "whole-space"}};
  j["seed"] = s.seed;
  j["forced"] = r.forced;
  if (r.conditions) j["conditions"] = to_json(*r.conditions);
  if (r.identity) {
    const auto& i = *r.identity;
    j["identity_suite"] = {{"evaluations", i.evaluations},
                           {"oracle_evaluations", i.oracle_evaluations},
                           {"worst_general_first", num(i.worst_general_first)},
                           {"worst_general_second", num(i.worst_general_second)},
                           {"worst_helmholtz_first", num(i.worst_helmholtz_first)},
                           {"worst_helmholtz_second", num(i.worst_helmholtz_second)},
                           {"worst_oracle", num(i.worst_oracle)},
                           {"pass", i.pass()}};
  }
  if (r.lemmas) {
    Json items = Json::array();
    for (const auto& i : r.lemmas->items)
      items.push_back({{"name", i.name},
                       {"setting", i.setting},
                       {"trials", i.trials},
                       {"violations", i.violations},
                       {"worst_ratio", num(i.worst_ratio)},
                       {"pass", i.pass()}});
    j["lemma_suite"] = {{"n", r.lemmas->n}, {"slack", r.lemmas->slack}, {"items", items}, {"pass", r.lemmas->pass()}};
  }
  if (!r.condition_items.empty()) j["condition_suite"] = items_json(r.condition_items);
  if (!r.solver_items.empty()) j["solver_suite"] = items_json(r.solver_items);
  if (!r.records.empty()) {
    Json recs = Json::array();
    double worst_main = 0;
    for (const auto& x : r.records) {
      Json e;
      e["lambda"] = x.lambda;
      e["eps"] = x.eps;
      e["path"] = x.path;
      e["iterations"] = x.iterations;
      e["relative_residual"] = num(x.relative_residual);
      e["Rmax"] = num(x.Rmax);
      if (!x.truncation_warning.empty()) e["truncation_warning"] = x.truncation_warning;
      if (!x.error.empty()) {
        e["error"] = x.error;
      } else {
        e["norms"] = {{"v", to_json(x.norms.v)}, {"grad_b_v", to_json(x.norms.grad)}, {"f", to_json(x.norms.f)}};
        Json cs = Json::array();
        for (const auto& c : x.checks) {
          cs.push_back(check_json(c));
          if (c.name == "main_estimate") worst_main = std::max(worst_main, c.ratio());
        }
        e["checks"] = cs;
      }
      e["pass"] = x.pass();
      recs.push_back(e);
    }
    j["records"] = recs;
    j["summary"] = {{"records", r.records.size()}, {"max_main_ratio", num(worst_main)}};
  }
  if (!r.scaling.empty()) {
    Json sc = Json::array();
    for (const auto& c : r.scaling)
      sc.push_back({{"s", c.s},
                    {"lambda", c.lambda},
                    {"eps", c.eps},
                    {"base_ratio", num(c.base_ratio)},
                    {"scaled_ratio", num(c.scaled_ratio)},
                    {"relative_change", num(c.relative_change())},
                    {"pass", c.pass(s.assertions.scaling_tolerance)}});
    j["scaling"] = sc;
  }
  j["diagnostics"] = r.diagnostics;
  j["pass"] = r.pass;
  return j;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "scenario",     "preset",        "mode",           "n",
      "lambda",       "eps",           "path",           "iterations",
      "relative_residual", "Rmax",     "truncation_warning", "v_Xdot",
      "v_X",          "v_Ydot",        "v_Y",            "grad_Ydot",
      "grad_Y",       "f_Ydot_dual",   "f_Y_dual",       "N",
      "nu",           "C_plus",        "C_minus",        "C_a",
      "M0",           "main_lhs",      "main_rhs",       "main_ratio",
      "lambda_lhs",   "lambda_rhs",    "lambda_ratio",   "eps_lhs",
      "eps_rhs",      "eps_ratio",     "aux_eps_lhs",    "aux_eps_rhs",
      "aux_lambda_name", "aux_lambda_lhs", "aux_lambda_rhs", "pass",
      "error"};
  return cols;
}

std::string csv_header() {
  std::string h;
  for (const auto& c : csv_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::vector<std::string> csv_rows(const ScenarioReport& r) {
  std::vector<std::string> rows;
  const Scenario& s = r.scenario;
  EstimateConstants k;
  if (r.conditions) k = constants_from(*r.conditions);
  for (const auto& x : r.records) {
    std::vector<std::string> f;
    f.push_back(quote(s.name));
    f.push_back(s.preset);
    f.push_back(to_string(s.mode));
    f.push_back(std::to_string(s.coeffs.n));
    f.push_back(fmt(x.lambda));
    f.push_back(fmt(x.eps));
    f.push_back(x.path);
    f.push_back(std::to_string(x.iterations));
    f.push_back(fmt(x.relative_residual));
    f.push_back(fmt(x.Rmax));
    f.push_back(quote(x.truncation_warning));
    const auto& m = x.norms;
    for (double v : {m.v.Xdot, m.v.X, m.v.Ydot, m.v.Y, m.grad.Ydot, m.grad.Y, m.f.Ydot_dual, m.f.Y_dual})
      f.push_back(x.error.empty() ? fmt(v) : "");
    for (double v : {k.N, k.nu, k.Cplus, k.Cminus, k.Ca, k.M0}) f.push_back(fmt(v));
    for (const char* name : {"main_estimate", "lambda_estimate", "eps_estimate"}) {
      const InequalityCheck* c = x.find(name);
      f.push_back(c ? fmt(c->lhs) : "");
      f.push_back(c ? fmt(c->rhs) : "");
      f.push_back(c ? fmt(c->ratio()) : "");
    }
    const InequalityCheck* ae = x.find("aux_eps");
    f.push_back(ae ? fmt(ae->lhs) : "");
    f.push_back(ae ? fmt(ae->rhs) : "");
    const InequalityCheck* al = x.find("aux_lambda_pos");
    if (!al) al = x.find("aux_lambda_neg");
    f.push_back(al ? al->name : "");
    f.push_back(al ? fmt(al->lhs) : "");
    f.push_back(al ? fmt(al->rhs) : "");
    f.push_back(x.pass() ? "1" : "0");
    f.push_back(quote(x.error));
    std::string row;
    for (const auto& e : f) row += (row.empty() && &e == &f.front() ? "" : ",") + e;
    rows.push_back(row);
  }
  return rows;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + tmp + " for writing");
    os << content;
    if (!os) throw FormatError("write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace helmest
