// helmest command-line entry point.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "helmest/harness.hpp"

using namespace helmest;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "helmest-out";
  bool force = false;
  bool json = false;
};

Scenario load(const Globals& g) {
  if (g.config.empty()) return parse_scenario(Json::object());
  return load_scenario(g.config);
}

std::string join(const std::string& dir, const std::string& file) { return (std::filesystem::path(dir) / file).string(); }

void print_summary(const ScenarioReport& r) {
  std::cout << "scenario " << r.scenario.name << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
  if (r.conditions) std::cout << "  conditions: " << (r.conditions->pass() ? "certified" : "not certified") << "\n";
  if (r.identity) std::cout << "  identity suite: " << (r.identity->pass() ? "pass" : "fail") << "\n";
  if (r.lemmas) std::cout << "  lemma suite: " << (r.lemmas->pass() ? "pass" : "fail") << "\n";
  for (const auto& i : r.condition_items)
    std::cout << "  " << i.name << ": " << i.value << (i.pass ? " ok" : " FAILED") << "\n";
  for (const auto& i : r.solver_items)
    std::cout << "  " << i.name << ": " << i.value << (i.pass ? " ok" : " FAILED") << "\n";
  if (!r.records.empty()) {
    int failed = 0;
    double worst = 0;
    for (const auto& x : r.records) {
      failed += x.pass() ? 0 : 1;
      if (const auto* c = x.find("main_estimate")) worst = std::max(worst, c->ratio());
    }
    std::cout << "  records: " << r.records.size() << ", failed " << failed << ", max main ratio " << worst << "\n";
  }
  for (const auto& d : r.diagnostics) std::cout << "  " << d << "\n";
}

int emit_report(const Globals& g, const ScenarioReport& r) {
  const Json j = to_json(r);
  write_atomic(join(g.out, "report.json"), j.dump(2) + "\n");
  if (!r.records.empty()) {
    std::string csv = csv_header() + "\n";
    for (const auto& row : csv_rows(r)) csv += row + "\n";
    write_atomic(join(g.out, "records.csv"), csv);
  }
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else
    print_summary(r);
  return r.pass ? 0 : 1;
}

struct IdentityFlags {
  std::optional<int> trials;
  std::optional<double> margin;
  std::string preset;
};

int run_stage(const Globals& g, Stage stage, const IdentityFlags& idf = {}) {
  Scenario s = load(g);
  if (stage == Stage::identity) {
    IdentitySuiteOptions io = s.assertions.identity.value_or(IdentitySuiteOptions{});
    if (!s.assertions.identity) io.seed = s.seed;
    if (idf.trials) io.draws = *idf.trials;
    if (idf.margin) io.margin = *idf.margin;
    if (!idf.preset.empty()) {
      io.coefficients = make_preset(idf.preset);
      io.n = io.coefficients->n;
    }
    if (io.draws < 1) throw ConfigError("option '--trials': must be at least 1");
    if (!(io.margin >= 0 && io.margin < 0.5)) throw ConfigError("option '--surface-margin': must lie in [0, 0.5)");
    s.assertions.identity = io;
  }
  if ((stage == Stage::conditions || stage == Stage::estimates) && !s.has_coefficients)
    throw ConfigError("field 'preset': this subcommand needs 'preset' or 'coefficients'");
  if (stage == Stage::estimates && s.sweep.empty()) throw ConfigError("field 'sweep': no (lambda, eps) pairs");
  RunOptions o;
  o.force = g.force;
  o.seed = g.seed;
  o.stage = stage;
  return emit_report(g, run_scenario(s, o));
}

int cmd_solve(const Globals& g) {
  const Scenario s = load(g);
  if (!s.has_coefficients) throw ConfigError("field 'preset': solve needs 'preset' or 'coefficients'");
  if (s.sweep.empty()) throw ConfigError("field 'sweep': no (lambda, eps) pairs");
  Json summary = Json::array();
  int k = 0;
  for (const auto& [l, e] : s.sweep) {
    double Rmax = 0;
    const SolveResult r = solve_point(s, l, e, &Rmax);
    const std::string file = "field_" + std::to_string(k++) + ".bin";
    std::filesystem::create_directories(g.out);
    write_field_file(join(g.out, file), r, s.preset, l, e);
    Json j;
    j["file"] = file;
    j["lambda"] = l;
    j["eps"] = e;
    j["kind"] = r.radial ? "radial" : "grid3d";
    j["iterations"] = r.iterations;
    j["relative_residual"] = r.relative_residual;
    j["extent"] = Rmax;
    if (r.truncation_warning) j["truncation_warning"] = *r.truncation_warning;
    summary.push_back(j);
  }
  const Json doc = {{"scenario", s.name}, {"preset", s.preset}, {"fields", summary}};
  write_atomic(join(g.out, "solve.json"), doc.dump(2) + "\n");
  if (g.json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << "wrote " << summary.size() << " field file(s) to " << g.out << "\n";
  return 0;
}

int cmd_norms(const Globals& g) {
  const Scenario s = load(g);
  Json row;
  if (s.norms.input) {
    FieldFileHeader h;
    const SolveResult r = read_field_file(*s.norms.input, &h);
    Scenario sc = s;
    if (r.grid && !sc.has_coefficients) sc.coeffs = identity_preset(3);
    const FieldNorms m = measure(sc, r);
    row["input"] = *s.norms.input;
    row["kind"] = h.kind;
    row["lambda"] = h.lambda;
    row["eps"] = h.eps;
    row["v"] = to_json(m.v);
    row["grad_b_v"] = to_json(m.grad);
  } else if (s.norms.field) {
    const int n = s.has_coefficients ? s.coeffs.n : 3;
    const TestFunction v = TestFunction::gaussian(n, s.norms.sigma);
    const VectorField b = s.has_coefficients ? s.coeffs.b : VectorField::zero(n);
    const ShellGrid grid = shell_grid_for_extent(12 * s.norms.sigma, s.norms.per_octave, s.norms.jmin);
    const auto P = compute_profiles(grid, kFieldChannels, test_function_shells(v, b), n);
    row["input"] = *s.norms.field;
    row["sigma"] = s.norms.sigma;
    row["v"] = to_json(norm_bundle(P[kV2]));
    row["grad_b_v"] = to_json(norm_bundle(P[kG2], true));
  } else {
    throw ConfigError("field 'norms': give 'input' (field file) or 'field'");
  }
  std::filesystem::create_directories(g.out);
  const std::string csv = join(g.out, "norms.csv");
  const bool fresh = !std::filesystem::exists(csv);
  std::ofstream os(csv, std::ios::app);
  if (fresh) os << "input,v_Xdot,v_X,v_Ydot,v_Y,v_Ydot_dual,v_Y_dual,grad_Ydot,grad_Y\n";
  auto f = [](const Json& x) { return x.is_number() ? std::to_string(x.get<double>()) : x.get<std::string>(); };
  os << row["input"].get<std::string>() << "," << f(row["v"]["Xdot"]) << "," << f(row["v"]["X"]) << ","
     << f(row["v"]["Ydot"]) << "," << f(row["v"]["Y"]) << "," << f(row["v"]["Ydot_dual"]) << ","
     << f(row["v"]["Y_dual"]) << "," << f(row["grad_b_v"]["Ydot"]) << "," << f(row["grad_b_v"]["Y"]) << "\n";
  std::cout << row.dump(g.json ? 2 : -1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Helmholtz resolvent estimate laboratory"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "scenario JSON file");
  auto* seed_opt = app.add_option("--seed", seed, "override every seed in the scenario");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_flag("--force", g.force, "run the sweep even if the conditions are not certified");
  app.add_flag("--json", g.json, "print the JSON report to stdout");

  auto* c1 = app.add_subcommand("check-conditions", "certify the hypotheses for the configured coefficients");
  auto* c2 = app.add_subcommand("verify-identity", "multiplier identity suite");
  IdentityFlags idf;
  int trials = 0;
  double margin = 0;
  auto* trials_opt = c2->add_option("--trials", trials, "coefficient draws (overrides identity_suite.draws)");
  auto* margin_opt =
      c2->add_option("--surface-margin", margin, "relative band excluded around the weight's spheres");
  c2->add_option("--preset", idf.preset, "fixed preset coefficients for every draw (V = c)");
  auto* c3 = app.add_subcommand("norms", "norm bundle of a field file or an analytic field");
  auto* c4 = app.add_subcommand("solve", "solve the sweep and write field files");
  auto* c5 = app.add_subcommand("verify-estimate", "conditions, sweep and estimate checks");
  auto* c6 = app.add_subcommand("run", "every stage configured in the scenario");
  for (auto* c : {c1, c2, c3, c4, c5, c6}) c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;
  if (*trials_opt) idf.trials = trials;
  if (*margin_opt) idf.margin = margin;

  try {
    if (*c1) return run_stage(g, Stage::conditions);
    if (*c2) return run_stage(g, Stage::identity, idf);
    if (*c3) return cmd_norms(g);
    if (*c4) return cmd_solve(g);
    if (*c5) return run_stage(g, Stage::estimates);
    if (*c6) return run_stage(g, Stage::all);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 1;
}
