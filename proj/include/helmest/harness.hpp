#pragma once

// Scenario configuration, verification stages and report emission.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "helmest/conditions.hpp"
#include "helmest/lemmas.hpp"
#include "helmest/multiplier.hpp"
#include "helmest/norms.hpp"
#include "helmest/presets.hpp"
#include "helmest/solver.hpp"
#include "json.hpp"

namespace helmest {

using Json = nlohmann::ordered_json;

// Radial ring source f(r) = s^2 amp e^{i phase} exp(-((s r - center) / width)^2).
// `scale` = s realizes the rescaling f_s(x) = s^2 f(s x).
struct SourceSpec {
  double center = 2.0;
  double width = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;
  double scale = 1.0;
  cd value(double r) const;
};

struct SolverSettings {
  std::string path = "auto";  // auto | radial | grid3d
  double radial_h = 0.01;
  std::optional<double> Rmax;  // unset: auto_rmax(lambda, eps)
  double L = 8.0;
  double h = 0.25;
  double tolerance = 1e-8;
  int restart = 40;
  int max_iterations = 0;
  SourceSpec source;
};

struct NormSettings {
  int per_octave = 20;
  int jmin = -10;
  // `norms` subcommand: a solver output file, or a named analytic field.
  std::optional<std::string> input;
  std::optional<std::string> field;  // "gaussian"
  double sigma = 1.0;
};

struct AssertionSettings {
  double slack = 0.02;
  bool estimates = true;
  bool auxiliary = true;
  std::vector<double> scaling;  // rescaling factors s for the scaling sanity check
  double scaling_tolerance = 0.02;
  std::optional<IdentitySuiteOptions> identity;
  std::optional<LemmaSuiteOptions> lemmas;
  bool condition_suite = false;
  bool solver_suite = false;
  bool solver_suite_quick = false;  // coarser grids, for unit tests
};

struct Scenario {
  std::string name = "scenario";
  std::string preset = "custom";
  bool has_coefficients = false;
  CoefficientSet coeffs;
  DomainSpec domain;
  Mode mode = Mode::homogeneous;
  std::vector<std::pair<double, double>> sweep;  // (lambda, eps)
  SolverSettings solver;
  NormSettings norms;
  AssertionSettings assertions;
  std::uint64_t seed = 1;
};

// Throws ConfigError naming the offending field.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);

struct InequalityCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  bool pass = false;
  double ratio() const { return rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0.0); }
};

// Constants the estimates depend on, taken from the condition report.
struct EstimateConstants {
  int n = 3;
  double N = 1, nu = 1, Cplus = 0, Cminus = 0, Ca = 0;
  double M0 = 0;
};
EstimateConstants constants_from(const ConditionReport& r);

// Norms that enter the estimates, in the family of the mode.
struct FieldNorms {
  NormBundle v, grad, f;
};

std::vector<InequalityCheck> estimate_checks(Mode mode, const EstimateConstants& k, const FieldNorms& m,
                                             double lambda, double eps, double slack);
std::vector<InequalityCheck> auxiliary_checks(Mode mode, const EstimateConstants& k, const FieldNorms& m,
                                              double lambda, double eps, double slack);

struct EstimateRecord {
  double lambda = 0, eps = 0;
  std::string path;
  int iterations = 0;
  double relative_residual = 0;
  std::string truncation_warning;
  double Rmax = 0;
  FieldNorms norms;
  std::vector<InequalityCheck> checks;
  std::string error;
  bool pass() const;
  const InequalityCheck* find(const std::string& name) const;
};

// Solves one (lambda, eps) point and returns the field.
SolveResult solve_point(const Scenario& s, double lambda, double eps, double* Rmax_used = nullptr);
// Norms of v, grad^b v and f for a solved point.
FieldNorms measure(const Scenario& s, const SolveResult& r);
EstimateRecord evaluate_point(const Scenario& s, const EstimateConstants& k, double lambda, double eps);

struct ScalingCheck {
  double s = 1, lambda = 0, eps = 0;
  double base_ratio = 0, scaled_ratio = 0;
  double relative_change() const;
  bool pass(double tol) const { return relative_change() <= tol; }
};
std::vector<ScalingCheck> scaling_checks(const Scenario& s, const EstimateConstants& k);

// Named pass/fail items of the condition-checker acceptance suite.
struct SuiteItem {
  std::string name;
  double value = 0;
  double target = 0;
  bool pass = false;
  std::string detail;
};
std::vector<SuiteItem> condition_suite();
std::vector<SuiteItem> solver_suite(bool quick = false);

struct ScenarioReport {
  Scenario scenario;
  std::optional<ConditionReport> conditions;
  std::vector<EstimateRecord> records;
  std::vector<ScalingCheck> scaling;
  std::optional<IdentitySuiteReport> identity;
  std::optional<LemmaReport> lemmas;
  std::vector<SuiteItem> condition_items;
  std::vector<SuiteItem> solver_items;
  std::vector<std::string> diagnostics;
  bool forced = false;
  bool pass = false;
};

enum class Stage { conditions, identity, estimates, all };

struct RunOptions {
  bool force = false;
  std::optional<std::uint64_t> seed;
  Stage stage = Stage::all;
};

ScenarioReport run_scenario(Scenario s, const RunOptions& opt = {});

Json to_json(const ConditionReport& r);
Json to_json(const ScenarioReport& r);
Json to_json(const NormBundle& b);

// CSV with one row per record; columns are frozen, new ones go at the end.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::vector<std::string> csv_rows(const ScenarioReport& r);

// Write-temp-then-rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace helmest
