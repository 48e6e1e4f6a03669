// Runs the bundled scenarios and prints one PASS/FAIL line per acceptance criterion.
// Exit status is 0 only if every criterion passes.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "helmest/harness.hpp"

using namespace helmest;

namespace {

std::string scenario_path(const std::string& rel) { return std::string(HELMEST_SOURCE_DIR) + "/scenarios/" + rel; }

struct Timed {
  ScenarioReport report;
  double seconds = 0;
};

Timed run(const std::string& rel) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.report = run_scenario(load_scenario(scenario_path(rel)));
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

int failures = 0;

void line(int k, bool pass, const std::string& detail) {
  std::cout << "criterion " << k << " " << (pass ? "PASS" : "FAIL") << " " << detail << std::endl;
  if (!pass) ++failures;
}

bool is_aux(const std::string& name) { return name.rfind("aux_", 0) == 0; }

// Estimate checks (non-auxiliary) over a set of records: all pass, plus the worst ratio.
struct Tally {
  int records = 0, failed = 0, errors = 0;
  double worst = 0;
  std::string worst_name;
  void add(const std::vector<EstimateRecord>& rs, bool aux) {
    for (const auto& r : rs) {
      ++records;
      if (!r.error.empty()) {
        ++errors;
        ++failed;
        continue;
      }
      bool ok = true;
      for (const auto& c : r.checks) {
        if (is_aux(c.name) != aux) continue;
        ok = ok && c.pass;
        if (c.ratio() > worst) {
          worst = c.ratio();
          std::ostringstream os;
          os << c.name << " at lambda=" << r.lambda << " eps=" << r.eps;
          worst_name = os.str();
        }
      }
      if (!ok) ++failed;
    }
  }
  std::string str() const {
    std::ostringstream os;
    os << records << " records, " << failed << " failed, " << errors << " errors, worst ratio " << worst << " ("
       << worst_name << ")";
    return os.str();
  }
};

std::string first_failed(const std::vector<SuiteItem>& items) {
  std::string s;
  for (const auto& i : items)
    if (!i.pass) {
      std::ostringstream os;
      os << " " << i.name << "=" << i.value << " (target " << i.target << ")";
      s += os.str();
    }
  return s;
}

}  // namespace

int main() {
  {
    const Timed t = run("acceptance/identities.json");
    const auto& id = *t.report.identity;
    std::ostringstream os;
    os << "identity residuals " << id.worst_general_first << " " << id.worst_general_second << " "
       << id.worst_helmholtz_first << " " << id.worst_helmholtz_second << ", oracle " << id.worst_oracle << ", "
       << t.seconds << " s";
    line(1, t.report.pass && t.seconds < 60, os.str());
  }
  {
    const Timed t = run("acceptance/lemmas.json");
    std::ostringstream os;
    int failed = 0, total = 0;
    double worst = 0;
    if (t.report.lemmas)
      for (const auto& c : t.report.lemmas->items) {
        ++total;
        failed += c.pass() ? 0 : 1;
        worst = std::max(worst, c.worst_ratio);
      }
    os << total << " inequalities, " << failed << " failed, worst ratio " << worst << ", " << t.seconds << " s";
    for (const auto& d : t.report.diagnostics) os << "; " << d;
    line(2, t.report.pass && t.seconds < 120, os.str());
  }
  {
    const Timed t = run("acceptance/conditions.json");
    std::ostringstream os;
    os << t.report.condition_items.size() << " items" << first_failed(t.report.condition_items);
    line(3, t.report.pass, os.str());
  }
  {
    const Timed t = run("acceptance/solver.json");
    std::ostringstream os;
    for (const auto& i : t.report.solver_items)
      if (i.name == "radial_order" || i.name == "grid_order" || i.name == "grid_dissipation" ||
          i.name == "gauge_covariance" || i.name == "radial_grid_agreement")
        os << i.name << "=" << i.value << " ";
    os << t.seconds << " s" << first_failed(t.report.solver_items);
    line(4, t.report.pass && t.seconds < 600, os.str());
  }

  const Timed free_space = run("free-space.json");
  const Timed diag_n4 = run("diag-n4.json");
  {
    Tally tally;
    tally.add(free_space.report.records, false);
    tally.add(diag_n4.report.records, false);
    const bool certified = free_space.report.conditions && free_space.report.conditions->pass() &&
                           diag_n4.report.conditions && diag_n4.report.conditions->pass();
    const double secs = free_space.seconds + diag_n4.seconds;
    std::ostringstream os;
    os << tally.str() << ", " << secs << " s";
    if (!certified) os << ", conditions not certified";
    line(5, certified && tally.failed == 0 && tally.records > 0 && secs < 300, os.str());
  }

  const Timed near = run("near-identity-3d.json");
  {
    Tally tally;
    tally.add(near.report.records, false);
    const bool certified = near.report.conditions && near.report.conditions->pass();
    std::ostringstream os;
    os << tally.str() << ", " << near.seconds << " s";
    for (const auto& d : near.report.diagnostics) os << "; " << d;
    line(6, certified && tally.failed == 0 && tally.records > 0 && near.seconds < 900, os.str());
  }
  {
    Tally tally;
    tally.add(free_space.report.records, true);
    tally.add(diag_n4.report.records, true);
    tally.add(near.report.records, true);
    line(7, tally.failed == 0 && tally.records > 0, tally.str());
  }
  {
    bool ok = !free_space.report.scaling.empty();
    double worst = 0;
    for (const auto& c : free_space.report.scaling) {
      ok = ok && c.pass(0.02);
      worst = std::max(worst, c.relative_change());
    }
    std::ostringstream os;
    os << free_space.report.scaling.size() << " rescaled records, worst relative change " << worst;
    line(8, ok, os.str());
  }
  return failures == 0 ? 0 : 1;
}
