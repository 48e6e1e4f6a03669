#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helmest/harness.hpp"

using namespace helmest;

namespace {

std::string config_error(const Json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

Scenario small_free_space() {
  return parse_scenario(Json::parse(R"({
    "name": "tiny", "preset": "identity",
    "sweep": {"pairs": [[1, 1], [-1, 0.3]]},
    "assertions": {"scaling": [2]}
  })"));
}

}  // namespace

TEST(Config, DefaultsAndSweepExpansion) {
  const Scenario s = parse_scenario(Json::parse(R"({"preset": "identity", "sweep": {}})"));
  EXPECT_TRUE(s.has_coefficients);
  EXPECT_EQ(s.sweep.size(), 24u);
  EXPECT_EQ(s.mode, Mode::homogeneous);
  EXPECT_EQ(s.solver.path, "auto");
  EXPECT_DOUBLE_EQ(s.assertions.slack, 0.02);
  EXPECT_EQ(s.sweep.front(), std::make_pair(-5.0, 1.0));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error(Json::parse(R"({"presett": "identity"})")).find("presett"), std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"preset": "identity", "solver": {"h": -1}})")).find("solver"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"preset": "identity", "sweep": {"eps": [0]}})")).find("sweep.eps"),
            std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"preset": "identity", "mode": "both"})")).find("mode"), std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"sweep": {}})")).find("sweep"), std::string::npos);
  EXPECT_NE(config_error(Json::parse(R"({"preset": "identity", "domain": {"kind": "ball", "r0": 0}})")).find("domain.r0"),
            std::string::npos);
}

TEST(Config, NonSymmetricMatrixIsAConfigError) {
  const std::string e =
      config_error(Json::parse(R"({"coefficients": {"n": 3, "a": [[1, 0.1, 0], [0, 1, 0], [0, 0, 1]]}})"));
  EXPECT_NE(e.find("coefficients.a"), std::string::npos);
  EXPECT_NE(e.find("symmetric"), std::string::npos);
}

TEST(Config, ExplicitCoefficients) {
  const Scenario s = parse_scenario(Json::parse(R"({"coefficients": {"n": 3, "diagonal": [1, 1, 1.2], "b": [0, 0, 0.1]}})"));
  EXPECT_EQ(s.coeffs.a.value({0, 0, 0})(2, 2), 1.2);
  EXPECT_FALSE(s.coeffs.radial.has_value());
  EXPECT_EQ(s.coeffs.b.values({1, 2, 3})[2], 0.1);
}

TEST(Config, PresetObjectAndSuites) {
  const Scenario s = parse_scenario(Json::parse(R"({
    "preset": {"id": "near-identity-n3", "eta": 1e-6},
    "domain": {"kind": "ball", "r0": 1},
    "mode": "nonhomogeneous",
    "assertions": {"identity_suite": {"draws": 3}, "lemma_suite": {"trials": 5}, "condition_suite": true}
  })"));
  EXPECT_EQ(s.preset, "near-identity-n3");
  EXPECT_EQ(s.mode, Mode::nonhomogeneous);
  ASSERT_TRUE(s.assertions.identity && s.assertions.lemmas);
  EXPECT_EQ(s.assertions.identity->draws, 3);
  EXPECT_EQ(s.assertions.lemmas->trials, 5);
  EXPECT_TRUE(s.assertions.condition_suite);
}

TEST(Config, BundledScenariosParse) {
  const std::string dir = std::string(HELMEST_SOURCE_DIR) + "/scenarios";
  int count = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.path().extension() == ".json") {
      EXPECT_NO_THROW(load_scenario(e.path().string())) << e.path();
      ++count;
    }
  EXPECT_GE(count, 8);
  EXPECT_THROW(load_scenario(dir + "/missing.json"), ConfigError);
}

TEST(Source, ScaleFollowsRescaling) {
  SourceSpec a, b;
  b.scale = 2;
  // f_s(r) = s^2 f(s r)
  EXPECT_NEAR(std::abs(b.value(1.0)), 4 * std::abs(a.value(2.0)), 1e-15);
}

TEST(Estimates, HomogeneousFormulas) {
  EstimateConstants k;
  k.M0 = 746496;
  FieldNorms m;
  m.v.Xdot = 1;
  m.v.Ydot = 2;
  m.grad.Ydot = 3;
  m.f.Ydot_dual = 0.5;
  const auto c = estimate_checks(Mode::homogeneous, k, m, 4, 0.5, 0.02);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].name, "main_estimate");
  EXPECT_DOUBLE_EQ(c[0].lhs, 1 + 9);
  EXPECT_DOUBLE_EQ(c[0].rhs, 746496 * 0.25);
  EXPECT_DOUBLE_EQ(c[1].lhs, 4 * 4);
  EXPECT_DOUBLE_EQ(c[1].rhs, 2 * 9 * 4 * 746496 * 0.25);
  EXPECT_DOUBLE_EQ(c[2].lhs, 0.5 * 4);
  EXPECT_DOUBLE_EQ(c[2].rhs, 9 * 2 * 746496 * 0.25);
  for (const auto& x : c) EXPECT_TRUE(x.pass);
}

TEST(Estimates, SlackDecidesBorderline) {
  EstimateConstants k;
  k.M0 = 1;
  FieldNorms m;
  m.v.Xdot = 1.01;
  m.f.Ydot_dual = 1;
  EXPECT_TRUE(estimate_checks(Mode::homogeneous, k, m, 0, 1, 0.03)[0].pass);
  EXPECT_FALSE(estimate_checks(Mode::homogeneous, k, m, 0, 1, 0.01)[0].pass);
}

TEST(Estimates, AuxiliaryBranchOnLambdaSign) {
  EstimateConstants k;
  FieldNorms m;
  m.v.Ydot = m.v.Y = 1;
  m.grad.Ydot = m.grad.Y = 1;
  m.f.Ydot_dual = m.f.Y_dual = 1;
  for (Mode mode : {Mode::homogeneous, Mode::nonhomogeneous}) {
    const auto pos = auxiliary_checks(mode, k, m, 2, 0.1, 0.02);
    const auto neg = auxiliary_checks(mode, k, m, -2, 0.1, 0.02);
    EXPECT_EQ(pos.front().name, "aux_eps");
    EXPECT_EQ(pos.back().name, "aux_lambda_pos");
    EXPECT_EQ(neg.back().name, "aux_lambda_neg");
  }
}

TEST(Run, FreeSpaceSmallSweepPassesAndIsDeterministic) {
  const Scenario s = small_free_space();
  const auto a = run_scenario(s), b = run_scenario(s);
  EXPECT_TRUE(a.pass);
  ASSERT_EQ(a.records.size(), 2u);
  EXPECT_EQ(a.records[0].path, "radial");
  ASSERT_EQ(a.scaling.size(), 2u);
  for (const auto& c : a.scaling) EXPECT_TRUE(c.pass(0.02)) << c.relative_change();
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Run, TrappedSweepNeedsForce) {
  const Scenario s = parse_scenario(Json::parse(R"({
    "coefficients": {"n": 3, "diagonal": [1, 1, 1.5]},
    "sweep": {"pairs": [[1, 1]]}
  })"));
  const auto blocked = run_scenario(s);
  EXPECT_FALSE(blocked.pass);
  EXPECT_TRUE(blocked.records.empty());
  ASSERT_FALSE(blocked.diagnostics.empty());
  EXPECT_EQ(blocked.diagnostics.front().rfind("Trapped", 0), 0u);
  RunOptions o;
  o.force = true;
  const auto forced = run_scenario(s, o);
  EXPECT_FALSE(forced.pass);
  EXPECT_EQ(forced.records.size(), 1u);
  EXPECT_TRUE(forced.forced);
}

TEST(Run, SeedOverrideReachesSuites) {
  Scenario s = parse_scenario(Json::parse(R"({"assertions": {"identity_suite": {"draws": 1, "points": 5}}})"));
  RunOptions o;
  o.seed = 42;
  o.stage = Stage::identity;
  const auto r = run_scenario(s, o);
  EXPECT_EQ(r.scenario.assertions.identity->seed, 42u);
  EXPECT_TRUE(r.identity.has_value());
}

TEST(Csv, ColumnsAreFrozen) {
  const auto& cols = csv_columns();
  EXPECT_EQ(cols.size(), 41u);
  EXPECT_EQ(cols.front(), "scenario");
  EXPECT_EQ(cols.back(), "error");
  const auto r = run_scenario(small_free_space());
  const auto rows = csv_rows(r);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) EXPECT_EQ(std::count(row.begin(), row.end(), ','), 40);
  const std::string header = csv_header();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 40);
}

TEST(Output, WriteAtomicReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "helmest_atomic";
  const std::string p = (dir / "sub" / "out.txt").string();
  write_atomic(p, "one");
  write_atomic(p, "two");
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "two");
  EXPECT_FALSE(std::filesystem::exists(p + ".tmp"));
}
