#include <gtest/gtest.h>

#include "helmest/lemmas.hpp"

using namespace helmest;

TEST(Lemmas, NamesCoverEveryEvaluatedInequality) {
  Rng rng(1);
  const TestFunction v = random_test_function(3, rng), w = random_test_function(3, rng);
  const auto P = pair_profiles(v, w, swirl_field(3, 0.5, 0.5), make_shell_grid());
  const auto sides = evaluate_inequalities(P, 3, 0.5);
  EXPECT_EQ(sides.size(), inequality_names().size());
  for (const auto& s : sides) {
    EXPECT_TRUE(std::isfinite(s.lhs));
    EXPECT_TRUE(std::isfinite(s.rhs));
    EXPECT_LE(s.lhs, s.rhs * (1 + 1e-3));
  }
}

TEST(Lemmas, SmallSuitePassesInBothSettings) {
  LemmaSuiteOptions o;
  o.trials = 3;
  o.refine_every = 0;
  const auto r = lemma_suite(o);
  EXPECT_TRUE(r.pass());
  bool whole = false, exterior = false;
  for (const auto& i : r.items) {
    whole = whole || i.setting == "whole-space";
    exterior = exterior || i.setting == "exterior";
    EXPECT_EQ(i.trials, 3);
    EXPECT_LE(i.worst_ratio, 1 + o.slack) << i.name << " " << i.setting;
  }
  EXPECT_TRUE(whole && exterior);
}

TEST(Lemmas, FourDimensionsWithoutMagneticField) {
  LemmaSuiteOptions o;
  o.n = 4;
  o.trials = 2;
  o.exterior = false;
  o.refine_every = 0;
  o.b = VectorField::zero(4);
  EXPECT_TRUE(lemma_suite(o).pass());
}

TEST(Lemmas, RejectsInvalidOptions) {
  LemmaSuiteOptions o;
  o.n = 2;
  EXPECT_THROW(lemma_suite(o), ConfigError);
  o.n = 3;
  o.delta = 1.0;
  EXPECT_THROW(lemma_suite(o), ConfigError);
}

// int |v|^2 / |x|^2 <= (2 / (n - 2))^2 int |grad v|^2; for e^{-r^2} in n = 3 the
// ratio is exactly 1/3.
TEST(Lemmas, HardyRatioForGaussian) {
  const TestFunction v = TestFunction::gaussian(3, 1.0);
  const auto P = compute_profiles(make_shell_grid(), kFieldChannels, test_function_shells(v, VectorField::zero(3)), 3);
  const auto inv = [](double r) { return 1 / (r * r); };
  const double lhs = P[kV2].inner(inv) + P[kV2].integrate(0, P[kV2].grid().size() - 1, inv);
  const double rhs = 4 * (P[kG2].inner() + P[kG2].integrate(0, P[kG2].grid().size() - 1));
  EXPECT_NEAR(lhs / rhs, 1.0 / 3, 1e-8);
}
