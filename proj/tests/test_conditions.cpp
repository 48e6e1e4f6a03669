#include <gtest/gtest.h>

#include "helmest/conditions.hpp"
#include "helmest/presets.hpp"

using namespace helmest;

TEST(Conditions, FreeCaseConstants) {
  const auto r = certify(identity_preset(3), DomainSpec::whole_space(3), Mode::homogeneous);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.N, 1.0);
  EXPECT_EQ(r.nu, 1.0);
  for (const auto* c : {&r.Ca, &r.Cb, &r.Cminus, &r.Cplus, &r.Cc}) EXPECT_EQ(c->value(), 0.0);
  ASSERT_TRUE(r.K && r.M0);
  EXPECT_NEAR(*r.K, 1.0 / 9, 1e-15);
  EXPECT_NEAR(*r.M0, 746496.0, 1e-6);
  EXPECT_FALSE(r.trapped);
}

TEST(Conditions, M0FormulaInDimensionFour) {
  const KConstants k = compute_K_M0(1, 1, 4, 0.5);
  EXPECT_NEAR(k.K, 1.0 / 9, 1e-15);
  EXPECT_NEAR(k.M0, 64.0 * 16 * 81 * 4 * 2.5 * 2.5, 1e-6);
}

TEST(Conditions, FourDimensionalDiagonalPresetCertifies) {
  const auto r = certify(diag_n4_remark_preset(), DomainSpec::whole_space(4), Mode::homogeneous);
  EXPECT_TRUE(r.pass());
  EXPECT_GT(r.Cplus.value(), 0.0);
}

TEST(Conditions, AnisotropicCaseAMinimum) {
  for (double e0 : {1e-3, 0.05}) {
    const auto r = certify(diagonal_preset({1, 1, 1 + e0}), DomainSpec::whole_space(3), Mode::homogeneous);
    EXPECT_NEAR(r.caseA_min, -8 * e0, 1e-10);
  }
}

TEST(Conditions, LargeRatioIsTrapped) {
  const auto r = certify(diagonal_preset({1, 1, 1.5}), DomainSpec::whole_space(3), Mode::homogeneous);
  EXPECT_TRUE(r.trapped);
  EXPECT_FALSE(r.pass());
  EXPECT_THROW(compute_K_M0(1.5 * 8 / 6, 1, 3, 0), Trapped);
}

TEST(Conditions, RatioThresholdBranches) {
  // n <= 46: sqrt((n^2 + 2n + 15) / (6(n + 2))); n = 3 gives sqrt(1) = 1.
  EXPECT_NEAR(check_ratio(1, 1, 3).threshold, 1.0, 1e-15);
  EXPECT_TRUE(check_ratio(1, 1, 3).pass);
  EXPECT_FALSE(check_ratio(1.01, 1, 3).pass);
  const auto big = check_ratio(1, 1, 47);
  EXPECT_TRUE(big.strict);
  EXPECT_NEAR(big.threshold, 140.0 / 50, 1e-15);
}

TEST(Conditions, KThirdTermEquivalence) {
  for (int n : {3, 5, 12})
    for (double nu : {0.5, 2.0}) {
      const double N = 0.7 * nu * (3.0 * n - 1) / (n + 3);
      EXPECT_NEAR(nu * nu * K0_of(N, nu, n) / 9, K_third_term_alt(N, nu, n), 1e-14 * nu * nu * n);
    }
}

TEST(Conditions, PositivityBound) {
  EXPECT_TRUE(check_positivity(0.49, 1, 3));
  EXPECT_FALSE(check_positivity(0.5, 1, 3));
}

TEST(Conditions, NearIdentityBallNonhomogeneous) {
  const auto r = certify(near_identity_n3_preset(), DomainSpec::ball(3, 1.0), Mode::nonhomogeneous);
  EXPECT_TRUE(r.pass());
  EXPECT_LT(r.Ca.value(), 1e-4);
  EXPECT_LT(r.Cb.value(), 1e-3);
}

TEST(Conditions, SmallnessFailsForLargePerturbation) {
  PresetParams p;
  p.eta = 0.05;
  const auto r = certify(make_preset("near-identity-n3", p), DomainSpec::ball(3, 1.0), Mode::nonhomogeneous);
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.trapped);
}
