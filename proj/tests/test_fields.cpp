#include <gtest/gtest.h>

#include "helmest/fields.hpp"
#include "helmest/presets.hpp"
#include "helmest/rng.hpp"

using namespace helmest;

TEST(Jet, ProductAndExpDerivatives) {
  const Point x{0.3, -0.7, 1.1};
  const auto X = coordinate_jets(x, 3);
  const RJet f = exp(X[0] * X[1]) * X[2];
  const double e = std::exp(x[0] * x[1]);
  EXPECT_NEAR(f.value(), e * x[2], 1e-14);
  EXPECT_NEAR(f.d(0), x[1] * e * x[2], 1e-14);
  EXPECT_NEAR(f.d(2), e, 1e-14);
  EXPECT_NEAR(f.d(0, 1), (1 + x[0] * x[1]) * e * x[2], 1e-13);
  EXPECT_NEAR(f.d(0, 0, 2), x[1] * x[1] * e, 1e-13);
}

TEST(Jet, QuotientAndPower) {
  const Point x{0.4, 0.9, -0.2};
  const auto X = coordinate_jets(x, 2);
  const RJet r2 = X[0] * X[0] + X[1] * X[1] + X[2] * X[2];
  const RJet inv = reciprocal(r2 + 1.0);
  const RJet p = pow(r2 + 1.0, -1.0);
  const double s = 1 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  EXPECT_NEAR(inv.value(), 1 / s, 1e-15);
  EXPECT_NEAR(inv.d(1), -2 * x[1] / (s * s), 1e-14);
  EXPECT_NEAR(p.d(0, 1), inv.d(0, 1), 1e-13);
}

// Divergence form against a_jk d_j d_k v + (d_j a_jk) d_k v for random smooth a.
TEST(Operator, DivergenceFormMatchesExpandedForm) {
  Rng rng(11);
  for (int n : {3, 4}) {
    const auto rc = random_coefficients(n, rng, 0.2);
    CoefficientSet C = rc.coeffs;
    C.b = VectorField::zero(n);
    for (int trial = 0; trial < 10; ++trial) {
      const TestFunction v = random_test_function(n, rng);
      Point x(n);
      for (auto& e : x) e = rng.uniform(-2, 2);
      const cd a = apply_Ab(v, C, x), b = apply_A_nondivergence(v, C.a, x);
      EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

// b = grad chi: A^b(e^{-i chi} w) = e^{-i chi} A^0 w.
TEST(Operator, GaugeCovariance) {
  const int n = 3;
  Rng rng(5);
  const auto rc = random_coefficients(n, rng, 0.2);
  const VectorField b = pure_gauge_field(n, 0.3);
  const TestFunction w = random_test_function(n, rng);
  for (int trial = 0; trial < 8; ++trial) {
    Point x(n);
    for (auto& e : x) e = rng.uniform(-2, 2);
    const auto X = coordinate_jets(x, 2);
    const RJet chi = pure_gauge_potential(X, 0.3);
    const CJet phase = exp(complexify(chi) * cd(0, -1));
    const CJet wj = w.jet(x, 2);
    const cd lhs = apply_Ab_jet(phase * wj, rc.coeffs.a.jets(x, 1), b.jets(x, 1)).value();
    const cd rhs = phase.value() * apply_Ab_jet(wj, rc.coeffs.a.jets(x, 1), VectorField::zero(n).jets(x, 1)).value();
    EXPECT_LE(std::abs(lhs - rhs), 1e-11 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(TestFunction, ClosedFormGradientMatchesJets) {
  Rng rng(3);
  TestFunctionOptions o;
  o.cutoff_r0 = 1.0;
  const TestFunction v = random_test_function(3, rng, o);
  const Point x{0.9, 1.3, -0.4};
  cd val;
  std::vector<cd> g;
  v.value_grad(x, val, g);
  const CJet j = v.jet(x, 1);
  EXPECT_LE(std::abs(val - j.value()), 1e-13);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(g[k] - j.d(k)), 1e-12);
}

TEST(TestFunction, CutoffVanishesInsideObstacle) {
  Rng rng(4);
  TestFunctionOptions o;
  o.cutoff_r0 = 1.0;
  const TestFunction v = random_test_function(3, rng, o);
  EXPECT_EQ(v.value({0.2, 0.3, 0.1}), cd(0));
  EXPECT_EQ(v.value({0.0, 1.0, 0.0}), cd(0));
}

TEST(TestFunction, ScaledEvaluatesAtScaledPoint) {
  Rng rng(8);
  const TestFunction v = random_test_function(3, rng);
  const TestFunction vs = v.scaled(2.0);
  const Point x{0.3, -0.2, 0.5};
  EXPECT_LE(std::abs(vs.value(x) - v.value({0.6, -0.4, 1.0})), 1e-13);
}

TEST(Coefficients, ManufacturedRhsIsOperatorPlusShift) {
  const CoefficientSet C = magnetic_small_preset(3, 0.5, 0.3);
  const TestFunction v = TestFunction::gaussian(3, 1.2);
  const Point x{0.4, 0.5, -0.6};
  const cd f = manufactured_rhs(v, C, 2.0, 0.5, x);
  const cd g = apply_Ab(v, C, x) + (cd(2.0, 0.5) - C.c.value(x)) * v.value(x);
  EXPECT_LE(std::abs(f - g), 1e-13);
}

TEST(Coefficients, ValidationRejectsBadInput) {
  CoefficientSet C = identity_preset(3);
  C.delta = 1.0;
  EXPECT_THROW(C.validate(), ConfigError);
  EXPECT_THROW(identity_preset(2), ConfigError);
  EXPECT_THROW(DomainSpec::ball(3, 0.0), ConfigError);
  EXPECT_THROW(make_preset("no-such-preset"), ConfigError);
}

TEST(Coefficients, BallIsStarshapedForIdentity) {
  const auto rep = starshaped_check(DomainSpec::ball(3, 1.0), MatrixField::identity(3), 200);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.worst_value, -1.0, 1e-12);
  EXPECT_TRUE(starshaped_check(DomainSpec::whole_space(3), MatrixField::identity(3), 10).empty_obstacle);
}

TEST(Coefficients, ConstantMagneticFieldHasZeroCurl) {
  const VectorField b(JetField<double>::constant(3, {0.1, 0.2, 0.3}));
  EXPECT_EQ(b.db({1, 2, 3}).cwiseAbs().maxCoeff(), 0.0);
  const VectorField s = swirl_field(3, 0.5, 0.5);
  EXPECT_GT(s.db({1.0, 0.5, 0.2}).cwiseAbs().maxCoeff(), 0.0);
}
