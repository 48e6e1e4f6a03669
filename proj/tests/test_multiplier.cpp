#include <gtest/gtest.h>

#include "helmest/multiplier.hpp"
#include "helmest/presets.hpp"

using namespace helmest;

TEST(Weight, ContinuousAcrossTheSphere) {
  for (int n : {3, 4, 6}) {
    const Weight w{n, 1.5};
    const auto in = w.radial(1.5 * (1 - 1e-12)), out = w.radial(1.5 * (1 + 1e-12));
    EXPECT_NEAR(in[0], out[0], 1e-10);
    EXPECT_NEAR(in[1], out[1], 1e-10);
    EXPECT_NEAR(in[2], out[2], 1e-10);
  }
}

TEST(Weight, DerivativesMatchFiniteDifferences) {
  const Weight w{3, 1.0};
  for (double r : {0.5, 2.0, 5.0}) {
    const double h = 1e-5;
    const auto d = w.radial(r);
    EXPECT_NEAR(d[1], (w.radial(r + h)[0] - w.radial(r - h)[0]) / (2 * h), 1e-8);
    EXPECT_NEAR(d[2], (w.radial(r + h)[1] - w.radial(r - h)[1]) / (2 * h), 1e-8);
  }
  // psi' tends to 1/2 at infinity.
  EXPECT_NEAR(w.radial(1e6)[1], 0.5, 1e-12);
}

TEST(Weight, TentValues) {
  EXPECT_EQ(tent_value(2, 1), 1.0);
  EXPECT_EQ(tent_value(2, 3), 0.5);
  EXPECT_EQ(tent_value(2, 5), 0.0);
}

TEST(Weight, OriginAndSurfaceAreRejected) {
  EXPECT_THROW(weight_derivatives(1, 3, {0, 0, 0}), OriginPoint);
  const CoefficientSet C = identity_preset(3);
  EXPECT_THROW(S_R_decomposition(C.a, Weight{3, 1}, {1.0, 0, 0}), SurfaceProximity);
}

TEST(Multiplier, CommutatorMatchesOperatorOracle) {
  Rng rng(3);
  const auto rc = random_coefficients(3, rng, 0.2);
  for (int t = 0; t < 5; ++t) {
    const TestFunction v = random_test_function(3, rng);
    Point x(3);
    for (auto& e : x) e = rng.uniform(-2, 2);
    if (std::abs(norm(x) - 1) < 0.1) continue;
    const cd a = commutator_multiplier(v, rc.coeffs, Weight{3, 1}, x);
    const cd b = commutator_oracle(v, rc.coeffs, Weight{3, 1}, x);
    EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(b)));
  }
}

// For constant a the derivative-of-coefficient remainder vanishes; for a = I
// the principal part is all of A^2 psi.
TEST(Multiplier, SRDecompositionConstantCoefficients) {
  Eigen::Matrix3d A;
  A << 1.2, 0.1, 0, 0.1, 0.9, 0.05, 0, 0.05, 1.1;
  const MatrixField a = MatrixField::constant(A);
  for (double r : {0.5, 2.0, 3.0}) {
    const Point x{0.3 * r, 0.5 * r, std::sqrt(1 - 0.34) * r};
    const auto sr = S_R_decomposition(a, Weight{3, 1.0}, x);
    EXPECT_NEAR(sr.Rrem, 0.0, 1e-12);
    EXPECT_NEAR(sr.S, sr.A2psi, 1e-12 * std::max(1.0, std::abs(sr.A2psi)));
    const auto si = S_R_decomposition(MatrixField::identity(3), Weight{3, 1.0}, x);
    EXPECT_NEAR(si.S, si.A2psi, 1e-12);
  }
}

TEST(Multiplier, ApsiClosedFormMatchesJets) {
  Rng rng(17);
  const auto rc = random_coefficients(3, rng, 0.2);
  const Weight w{3, 1.0};
  const Point x{0.7, -1.1, 0.9};
  const auto X = coordinate_jets(x, 2);
  const auto a = rc.coeffs.a.jets(x, 1);
  const RJet psi = psi_jet(w)(X);
  double jet = 0;
  for (int l = 0; l < 3; ++l) {
    RJet flux(3, 1, 0.0);
    for (int m = 0; m < 3; ++m) flux = flux + a[l * 3 + m] * psi.partial(m);
    jet += flux.d(l);
  }
  EXPECT_NEAR(Apsi_closed_form(rc.coeffs.a, w, x), jet, 1e-11);
}

TEST(Multiplier, BallBoundaryTermIsNonpositive) {
  const CoefficientSet C = identity_preset(3);
  const auto res = boundary_term(
      DomainSpec::ball(3, 1.0), C.a, [](const BoundarySample& s) { return cd(1 + s.x[0], s.x[1]); }, Weight{3, 2.0},
      400);
  EXPECT_EQ(res.samples, 400);
  EXPECT_TRUE(res.nonpositive());
  EXPECT_LT(res.integral, 0.0);
}

TEST(IdentitySuite, SmallRunPasses) {
  IdentitySuiteOptions o;
  o.draws = 2;
  o.points = 40;
  o.oracle_every = 5;
  const auto r = identity_suite(o);
  EXPECT_TRUE(r.pass()) << r.worst_general_first << " " << r.worst_general_second << " "
                        << r.worst_helmholtz_first << " " << r.worst_helmholtz_second << " " << r.worst_oracle;
  EXPECT_EQ(r.evaluations, 80);
}

TEST(IdentitySuite, DeterministicForSeed) {
  IdentitySuiteOptions o;
  o.draws = 1;
  o.points = 10;
  const auto a = identity_suite(o), b = identity_suite(o);
  EXPECT_EQ(a.worst_general_first, b.worst_general_first);
  EXPECT_EQ(a.worst_oracle, b.worst_oracle);
}
