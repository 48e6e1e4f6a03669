#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helmest/harness.hpp"
#include "helmest/solver.hpp"

using namespace helmest;

namespace {

RadialSolveSpec ring_spec() {
  RadialSolveSpec s;
  s.Rmax = 30;
  s.m = 3001;
  s.lambda = 2;
  s.eps = 0.5;
  s.f = [](double r) { return cd(std::exp(-(r - 2) * (r - 2))); };
  return s;
}

Grid3DSolveSpec small_grid() {
  Grid3DSolveSpec g;
  g.L = 3;
  g.h = 0.25;
  g.coeffs = magnetic_small_preset(3, 0.5, 0.3);
  g.lambda = 1;
  g.eps = 0.2;
  g.f = [](const Point& x) { return cd(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]))); };
  return g;
}

}  // namespace

TEST(Truncation, IndicatorAndAutoRmax) {
  EXPECT_NEAR(truncation_indicator(0, 1, 10), 5.0, 1e-15);
  EXPECT_EQ(auto_rmax(0, 1), 200.0);
  const double R = auto_rmax(20, 0.03);
  EXPECT_GE(truncation_indicator(20, 0.03, R), 5.0 - 1e-9);
  EXPECT_GT(R, 200.0);
}

TEST(RadialSolver, ManufacturedSecondOrder) {
  RadialSolveSpec s;
  s.Rmax = 20;
  s.m = 1001;
  s.lambda = 1;
  s.eps = 0.1;
  s.f = [](double r) { return cd(4 * r * r - 6 + 1, 0.1) * std::exp(-r * r); };
  const auto st = radial_convergence(s, [](double r) { return cd(std::exp(-r * r)); }, 3);
  EXPECT_NEAR(st.order, 2.0, 0.2);
  EXPECT_LT(st.error.back(), st.error.front());
}

TEST(RadialSolver, ZeroSourceGivesZero) {
  RadialSolveSpec s = ring_spec();
  s.f = [](double) { return cd(0); };
  const auto r = solve_radial(s);
  for (const cd& v : r.radial->v) EXPECT_EQ(v, cd(0));
}

TEST(RadialSolver, DissipationIdentity) {
  RadialSolveSpec s = ring_spec();
  s.n = 4;
  s.c = [](double r) { return 0.25 / (r * r); };
  const auto r = solve_radial(s);
  EXPECT_LT(dissipation_radial(s, *r.radial).relative(), 1e-10);
}

TEST(RadialSolver, ObstacleDirichletNode) {
  RadialSolveSpec s = ring_spec();
  s.r0 = 1.0;
  const auto r = solve_radial(s);
  EXPECT_EQ(r.radial->v.front(), cd(0));
  EXPECT_EQ(r.radial->v.back(), cd(0));
  EXPECT_GT(std::abs(r.radial->value(2.0)), 0.0);
}

TEST(RadialSolver, RejectsBadSpecs) {
  RadialSolveSpec s = ring_spec();
  s.eps = 0;
  EXPECT_THROW(solve_radial(s), ConfigError);
  s = ring_spec();
  s.alpha = [](double r) { return r < 5 ? 1.0 : -1.0; };
  EXPECT_THROW(solve_radial(s), SingularAssembly);
}

TEST(RadialSolver, TruncationWarning) {
  RadialSolveSpec s = ring_spec();
  s.eps = 0.01;
  EXPECT_TRUE(solve_radial(s).truncation_warning.has_value());
}

TEST(GridOperator, AssemblyMatchesMatrixFree) {
  Grid3DSolveSpec g = small_grid();
  g.obstacle_r0 = 0.6;
  const GridOperator op(g);
  const auto A = op.assemble();
  Eigen::VectorXcd x = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(op.size())), y;
  op.apply(x, y);
  EXPECT_LT((A * x - y).norm() / y.norm(), 1e-13);
}

// Off the diagonal the operator is Hermitian on active rows; the spectral
// shift only touches the diagonal.
TEST(GridOperator, SelfAdjointStructure) {
  Grid3DSolveSpec g = small_grid();
  g.coeffs = near_identity_n3_preset(0.5, 0.2, 0.3, 0.05, 0);
  g.obstacle_r0 = 0.6;
  const GridOperator op(g);
  const Eigen::SparseMatrix<cd, Eigen::RowMajor> A = op.assemble();
  const Eigen::SparseMatrix<cd, Eigen::RowMajor> H = A.adjoint();
  double worst = 0;
  for (int row = 0; row < A.outerSize(); ++row) {
    if (!op.active(static_cast<std::size_t>(row))) continue;
    for (Eigen::SparseMatrix<cd, Eigen::RowMajor>::InnerIterator it(A, row); it; ++it)
      if (it.col() != row && op.active(static_cast<std::size_t>(it.col())))
        worst = std::max(worst, std::abs(it.value() - H.coeff(row, it.col())));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Grid3D, SolveConvergesAndDissipates) {
  const Grid3DSolveSpec g = small_grid();
  const auto r = solve_3d(g);
  EXPECT_LT(r.relative_residual, g.tolerance);
  EXPECT_LT(dissipation_3d(g, *r.grid).relative(), 1e-6);
}

TEST(Grid3D, ObstacleNodesStayZero) {
  Grid3DSolveSpec g = small_grid();
  g.obstacle_r0 = 1.0;
  const auto r = solve_3d(g);
  const auto& f = *r.grid;
  EXPECT_EQ(f.at(f.M / 2, f.M / 2, f.M / 2), cd(0));
  EXPECT_EQ(f.at(0, 3, 3), cd(0));
  EXPECT_LT(r.relative_residual, g.tolerance);
}

TEST(Grid3D, RadialAgreement) {
  Grid3DSolveSpec g;
  g.L = 4;
  g.h = 0.25;
  g.coeffs = identity_preset(3);
  g.lambda = 0;
  g.eps = 1;
  g.f = [](const Point& x) {
    const double r = norm(x);
    return cd(std::exp(-(r - 1) * (r - 1) * 4));
  };
  const auto grid = solve_3d(g);
  RadialSolveSpec s;
  s.Rmax = 60;
  s.m = 6001;
  s.lambda = 0;
  s.eps = 1;
  s.f = [](double r) { return cd(std::exp(-(r - 1) * (r - 1) * 4)); };
  const auto rad = solve_radial(s);
  const auto& G = *grid.grid;
  double worst = 0;
  for (int i = G.M / 2; i < G.M; ++i) worst = std::max(worst, std::abs(G.at(i, G.M / 2, G.M / 2) - rad.radial->value(G.coord(i))));
  EXPECT_LT(worst, 5 * g.h * g.h);
}

TEST(FieldFile, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "helmest_field_test";
  std::filesystem::create_directories(dir);
  const RadialSolveSpec s = ring_spec();
  const auto r = solve_radial(s);
  const std::string p = (dir / "radial.bin").string();
  write_field_file(p, r, "identity", s.lambda, s.eps);
  FieldFileHeader h;
  const auto back = read_field_file(p, &h);
  EXPECT_EQ(h.kind, "radial");
  EXPECT_EQ(h.preset, "identity");
  EXPECT_EQ(h.lambda, s.lambda);
  ASSERT_TRUE(back.radial);
  EXPECT_EQ(back.radial->v, r.radial->v);

  const auto g = solve_3d(small_grid());
  const std::string q = (dir / "grid.bin").string();
  write_field_file(q, g, "magnetic-small", 1, 0.2);
  const auto gb = read_field_file(q, &h);
  EXPECT_EQ(h.kind, "grid3d");
  ASSERT_TRUE(gb.grid);
  EXPECT_EQ(gb.grid->v, g.grid->v);
}

TEST(FieldFile, RejectsGarbage) {
  const auto p = (std::filesystem::temp_directory_path() / "helmest_garbage.bin").string();
  std::ofstream(p) << "not a field file\n{}\n";
  EXPECT_THROW(read_field_file(p), FormatError);
  EXPECT_THROW(read_field_file("/nonexistent/field.bin"), FormatError);
}

TEST(SolverSuite, QuickItemsPass) {
  for (const auto& i : solver_suite(true)) EXPECT_TRUE(i.pass) << i.name << " = " << i.value;
}
