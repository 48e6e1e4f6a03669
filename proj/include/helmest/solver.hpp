#pragma once

// Finite-difference solvers for A^b v - c v + (lambda + i eps) v = f.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "helmest/fields.hpp"
#include "helmest/grid_field.hpp"

namespace helmest {

using RadialFn = std::function<double(double)>;
using RadialSource = std::function<cd(double)>;
using GridSource = std::function<cd(const Point&)>;

struct RadialSolveSpec {
  int n = 3;
  double r0 = 0.0;
  double Rmax = 200.0;
  int m = 20000;  // grid points, h = (Rmax - r0) / (m - 1)
  RadialFn alpha = [](double) { return 1.0; };
  RadialFn c = [](double) { return 0.0; };
  double lambda = 0.0;
  double eps = 1.0;
  RadialSource f;
};

struct Grid3DSolveSpec {
  double L = 8.0;
  double h = 0.25;
  CoefficientSet coeffs;
  double obstacle_r0 = 0.0;  // 0 = whole space
  double lambda = 0.0;
  double eps = 1.0;
  GridSource f;
  double tolerance = 1e-8;
  int max_iterations = 0;  // 0 = 10 * grid side
  int restart = 40;
};

struct SolveResult {
  std::optional<RadialField> radial;
  std::optional<GridField3D> grid;
  double relative_residual = 0.0;
  int iterations = 0;
  std::optional<std::string> truncation_warning;
  std::vector<double> residual_history;
};

// eps * Rmax / (2 sqrt(|lambda| + 1)); values below 5 attach a warning.
double truncation_indicator(double lambda, double eps, double Rmax);

// Smallest Rmax >= 200 with truncation indicator >= 5.
double auto_rmax(double lambda, double eps);

SolveResult solve_radial(const RadialSolveSpec& spec);
SolveResult solve_3d(const Grid3DSolveSpec& spec);

// Discrete operator on the 3D grid. Boundary and obstacle nodes are identity rows.
class GridOperator {
 public:
  explicit GridOperator(const Grid3DSolveSpec& spec);

  int side() const { return M_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(side()) * side() * side(); }
  bool active(std::size_t idx) const { return active_[idx] != 0; }
  const std::vector<char>& mask() const { return active_; }

  void apply(const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const;
  // Right-hand side at nodes; zero on inactive nodes.
  Eigen::VectorXcd rhs(const GridSource& f) const;
  // Mean of the diagonal of a over active nodes.
  double mean_diagonal() const;
  // Sparse assembly of the same operator (identity rows included).
  Eigen::SparseMatrix<cd, Eigen::RowMajor> assemble() const;

  double h() const { return h_; }
  double L() const { return L_; }
  int M() const { return M_; }
  double obstacle_r0() const { return obstacle_r0_; }
  cd z() const { return z_; }

 private:
  template <class Emit>
  void row(std::size_t idx, int i, int j, int k, Emit&& emit) const;

  double L_, h_;
  int M_;
  double obstacle_r0_;
  cd z_;
  std::vector<char> active_;
  std::vector<double> a_;     // 6 entries per node: 00 11 22 01 02 12
  std::vector<double> beta_;  // a b, 3 per node
  std::vector<double> diag_;  // b.a.b + c
  bool magnetic_ = false;
  bool cross_ = false;
};

// Manufactured source f = A^b v - c v + (lambda + i eps) v, exact.
GridSource manufactured_source(const TestFunction& v, const CoefficientSet& C, double lambda, double eps);

struct ConvergenceStudy {
  std::vector<double> h;
  std::vector<double> error;
  double order = 0.0;
  bool degenerate = false;
};

// Max-norm error of the radial solve against `exact` over refinements m, 2m-1, ...
ConvergenceStudy radial_convergence(RadialSolveSpec spec, const RadialSource& exact, int levels);
// Max-norm error of the 3D solve against `exact` at each h.
ConvergenceStudy grid_convergence(Grid3DSolveSpec spec, const GridSource& exact, const std::vector<double>& hs);

// eps sum |v|^2 vol and Im sum f conj(v) vol on the discrete grid.
struct DissipationCheck {
  double eps_mass = 0.0;
  double im_pairing = 0.0;
  double relative() const;
};
DissipationCheck dissipation_radial(const RadialSolveSpec& spec, const RadialField& v);
DissipationCheck dissipation_3d(const Grid3DSolveSpec& spec, const GridField3D& v);

// Relative L2 difference of two grid fields (over active nodes).
double relative_l2(const GridField3D& a, const GridField3D& b);

// Solver output file: one text line, one JSON header line, then raw float64 pairs.
struct FieldFileHeader {
  std::string kind;  // "radial" or "grid3d"
  std::string preset;
  int n = 3;
  double lambda = 0.0, eps = 0.0;
  double r0 = 0.0, h = 0.0, L = 0.0, obstacle_r0 = 0.0;
  int M = 0;
  std::size_t count = 0;
};

void write_field_file(const std::string& path, const SolveResult& r, const std::string& preset, double lambda,
                      double eps);
SolveResult read_field_file(const std::string& path, FieldFileHeader* header = nullptr);

}  // namespace helmest
