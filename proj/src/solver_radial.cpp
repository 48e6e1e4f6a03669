#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "helmest/errors.hpp"
#include "helmest/quadrature.hpp"
#include "helmest/solver.hpp"

namespace helmest {

double truncation_indicator(double lambda, double eps, double Rmax) {
  return eps * Rmax / (2.0 * std::sqrt(std::abs(lambda) + 1.0));
}

double auto_rmax(double lambda, double eps) {
  return std::max(200.0, 10.0 * std::sqrt(std::abs(lambda) + 1.0) / eps);
}

namespace {

struct RadialSystem {
  double h = 0;
  int first = 0, last = 0;  // unknowns first..last
  std::vector<double> vol, flux, cval;
  std::vector<cd> f;
};

void check_spec(const RadialSolveSpec& s) {
  if (s.n < 1) throw ConfigError("radial solve needs n >= 1");
  if (!(s.eps > 0)) throw ConfigError("radial solve needs eps > 0");
  if (s.m < 5) throw ConfigError("radial solve needs at least 5 grid points");
  if (!(s.r0 >= 0) || !(s.Rmax > s.r0)) throw ConfigError("radial solve needs 0 <= r0 < Rmax");
  if (!s.f) throw ConfigError("radial solve needs a source");
}

// Cell volumes (up to the sphere area), face fluxes r^{n-1} alpha / h, and the
// potential per cell. The origin cell [0, h/2] averages c so that an inverse
// square potential stays finite.
RadialSystem build(const RadialSolveSpec& s) {
  RadialSystem sys;
  const int m = s.m;
  const double h = (s.Rmax - s.r0) / (m - 1);
  sys.h = h;
  sys.first = s.r0 > 0 ? 1 : 0;
  sys.last = m - 2;
  const auto r = [&](double i) { return s.r0 + i * h; };
  sys.vol.assign(m, 0.0);
  sys.flux.assign(m, 0.0);  // flux[i] lives on the face between i and i+1
  sys.cval.assign(m, 0.0);
  sys.f.assign(m, 0.0);
  for (int i = 0; i + 1 < m; ++i) {
    const double rf = r(i + 0.5);
    const double al = s.alpha(rf);
    if (!(al > 0)) {
      std::ostringstream os;
      os << "alpha(" << rf << ") = " << al << " is not positive";
      throw SingularAssembly(os.str());
    }
    sys.flux[i] = std::pow(rf, s.n - 1) * al / h;
  }
  for (int i = sys.first; i <= sys.last; ++i) {
    const double lo = (i == 0) ? 0.0 : r(i - 0.5);
    const double hi = r(i + 0.5);
    sys.vol[i] = (std::pow(hi, s.n) - std::pow(lo, s.n)) / s.n;
    if (i == 0 && s.r0 == 0) {
      const Rule1D g = gauss_legendre(8, 0.0, hi);
      double acc = 0;
      for (int q = 0; q < 8; ++q) acc += g.w[q] * std::pow(g.x[q], s.n - 1) * s.c(g.x[q]);
      sys.cval[i] = acc / sys.vol[i];
    } else {
      sys.cval[i] = s.c(r(i));
    }
    if (!std::isfinite(sys.cval[i])) throw SingularAssembly("potential is not finite on the radial grid");
    sys.f[i] = s.f(r(i));
  }
  return sys;
}

}  // namespace

SolveResult solve_radial(const RadialSolveSpec& s) {
  check_spec(s);
  const RadialSystem sys = build(s);
  const int first = sys.first, last = sys.last, N = last - first + 1;
  const cd z(s.lambda, s.eps);

  // Rows scaled by the cell volume, which makes the real part symmetric.
  Eigen::SparseMatrix<cd> A(N, N);
  std::vector<Eigen::Triplet<cd>> T;
  T.reserve(3 * N);
  Eigen::VectorXcd b(N);
  std::vector<cd> diag(N), lower(N, 0.0), upper(N, 0.0);
  for (int i = first; i <= last; ++i) {
    const int row = i - first;
    const double fl = (i > 0) ? sys.flux[i - 1] : 0.0;
    const double fr = sys.flux[i];
    diag[row] = cd(-(fl + fr)) + sys.vol[i] * (z - sys.cval[i]);
    T.emplace_back(row, row, diag[row]);
    if (i > first) T.emplace_back(row, row - 1, lower[row] = fl);
    if (i < last) T.emplace_back(row, row + 1, upper[row] = fr);
    b[row] = sys.vol[i] * sys.f[i];
  }
  A.setFromTriplets(T.begin(), T.end());

  SolveResult res;
  RadialField field;
  field.n = s.n;
  field.r0 = s.r0;
  field.h = sys.h;
  field.v.assign(s.m, 0.0);

  const double bnorm = b.norm();
  if (bnorm > 0) {
    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SingularAssembly("radial system factorization failed");
    Eigen::VectorXcd x = lu.solve(b);
    // Refinement against a long double residual: brings the forward error of the
    // ill-conditioned tridiagonal system down to working precision.
    using cl = std::complex<long double>;
    for (int pass = 0; pass < 3; ++pass) {
      Eigen::VectorXcd r(N);
      for (int row = 0; row < N; ++row) {
        cl acc = cl(b[row]) - cl(diag[row]) * cl(x[row]);
        if (row > 0) acc -= cl(lower[row]) * cl(x[row - 1]);
        if (row + 1 < N) acc -= cl(upper[row]) * cl(x[row + 1]);
        r[row] = cd(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
      }
      x += lu.solve(r);
    }
    res.relative_residual = (A * x - b).norm() / bnorm;
    for (int i = first; i <= last; ++i) field.v[i] = x[i - first];
  }
  res.iterations = 1;
  res.residual_history = {res.relative_residual};
  const double ind = truncation_indicator(s.lambda, s.eps, s.Rmax);
  if (ind < 5.0) {
    std::ostringstream os;
    os << "truncation indicator " << ind << " < 5 at Rmax = " << s.Rmax;
    res.truncation_warning = os.str();
  }
  res.radial = std::move(field);
  return res;
}

DissipationCheck dissipation_radial(const RadialSolveSpec& s, const RadialField& v) {
  const RadialSystem sys = build(s);
  DissipationCheck d;
  for (int i = sys.first; i <= sys.last; ++i) {
    d.eps_mass += s.eps * sys.vol[i] * std::norm(v.v[i]);
    d.im_pairing += sys.vol[i] * std::imag(sys.f[i] * std::conj(v.v[i]));
  }
  return d;
}

double DissipationCheck::relative() const {
  const double scale = std::max(std::abs(eps_mass), std::abs(im_pairing));
  return scale > 0 ? std::abs(eps_mass - im_pairing) / scale : 0.0;
}

namespace {

ConvergenceStudy finish_study(ConvergenceStudy st) {
  bool all_zero = true;
  for (double e : st.error) all_zero = all_zero && e == 0.0;
  if (all_zero || st.error.size() < 2) {
    st.degenerate = true;
    return st;
  }
  // Least-squares slope of log(error) against log(h).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(st.h.size());
  for (std::size_t i = 0; i < st.h.size(); ++i) {
    const double x = std::log(st.h[i]), y = std::log(st.error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  st.order = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return st;
}

}  // namespace

ConvergenceStudy radial_convergence(RadialSolveSpec spec, const RadialSource& exact, int levels) {
  ConvergenceStudy st;
  for (int l = 0; l < levels; ++l) {
    const SolveResult r = solve_radial(spec);
    const RadialField& f = *r.radial;
    double err = 0;
    for (int i = 0; i < f.nodes(); ++i) err = std::max(err, std::abs(f.v[i] - exact(f.r(i))));
    st.h.push_back(f.h);
    st.error.push_back(err);
    spec.m = 2 * spec.m - 1;
  }
  return finish_study(std::move(st));
}

ConvergenceStudy grid_convergence(Grid3DSolveSpec spec, const GridSource& exact, const std::vector<double>& hs) {
  ConvergenceStudy st;
  for (double h : hs) {
    spec.h = h;
    const SolveResult r = solve_3d(spec);
    const GridField3D& g = *r.grid;
    double err = 0;
    for (int i = 0; i <= g.M; ++i)
      for (int j = 0; j <= g.M; ++j)
        for (int k = 0; k <= g.M; ++k) {
          if (!g.active(i, j, k)) continue;
          err = std::max(err, std::abs(g.at(i, j, k) - exact({g.coord(i), g.coord(j), g.coord(k)})));
        }
    st.h.push_back(h);
    st.error.push_back(err);
  }
  return finish_study(std::move(st));
}

}  // namespace helmest
