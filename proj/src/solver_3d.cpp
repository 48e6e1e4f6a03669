#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include <Eigen/Dense>

#include "helmest/errors.hpp"
#include "helmest/solver.hpp"
#include "json.hpp"

namespace helmest {

namespace {

// Component slot of a_jk in the 6-entry symmetric storage.
constexpr int sym_slot(int j, int k) {
  if (j == k) return j;
  const int lo = j < k ? j : k, hi = j < k ? k : j;
  return lo == 0 ? (hi == 1 ? 3 : 4) : 5;
}

}  // namespace

GridOperator::GridOperator(const Grid3DSolveSpec& s) : L_(s.L), h_(s.h), obstacle_r0_(s.obstacle_r0) {
  if (s.coeffs.n != 3) throw ConfigError("3D solver needs n = 3 coefficients");
  if (!(s.eps > 0)) throw ConfigError("3D solve needs eps > 0");
  if (!(s.h > 0) || !(s.L > 0)) throw ConfigError("3D grid needs positive L and h");
  const double Mf = 2 * s.L / s.h;
  M_ = static_cast<int>(std::lround(Mf));
  if (std::abs(Mf - M_) > 1e-9 * Mf || M_ < 4) throw ConfigError("2L/h must be an integer >= 4");
  z_ = cd(s.lambda, s.eps);

  const std::size_t N = size();
  const int S = side();
  GridField3D geom;
  geom.L = L_;
  geom.h = h_;
  geom.M = M_;
  geom.obstacle_r0 = obstacle_r0_;
  active_.assign(N, 0);
  a_.assign(6 * N, 0.0);
  beta_.assign(3 * N, 0.0);
  diag_.assign(N, 0.0);

  const auto& C = s.coeffs;
  const bool a_const = C.a.is_constant(), b_const = C.b.is_constant();
  std::vector<double> a_fixed, b_fixed;
  if (a_const) a_fixed = C.a.values({0, 0, 0});
  if (b_const) b_fixed = C.b.values({0, 0, 0});
  bool b_nonzero = false;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k) {
        const std::size_t idx = geom.index(i, j, k);
        const Point x{geom.coord(i), geom.coord(j), geom.coord(k)};
        active_[idx] = geom.active(i, j, k) ? 1 : 0;
        const std::vector<double> a = a_const ? a_fixed : C.a.values(x);
        const std::vector<double> b = b_const ? b_fixed : C.b.values(x);
        for (int p = 0; p < 3; ++p)
          for (int q = p; q < 3; ++q) a_[6 * idx + sym_slot(p, q)] = a[3 * p + q];
        double bab = 0;
        for (int p = 0; p < 3; ++p) {
          double bp = 0;
          for (int q = 0; q < 3; ++q) bp += a[3 * p + q] * b[q];
          beta_[3 * idx + p] = bp;
          bab += b[p] * bp;
          b_nonzero = b_nonzero || b[p] != 0.0;
        }
        if (active_[idx]) {
          const double c = C.c.value(x);
          if (!std::isfinite(c)) throw SingularAssembly("potential is not finite at an active grid node");
          diag_[idx] = bab + c;
        }
        cross_ = cross_ || a[1] != 0.0 || a[2] != 0.0 || a[5] != 0.0;
      }
  magnetic_ = b_nonzero;
  for (std::size_t idx = 0; idx < N; ++idx)
    if (active_[idx] && !(a_[6 * idx] > 0 && a_[6 * idx + 1] > 0 && a_[6 * idx + 2] > 0))
      throw SingularAssembly("diagonal of a is not positive at an active node");
}

double GridOperator::mean_diagonal() const {
  double s = 0;
  std::size_t cnt = 0;
  for (std::size_t idx = 0; idx < size(); ++idx)
    if (active_[idx]) {
      s += (a_[6 * idx] + a_[6 * idx + 1] + a_[6 * idx + 2]) / 3;
      ++cnt;
    }
  return cnt ? s / cnt : 1.0;
}

// Row of an active node. Diagonal fluxes use face averages of a; mixed terms
// use a at the neighbouring node in the outer derivative direction, which
// keeps the real part symmetric. Columns outside the active set are dropped.
template <class Emit>
void GridOperator::row(std::size_t idx, int i, int j, int k, Emit&& emit) const {
  const int S = side();
  const std::ptrdiff_t stride[3] = {static_cast<std::ptrdiff_t>(S) * S, S, 1};
  const double ih2 = 1.0 / (h_ * h_);
  cd self = z_ - diag_[idx];
  const auto put = [&](std::ptrdiff_t off, cd w) {
    const std::size_t col = idx + off;
    if (active_[col]) emit(col, w);
  };
  for (int d = 0; d < 3; ++d) {
    const std::size_t up = idx + stride[d], dn = idx - stride[d];
    const double ap = 0.5 * (a_[6 * idx + d] + a_[6 * up + d]);
    const double am = 0.5 * (a_[6 * idx + d] + a_[6 * dn + d]);
    self -= (ap + am) * ih2;
    put(stride[d], ap * ih2);
    put(-stride[d], am * ih2);
  }
  if (cross_) {
    const double q = 0.25 * ih2;
    for (int d = 0; d < 3; ++d)
      for (int e = 0; e < 3; ++e) {
        if (d == e) continue;
        const int slot = sym_slot(d, e);
        for (int sd = -1; sd <= 1; sd += 2) {
          const double w = a_[6 * (idx + sd * stride[d]) + slot];
          if (w == 0.0) continue;
          for (int se = -1; se <= 1; se += 2) put(sd * stride[d] + se * stride[e], sd * se * w * q);
        }
      }
  }
  if (magnetic_) {
    const double q = 0.5 / h_;
    for (int d = 0; d < 3; ++d) {
      const std::size_t up = idx + stride[d], dn = idx - stride[d];
      const double b0 = beta_[3 * idx + d];
      put(stride[d], cd(0, (beta_[3 * up + d] + b0) * q));
      put(-stride[d], cd(0, -(beta_[3 * dn + d] + b0) * q));
    }
  }
  (void)i;
  (void)j;
  (void)k;
  emit(idx, self);
}

void GridOperator::apply(const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const {
  out.resize(v.size());
  const int S = side();
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
        if (!active_[idx]) {
          out[idx] = v[idx];
          continue;
        }
        cd acc = 0;
        row(idx, i, j, k, [&](std::size_t col, cd w) { acc += w * v[col]; });
        out[idx] = acc;
      }
}

Eigen::SparseMatrix<cd, Eigen::RowMajor> GridOperator::assemble() const {
  const int S = side();
  std::vector<Eigen::Triplet<cd>> T;
  T.reserve(size() * (magnetic_ ? 13 : 7));
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j)
      for (int k = 0; k < S; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
        if (!active_[idx]) {
          T.emplace_back(idx, idx, 1.0);
          continue;
        }
        row(idx, i, j, k, [&](std::size_t col, cd w) { T.emplace_back(idx, col, w); });
      }
  Eigen::SparseMatrix<cd, Eigen::RowMajor> A(size(), size());
  A.setFromTriplets(T.begin(), T.end());
  return A;
}

Eigen::VectorXcd GridOperator::rhs(const GridSource& f) const {
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(size());
  const int S = side();
  for (int i = 1; i < M_; ++i)
    for (int j = 1; j < M_; ++j)
      for (int k = 1; k < M_; ++k) {
        const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
        if (active_[idx]) b[idx] = f({-L_ + h_ * i, -L_ + h_ * j, -L_ + h_ * k});
      }
  return b;
}

namespace {

// Exact inverse of abar * (7-point Laplacian) + z on the interior box with
// Dirichlet faces, via sine transforms. Obstacle nodes are removed with a
// capacitance correction so that the preconditioner also vanishes there.
class DstPreconditioner {
 public:
  DstPreconditioner(const GridOperator& op) : op_(op), M_(op.M()), N_(op.M() - 1) {
    const std::size_t n3 = static_cast<std::size_t>(N_) * N_ * N_;
    re_ = fftw_alloc_real(n3);
    im_ = fftw_alloc_real(n3);
    plan_re_ = fftw_plan_r2r_3d(N_, N_, N_, re_, re_, FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    plan_im_ = fftw_plan_r2r_3d(N_, N_, N_, im_, im_, FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    const double abar = op.mean_diagonal();
    const double h = op.h();
    std::vector<double> mu(N_);
    for (int k = 0; k < N_; ++k) {
      const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * M_));
      mu[k] = -4.0 * s * s / (h * h);
    }
    const double norm = 1.0 / std::pow(2.0 * M_, 3);
    inv_.resize(n3);
    for (int a = 0; a < N_; ++a)
      for (int b = 0; b < N_; ++b)
        for (int c = 0; c < N_; ++c)
          inv_[(static_cast<std::size_t>(a) * N_ + b) * N_ + c] = norm / (abar * (mu[a] + mu[b] + mu[c]) + op.z());

    const int S = op.side();
    for (int i = 1; i < M_; ++i)
      for (int j = 1; j < M_; ++j)
        for (int k = 1; k < M_; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
          if (!op.active(idx)) holes_.push_back(interior(i, j, k));
        }
    if (!holes_.empty()) {
      const int H = static_cast<int>(holes_.size());
      Eigen::MatrixXcd C(H, H);
      std::vector<cd> e(n3), u(n3);
      for (int c = 0; c < H; ++c) {
        std::fill(e.begin(), e.end(), cd(0));
        e[holes_[c]] = 1.0;
        solve_box(e, u);
        for (int r = 0; r < H; ++r) C(r, c) = u[holes_[r]];
      }
      cap_ = C.partialPivLu();
    }
  }

  ~DstPreconditioner() {
    fftw_destroy_plan(plan_re_);
    fftw_destroy_plan(plan_im_);
    fftw_free(re_);
    fftw_free(im_);
  }
  DstPreconditioner(const DstPreconditioner&) = delete;
  DstPreconditioner& operator=(const DstPreconditioner&) = delete;

  // out = P^{-1} r on the full grid; inactive nodes pass through unchanged.
  void apply(const Eigen::VectorXcd& r, Eigen::VectorXcd& out) {
    const std::size_t n3 = inv_.size();
    std::vector<cd> g(n3), u(n3);
    const int S = op_.side();
    for (int i = 1; i < M_; ++i)
      for (int j = 1; j < M_; ++j)
        for (int k = 1; k < M_; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
          g[interior(i, j, k)] = op_.active(idx) ? r[idx] : cd(0);
        }
    solve_box(g, u);
    if (!holes_.empty()) {
      Eigen::VectorXcd uo(holes_.size());
      for (std::size_t q = 0; q < holes_.size(); ++q) uo[q] = u[holes_[q]];
      const Eigen::VectorXcd y = cap_.solve(uo);
      for (std::size_t q = 0; q < holes_.size(); ++q) g[holes_[q]] = -y[q];
      solve_box(g, u);
    }
    out = r;
    for (int i = 1; i < M_; ++i)
      for (int j = 1; j < M_; ++j)
        for (int k = 1; k < M_; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(i) * S + j) * S + k;
          if (op_.active(idx)) out[idx] = u[interior(i, j, k)];
        }
  }

 private:
  std::size_t interior(int i, int j, int k) const {
    return (static_cast<std::size_t>(i - 1) * N_ + (j - 1)) * N_ + (k - 1);
  }

  void solve_box(const std::vector<cd>& g, std::vector<cd>& u) {
    const std::size_t n3 = inv_.size();
    for (std::size_t q = 0; q < n3; ++q) {
      re_[q] = g[q].real();
      im_[q] = g[q].imag();
    }
    fftw_execute(plan_re_);
    fftw_execute(plan_im_);
    for (std::size_t q = 0; q < n3; ++q) {
      const cd w = cd(re_[q], im_[q]) * inv_[q];
      re_[q] = w.real();
      im_[q] = w.imag();
    }
    fftw_execute(plan_re_);
    fftw_execute(plan_im_);
    for (std::size_t q = 0; q < n3; ++q) u[q] = cd(re_[q], im_[q]);
  }

  const GridOperator& op_;
  int M_, N_;
  double* re_ = nullptr;
  double* im_ = nullptr;
  fftw_plan plan_re_, plan_im_;
  std::vector<cd> inv_;
  std::vector<std::size_t> holes_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> cap_;
};

struct GmresOutcome {
  Eigen::VectorXcd x;
  int iterations = 0;
  double relative_residual = 0;
  std::vector<double> history;
};

// Restarted GMRES with right preconditioning and Givens rotations.
template <class Op, class Prec>
GmresOutcome gmres(Op&& A, Prec&& P, const Eigen::VectorXcd& b, double tol, int restart, int max_it) {
  GmresOutcome out;
  const Eigen::Index n = b.size();
  out.x = Eigen::VectorXcd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0) return out;
  Eigen::VectorXcd r = b, w(n), t(n);
  double rel = 1.0;
  while (out.iterations < max_it) {
    const double beta = r.norm();
    rel = beta / bnorm;
    if (rel <= tol) break;
    std::vector<Eigen::VectorXcd> V;
    V.push_back(r / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(restart + 1, restart);
    std::vector<cd> cs(restart), sn(restart);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(restart + 1);
    g[0] = beta;
    int k = 0;
    for (; k < restart && out.iterations < max_it; ++k) {
      P(V[k], t);
      A(t, w);
      ++out.iterations;
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V[i].dot(w);
        w -= H(i, k) * V[i];
      }
      const double hn = w.norm();
      H(k + 1, k) = hn;
      for (int i = 0; i < k; ++i) {
        const cd a = H(i, k), c = H(i + 1, k);
        H(i, k) = std::conj(cs[i]) * a + std::conj(sn[i]) * c;
        H(i + 1, k) = -sn[i] * a + cs[i] * c;
      }
      const cd a = H(k, k);
      const double den = std::hypot(std::abs(a), hn);
      cs[k] = den == 0 ? cd(1) : a / den;
      sn[k] = den == 0 ? cd(0) : cd(hn / den);
      H(k, k) = std::conj(cs[k]) * a + std::conj(sn[k]) * hn;
      H(k + 1, k) = 0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = std::conj(cs[k]) * g[k];
      rel = std::abs(g[k + 1]) / bnorm;
      out.history.push_back(rel);
      if (rel <= tol * 0.5 || hn == 0) {
        ++k;
        break;
      }
      V.push_back(w / hn);
    }
    const Eigen::VectorXcd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXcd update = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < k; ++i) update += y[i] * V[i];
    P(update, t);
    out.x += t;
    A(out.x, w);
    r = b - w;
    rel = r.norm() / bnorm;
    if (rel <= tol) break;
  }
  out.relative_residual = rel;
  return out;
}

}  // namespace

SolveResult solve_3d(const Grid3DSolveSpec& spec) {
  if (!spec.f) throw ConfigError("3D solve needs a source");
  const GridOperator op(spec);
  const Eigen::VectorXcd b = op.rhs(spec.f);
  SolveResult res;
  GridField3D g;
  g.L = spec.L;
  g.h = spec.h;
  g.M = op.M();
  g.obstacle_r0 = spec.obstacle_r0;
  g.v.assign(op.size(), 0.0);
  if (b.norm() > 0) {
    DstPreconditioner P(op);
    const int max_it = spec.max_iterations > 0 ? spec.max_iterations : 10 * op.side();
    auto A = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { op.apply(x, y); };
    auto Pa = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { P.apply(x, y); };
    GmresOutcome o = gmres(A, Pa, b, spec.tolerance, std::max(2, spec.restart), max_it);
    res.iterations = o.iterations;
    res.relative_residual = o.relative_residual;
    res.residual_history = std::move(o.history);
    if (!(o.relative_residual <= spec.tolerance)) {
      std::ostringstream os;
      os << "GMRES stopped after " << o.iterations << " iterations at relative residual " << o.relative_residual;
      throw NoConvergence(os.str());
    }
    for (std::size_t q = 0; q < op.size(); ++q) g.v[q] = op.active(q) ? o.x[q] : cd(0);
  }
  res.grid = std::move(g);
  return res;
}

GridSource manufactured_source(const TestFunction& v, const CoefficientSet& C, double lambda, double eps) {
  return [v, C, lambda, eps](const Point& x) { return manufactured_rhs(v, C, lambda, eps, x); };
}

DissipationCheck dissipation_3d(const Grid3DSolveSpec& spec, const GridField3D& v) {
  const GridOperator op(spec);
  const Eigen::VectorXcd f = op.rhs(spec.f);
  const double vol = spec.h * spec.h * spec.h;
  DissipationCheck d;
  for (std::size_t q = 0; q < op.size(); ++q) {
    if (!op.active(q)) continue;
    d.eps_mass += spec.eps * std::norm(v.v[q]) * vol;
    d.im_pairing += std::imag(f[q] * std::conj(v.v[q])) * vol;
  }
  return d;
}

double relative_l2(const GridField3D& a, const GridField3D& b) {
  if (a.v.size() != b.v.size()) throw ConfigError("grid fields have different shapes");
  double num = 0, den = 0;
  for (std::size_t q = 0; q < a.v.size(); ++q) {
    num += std::norm(a.v[q] - b.v[q]);
    den += std::norm(b.v[q]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---- field files ----

namespace {

constexpr const char* kMagic = "helmest-field v1";

void put_le(std::ostream& os, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), 8);
}

double get_le(std::istream& is) {
  std::uint64_t u = 0;
  is.read(reinterpret_cast<char*>(&u), 8);
  if (!is) throw FormatError("field file is truncated");
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

}  // namespace

void write_field_file(const std::string& path, const SolveResult& r, const std::string& preset, double lambda,
                      double eps) {
  nlohmann::ordered_json h;
  const std::vector<cd>* values = nullptr;
  if (r.radial) {
    h["kind"] = "radial";
    h["n"] = r.radial->n;
    h["r0"] = r.radial->r0;
    h["h"] = r.radial->h;
    values = &r.radial->v;
  } else if (r.grid) {
    h["kind"] = "grid3d";
    h["n"] = 3;
    h["L"] = r.grid->L;
    h["h"] = r.grid->h;
    h["M"] = r.grid->M;
    h["obstacle_r0"] = r.grid->obstacle_r0;
    values = &r.grid->v;
  } else {
    throw FormatError("solve result holds no field");
  }
  h["preset"] = preset;
  h["lambda"] = lambda;
  h["eps"] = eps;
  h["count"] = values->size();
  h["relative_residual"] = r.relative_residual;
  h["iterations"] = r.iterations;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + tmp + " for writing");
    os << kMagic << '\n' << h.dump() << '\n';
    for (const cd& c : *values) {
      put_le(os, c.real());
      put_le(os, c.imag());
    }
    if (!os) throw FormatError("write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);
}

SolveResult read_field_file(const std::string& path, FieldFileHeader* header) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  std::string magic, js;
  std::getline(is, magic);
  if (magic != kMagic) throw FormatError(path + " is not a field file");
  std::getline(is, js);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field header: ") + e.what());
  }
  FieldFileHeader fh;
  try {
    fh.kind = h.at("kind").get<std::string>();
    fh.preset = h.value("preset", "");
    fh.n = h.at("n").get<int>();
    fh.lambda = h.at("lambda").get<double>();
    fh.eps = h.at("eps").get<double>();
    fh.h = h.at("h").get<double>();
    fh.count = h.at("count").get<std::size_t>();
    if (fh.kind == "radial") {
      fh.r0 = h.at("r0").get<double>();
    } else if (fh.kind == "grid3d") {
      fh.L = h.at("L").get<double>();
      fh.M = h.at("M").get<int>();
      fh.obstacle_r0 = h.at("obstacle_r0").get<double>();
    } else {
      throw FormatError("unknown field kind " + fh.kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field header: ") + e.what());
  }
  std::vector<cd> v(fh.count);
  for (auto& c : v) {
    const double re = get_le(is);
    c = cd(re, get_le(is));
  }
  SolveResult r;
  r.relative_residual = h.value("relative_residual", 0.0);
  r.iterations = h.value("iterations", 0);
  if (fh.kind == "radial") {
    RadialField f;
    f.n = fh.n;
    f.r0 = fh.r0;
    f.h = fh.h;
    f.v = std::move(v);
    r.radial = std::move(f);
  } else {
    GridField3D g;
    g.L = fh.L;
    g.h = fh.h;
    g.M = fh.M;
    g.obstacle_r0 = fh.obstacle_r0;
    if (v.size() != static_cast<std::size_t>(fh.M + 1) * (fh.M + 1) * (fh.M + 1))
      throw FormatError("grid field count does not match M");
    g.v = std::move(v);
    r.grid = std::move(g);
  }
  if (header) *header = fh;
  return r;
}

}  // namespace helmest
