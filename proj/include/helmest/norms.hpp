#pragma once

// Morrey-Campanato sup norms, their dyadic duals, and the shell-integral
// machinery they are built on. Every quantity is a functional of radial
// profiles s(rho) = int_{Omega, |x| = rho} g dS of nonnegative densities g.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "helmest/errors.hpp"
#include "helmest/fields.hpp"
#include "helmest/grid_field.hpp"
#include "helmest/quadrature.hpp"

namespace helmest {

// rho_i = 2^{jmin - 1 + i / per_octave}, so every dyadic radius 2^j is a node.
struct ShellGrid {
  int jmin = -10;
  int jmax = 10;
  int per_octave = 20;
  std::vector<double> rho;

  double dt() const { return std::log(2.0) / per_octave; }
  int size() const { return static_cast<int>(rho.size()); }
  int node_of_pow2(int j) const { return (j - (jmin - 1)) * per_octave; }
};

inline ShellGrid make_shell_grid(int jmin = -10, int jmax = 10, int per_octave = 20) {
  if (jmax <= jmin || per_octave < 4) throw ConfigError("invalid dyadic window");
  ShellGrid g;
  g.jmin = jmin;
  g.jmax = jmax;
  g.per_octave = per_octave;
  const int count = (jmax - jmin + 1) * per_octave + 1;
  for (int i = 0; i < count; ++i) g.rho.push_back(std::exp2(jmin - 1 + double(i) / per_octave));
  return g;
}

// Shell integrals of several densities at one radius: out[c] for c < channels.
using ShellFn = std::function<void(double rho, double* out)>;

// One radial profile on a shell grid, optionally with an exact evaluator used
// for local refinement between nodes.
class Profile {
 public:
  Profile() = default;
  Profile(std::shared_ptr<const ShellGrid> grid, std::vector<double> s, std::function<double(double)> exact,
          int n)
      : grid_(std::move(grid)), s_(std::move(s)), exact_(std::move(exact)), n_(n) {}

  const ShellGrid& grid() const { return *grid_; }
  std::shared_ptr<const ShellGrid> grid_ptr() const { return grid_; }
  int dim() const { return n_; }
  double node(int i) const { return s_[i]; }
  const std::vector<double>& values() const { return s_; }
  bool has_exact() const { return static_cast<bool>(exact_); }

  double eval(double rho) const {
    if (exact_) return exact_(rho);
    return interpolate(rho);
  }

  // Pointwise radial reweighting g -> w(|x|) g.
  Profile weighted(std::function<double(double)> w) const {
    std::vector<double> s(s_.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = s_[i] * w(grid_->rho[i]);
    std::function<double(double)> ex;
    if (exact_) ex = [e = exact_, w](double r) { return e(r) * w(r); };
    return Profile(grid_, std::move(s), std::move(ex), n_);
  }

  // int over node range [rho_{i0}, rho_{i1}] of w(rho) s(rho) drho, 4th order in t = ln rho.
  double integrate(int i0, int i1, const std::function<double(double)>& w = {}) const {
    if (i1 <= i0) return 0.0;
    const double dt = grid_->dt();
    auto F = [&](int i) {
      const double r = grid_->rho[i];
      return s_[i] * r * (w ? w(r) : 1.0);
    };
    double sum = 0;
    if (i1 - i0 < 3) {
      for (int i = i0; i < i1; ++i) sum += 0.5 * dt * (F(i) + F(i + 1));
      return sum;
    }
    for (int i = i0; i < i1; ++i) {
      if (i == i0)
        sum += dt / 24 * (9 * F(i) + 19 * F(i + 1) - 5 * F(i + 2) + F(i + 3));
      else if (i == i1 - 1)
        sum += dt / 24 * (F(i - 2) - 5 * F(i - 1) + 19 * F(i) + 9 * F(i + 1));
      else
        sum += dt / 24 * (-F(i - 1) + 13 * F(i) + 13 * F(i + 1) - F(i + 2));
    }
    return sum;
  }

  // int_0^{rho_0} of w s, by a power law s ~ rho^p fitted to the first two nodes.
  double inner(const std::function<double(double)>& w = {}) const {
    const double r0 = grid_->rho[0];
    const double s0 = s_[0] * (w ? w(r0) : 1.0);
    if (s0 <= 0) return 0.0;
    const double s1 = s_[1] * (w ? w(grid_->rho[1]) : 1.0);
    double p = n_ - 1.0;
    if (s1 > 0) p = std::log(s1 / s0) / grid_->dt();
    if (p <= -1) return std::numeric_limits<double>::infinity();
    return s0 * r0 / (p + 1);
  }

  // B_i = int_0^{rho_i} w s drho for all nodes (from rho_0 when with_inner is false).
  std::vector<double> cumulative(const std::function<double(double)>& w = {}, bool with_inner = true) const {
    const int m = grid_->size();
    std::vector<double> B(m);
    B[0] = with_inner ? inner(w) : 0.0;
    const double dt = grid_->dt();
    std::vector<double> Fv(m);
    for (int i = 0; i < m; ++i) Fv[i] = s_[i] * grid_->rho[i] * (w ? w(grid_->rho[i]) : 1.0);
    auto F = [&](int i) { return Fv[i]; };
    for (int i = 0; i + 1 < m; ++i) {
      double piece;
      if (i == 0)
        piece = dt / 24 * (9 * F(0) + 19 * F(1) - 5 * F(2) + F(3));
      else if (i == m - 2)
        piece = dt / 24 * (F(i - 2) - 5 * F(i - 1) + 19 * F(i) + 9 * F(i + 1));
      else
        piece = dt / 24 * (-F(i - 1) + 13 * F(i) + 13 * F(i + 1) - F(i + 2));
      B[i + 1] = B[i] + piece;
    }
    return B;
  }

  // int over [a, b] with a, b arbitrary, by 6-point Gauss in t on the evaluator.
  double integrate_between(double a, double b) const {
    if (b <= a) return 0.0;
    const Rule1D g = gauss_legendre(6, std::log(a), std::log(b));
    double sum = 0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const double r = std::exp(g.x[k]);
      sum += g.w[k] * eval(r) * r;
    }
    return sum;
  }

 private:
  double interpolate(double rho) const {
    const int m = grid_->size();
    const double t = (std::log(rho) - std::log(grid_->rho[0])) / grid_->dt();
    if (t <= 0) return s_[0];
    if (t >= m - 1) return s_[m - 1];
    int i = std::clamp(static_cast<int>(std::floor(t)) - 1, 0, m - 4);
    const double u = t - i;
    const double w0 = -(u - 1) * (u - 2) * (u - 3) / 6, w1 = u * (u - 2) * (u - 3) / 2;
    const double w2 = -u * (u - 1) * (u - 3) / 2, w3 = u * (u - 1) * (u - 2) / 6;
    return w0 * s_[i] + w1 * s_[i + 1] + w2 * s_[i + 2] + w3 * s_[i + 3];
  }

  std::shared_ptr<const ShellGrid> grid_;
  std::vector<double> s_;
  std::function<double(double)> exact_;
  int n_ = 3;
};

// Evaluates `channels` shell integrals on every grid node.
inline std::vector<Profile> compute_profiles(const ShellGrid& grid, int channels, const ShellFn& fn, int n,
                                             bool keep_exact = true) {
  auto g = std::make_shared<const ShellGrid>(grid);
  std::vector<std::vector<double>> s(channels, std::vector<double>(grid.size()));
  std::vector<double> buf(channels);
  for (int i = 0; i < grid.size(); ++i) {
    fn(grid.rho[i], buf.data());
    for (int c = 0; c < channels; ++c) s[c][i] = buf[c];
  }
  std::vector<Profile> out;
  for (int c = 0; c < channels; ++c) {
    std::function<double(double)> ex;
    if (keep_exact)
      ex = [fn, c, channels](double r) {
        std::vector<double> b(channels);
        fn(r, b.data());
        return b[c];
      };
    out.emplace_back(g, std::move(s[c]), std::move(ex), n);
  }
  return out;
}

// ---- shell sources ---------------------------------------------------------

// Radial density: |S^{n-1}| rho^{n-1} g(rho).
inline ShellFn radial_shells(int n, std::function<void(double, double*)> density, int channels) {
  const double area = sphere_area(n);
  return [=](double rho, double* out) {
    density(rho, out);
    const double s = area * std::pow(rho, n - 1);
    for (int c = 0; c < channels; ++c) out[c] *= s;
  };
}

// Sphere quadrature of a pointwise density; `resolution(rho)` picks the rule.
// Points with |x| < r0 (ball obstacle) do not exist: shells below r0 are 0.
inline ShellFn sphere_shells(int n, std::function<void(const Point&, double*)> density, int channels,
                             std::function<int(double)> resolution, double r0 = 0.0) {
  return [=](double rho, double* out) {
    for (int c = 0; c < channels; ++c) out[c] = 0;
    if (rho < r0) return;
    const SphereRule& rule = SphereRuleCache::global().get(n, std::min(resolution(rho), sphere_rule_cap(n)));
    std::vector<double> buf(channels);
    Point x(n);
    const double scale = std::pow(rho, n - 1);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      for (int d = 0; d < n; ++d) x[d] = rho * rule.node(k)[d];
      density(x, buf.data());
      for (int c = 0; c < channels; ++c) out[c] += rule.weights[k] * buf[c];
    }
    for (int c = 0; c < channels; ++c) out[c] *= scale;
  };
}

// Channels of a single field: |v|^2, |grad^b v|^2, |v| |grad^b v|.
enum FieldChannel { kV2 = 0, kG2 = 1, kVG = 2, kFieldChannels = 3 };

// Angular resolution and support envelope of one or more test functions.
class TestFunctionPlan {
 public:
  explicit TestFunctionPlan(const std::vector<const TestFunction*>& fns, int max_m = 96, double scale = 1.0)
      : max_m_(max_m), scale_(scale) {
    // Angular degree of |v|^2 on a sphere of radius rho grows like rho times
    // (largest wave-number difference + Gaussian tilt |x0| / sigma^2).
    double kmax = 0, tilt = 0;
    for (const TestFunction* v : fns)
      for (const auto& t : v->terms()) {
        double k = 0, c = 0;
        for (double e : t.k) k += e * e;
        for (double e : t.x0) c += e * e;
        kmax = std::max(kmax, std::sqrt(k));
        tilt = std::max(tilt, std::sqrt(c) / (t.sigma * t.sigma));
        envelopes_.emplace_back(std::sqrt(c), t.sigma);
      }
    freq_ = 2 * kmax + 6 * tilt;
  }

  int resolution(double rho) const {
    const int m = static_cast<int>(std::ceil(scale_ * (6 + 0.5 * rho * freq_)));
    return std::min(static_cast<int>(scale_ * max_m_), m);
  }

  // False where every Gaussian envelope is below e^-45 of its peak, so |v|^2 < 1e-39 relative.
  bool live(double rho) const {
    for (const auto& [c, sigma] : envelopes_)
      if ((rho - c) * (rho - c) / (sigma * sigma) < 45.0) return true;
    return false;
  }

 private:
  std::vector<std::pair<double, double>> envelopes_;
  double freq_ = 0;
  int max_m_;
  double scale_;
};

inline ShellFn zero_outside(const TestFunctionPlan& plan, ShellFn inner, int channels) {
  return [plan, inner, channels](double rho, double* out) {
    if (!plan.live(rho)) {
      for (int c = 0; c < channels; ++c) out[c] = 0;
      return;
    }
    inner(rho, out);
  };
}

inline bool is_zero_field(const VectorField& b) {
  if (!b.is_constant()) return false;
  for (double e : b.values(Point(b.dim(), 0.0)))
    if (e != 0) return false;
  return true;
}

// |v|^2 and |grad^b v|^2 at x.
inline void covariant_density(const TestFunction& v, const VectorField& b, bool zero_b, const Point& x, cd& val,
                              double& g2) {
  std::vector<cd> g;
  v.value_grad(x, val, g);
  g2 = 0;
  if (zero_b) {
    for (const auto& e : g) g2 += std::norm(e);
    return;
  }
  const auto bv = b.values(x);
  for (std::size_t k = 0; k < g.size(); ++k) g2 += std::norm(g[k] + I_unit * bv[k] * val);
}

inline ShellFn test_function_shells(const TestFunction& v, const VectorField& b, double r0 = 0.0,
                                    double resolution_scale = 1.0) {
  const int n = v.dim();
  const bool zero_b = is_zero_field(b);
  const TestFunctionPlan plan({&v}, 96, resolution_scale);
  auto density = [v, b, zero_b](const Point& x, double* out) {
    cd val;
    double g2;
    covariant_density(v, b, zero_b, x, val, g2);
    out[kV2] = std::norm(val);
    out[kG2] = g2;
    out[kVG] = std::abs(val) * std::sqrt(g2);
  };
  return zero_outside(
      plan, sphere_shells(n, density, kFieldChannels, [plan](double r) { return plan.resolution(r); }, r0),
      kFieldChannels);
}

// Radial solver output; b = 0 on the radial path so grad^b v = v'(r) x-hat.
inline ShellFn radial_field_shells(const RadialField& f) {
  auto field = std::make_shared<RadialField>(f);
  return radial_shells(
      f.n,
      [field](double rho, double* out) {
        const cd val = field->value(rho), d = field->derivative(rho);
        out[kV2] = std::norm(val);
        out[kG2] = std::norm(d);
        out[kVG] = std::abs(val) * std::abs(d);
      },
      kFieldChannels);
}

// 3D grid output: centered-difference gradients at interior nodes, trilinear
// interpolation of v and grad^b v at sphere nodes.
inline ShellFn grid_field_shells(const GridField3D& f, const VectorField& b) {
  struct Data {
    GridField3D f;
    std::vector<cd> g[3];
  };
  auto data = std::make_shared<Data>();
  data->f = f;
  const int S = f.side();
  for (auto& g : data->g) g.assign(f.v.size(), cd(0));
  for (int i = 1; i < S - 1; ++i)
    for (int j = 1; j < S - 1; ++j)
      for (int k = 1; k < S - 1; ++k) {
        const std::size_t id = f.index(i, j, k);
        const Point x{f.coord(i), f.coord(j), f.coord(k)};
        if (f.obstacle_r0 > 0 && norm(x) < f.obstacle_r0) continue;
        const auto bv = b.values(x);
        const cd val = f.v[id];
        data->g[0][id] = (f.at(i + 1, j, k) - f.at(i - 1, j, k)) / (2 * f.h) + I_unit * bv[0] * val;
        data->g[1][id] = (f.at(i, j + 1, k) - f.at(i, j - 1, k)) / (2 * f.h) + I_unit * bv[1] * val;
        data->g[2][id] = (f.at(i, j, k + 1) - f.at(i, j, k - 1)) / (2 * f.h) + I_unit * bv[2] * val;
      }
  auto density = [data](const Point& x, double* out) {
    const GridField3D& F = data->f;
    out[kV2] = out[kG2] = out[kVG] = 0;
    double s[3];
    int i0[3];
    for (int d = 0; d < 3; ++d) {
      const double u = (x[d] + F.L) / F.h;
      if (u < 0 || u > F.M) return;
      i0[d] = std::min(static_cast<int>(u), F.M - 1);
      s[d] = u - i0[d];
    }
    cd val = 0, g[3] = {0, 0, 0};
    for (int c = 0; c < 8; ++c) {
      const int a = c >> 2 & 1, bb = c >> 1 & 1, e = c & 1;
      const double w = (a ? s[0] : 1 - s[0]) * (bb ? s[1] : 1 - s[1]) * (e ? s[2] : 1 - s[2]);
      if (w == 0) continue;
      const std::size_t id = F.index(i0[0] + a, i0[1] + bb, i0[2] + e);
      val += w * F.v[id];
      for (int d = 0; d < 3; ++d) g[d] += w * data->g[d][id];
    }
    const double g2 = std::norm(g[0]) + std::norm(g[1]) + std::norm(g[2]);
    out[kV2] = std::norm(val);
    out[kG2] = g2;
    out[kVG] = std::abs(val) * std::sqrt(g2);
  };
  const double h = f.h, corner = f.L * std::sqrt(3.0);
  auto resolution = [h](double rho) { return std::clamp(static_cast<int>(std::ceil(std::numbers::pi * rho / h)) + 4, 8, 256); };
  ShellFn inner = sphere_shells(3, density, kFieldChannels, resolution, f.obstacle_r0);
  return [inner, corner](double rho, double* out) {
    if (rho > corner) {
      for (int c = 0; c < kFieldChannels; ++c) out[c] = 0;
      return;
    }
    inner(rho, out);
  };
}

// ---- norms -----------------------------------------------------------------

struct SupResult {
  double value = 0;  // the squared sup, before the square root
  double argmax = 0;
};

namespace detail {

// Maximizes f(t) on [a, b] by golden section (16 steps shrink the bracket by 2e-4).
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 16; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

// sup_R w(R) s(R) over the grid with local refinement around the argmax.
inline SupResult shell_sup(const Profile& p, const std::function<double(double)>& w, double Rmin = 0.0,
                           bool strict_min = false) {
  const auto& g = p.grid();
  SupResult best{-1.0, 0.0};
  int arg = -1;
  for (int i = 0; i < g.size(); ++i) {
    const double R = g.rho[i];
    if (R < Rmin || (strict_min && R == Rmin)) continue;
    const double val = w(R) * p.node(i);
    if (val > best.value) {
      best = {val, R};
      arg = i;
    }
  }
  if (arg < 0) return {0.0, 0.0};
  const double ta = std::log(g.rho[std::max(arg - 1, 0)]);
  const double tb = std::log(g.rho[std::min(arg + 1, g.size() - 1)]);
  auto f = [&](double t) {
    const double R = std::exp(t);
    if (R < Rmin) return -1.0;
    return w(R) * p.eval(R);
  };
  const auto [t, val] = detail::golden_max(f, ta, tb);
  if (val > best.value) best = {val, std::exp(t)};
  return best;
}

// sup_R w(R) int_{<=R} s over the grid with local refinement.
inline SupResult ball_sup(const Profile& p, const std::vector<double>& B, const std::function<double(double)>& w,
                          double Rmin = 0.0) {
  const auto& g = p.grid();
  SupResult best{-1.0, 0.0};
  int arg = -1;
  for (int i = 0; i < g.size(); ++i) {
    const double R = g.rho[i];
    if (R < Rmin) continue;
    const double val = w(R) * B[i];
    if (val > best.value) {
      best = {val, R};
      arg = i;
    }
  }
  if (arg < 0) return {0.0, 0.0};
  const int lo = std::max(arg - 1, 0);
  const double ta = std::log(g.rho[lo]);
  const double tb = std::log(g.rho[std::min(arg + 1, g.size() - 1)]);
  auto f = [&](double t) {
    const double R = std::exp(t);
    if (R < Rmin) return -1.0;
    return w(R) * (B[lo] + p.integrate_between(g.rho[lo], R));
  };
  const auto [t, val] = detail::golden_max(f, ta, tb);
  if (val > best.value) best = {val, std::exp(t)};
  return best;
}

inline double bracket2(double r) { return 1 + r * r; }

inline SupResult sup_Xdot(const Profile& p) {
  return shell_sup(p, [](double R) { return 1 / (R * R); });
}
inline SupResult sup_X(const Profile& p) {
  return shell_sup(p, [](double R) { return 1 / bracket2(R); });
}
inline SupResult sup_Ydot(const Profile& p) {
  return ball_sup(p, p.cumulative(), [](double R) { return 1 / R; });
}
inline SupResult sup_Y(const Profile& p) {
  return ball_sup(p, p.cumulative(), [](double R) { return 1 / std::sqrt(bracket2(R)); });
}

inline double norm_Xdot(const Profile& p) { return std::sqrt(sup_Xdot(p).value); }
inline double norm_X(const Profile& p) { return std::sqrt(sup_X(p).value); }
inline double norm_Ydot(const Profile& p) { return std::sqrt(sup_Ydot(p).value); }
inline double norm_Y(const Profile& p) { return std::sqrt(sup_Y(p).value); }

// ||v||_{L^2(2^{j-1} <= |x| <= 2^j)} for j in [jmin, jmax].
inline std::vector<double> dyadic_shell_norms(const Profile& p) {
  const auto& g = p.grid();
  std::vector<double> out;
  for (int j = g.jmin; j <= g.jmax; ++j) {
    const double e = p.integrate(g.node_of_pow2(j - 1), g.node_of_pow2(j));
    out.push_back(std::sqrt(std::max(0.0, e)));
  }
  return out;
}

inline void check_tail(double outer, double total, const char* what) {
  if (total > 0 && outer > 1e-6 * total)
    throw TruncatedTail(std::string(what) + ": outermost dyadic shell carries " + std::to_string(outer / total) +
                        " of the sum; widen the window");
}

// sum_j 2^{j/2} ||v||_{shell_j}, plus the ball inside 2^{jmin-1} as one more term.
inline double norm_Ydot_dual(const Profile& p) {
  const auto& g = p.grid();
  const auto d = dyadic_shell_norms(p);
  double sum = std::exp2(0.5 * (g.jmin - 1)) * std::sqrt(std::max(0.0, p.inner()));
  for (int j = g.jmin; j <= g.jmax; ++j) sum += std::exp2(0.5 * j) * d[j - g.jmin];
  check_tail(std::exp2(0.5 * g.jmax) * d.back(), sum, "Ydot*");
  return sum;
}

inline double norm_Y_dual(const Profile& p) {
  const auto& g = p.grid();
  const auto d = dyadic_shell_norms(p);
  const auto B = p.cumulative();
  double sum = std::sqrt(std::max(0.0, B[g.node_of_pow2(0)]));
  for (int j = 1; j <= g.jmax; ++j) sum += std::exp2(0.5 * j) * d[j - g.jmin];
  check_tail(std::exp2(0.5 * g.jmax) * d.back(), sum, "Y*");
  return sum;
}

// int_0^inf w(r) (int_{=r} |v|^2)^{1/2} dr.
inline double radial_sqrt_integral(const Profile& p, const std::function<double(double)>& w, const char* what) {
  const Profile root(p.grid_ptr(),
                     [&] {
                       std::vector<double> s(p.values().size());
                       for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(0.0, p.node(i)));
                       return s;
                     }(),
                     {}, p.dim());
  const auto& g = p.grid();
  const double inner = root.inner(w);
  const double body = root.integrate(0, g.size() - 1, w);
  const double outer = root.integrate(g.node_of_pow2(g.jmax - 1), g.size() - 1, w);
  check_tail(outer, inner + body, what);
  return inner + body;
}

inline double norm_Xdot_dual(const Profile& p) {
  return radial_sqrt_integral(p, [](double r) { return r; }, "Xdot*");
}
inline double norm_X_dual(const Profile& p) {
  return radial_sqrt_integral(p, [](double r) { return std::sqrt(bracket2(r)); }, "X*");
}

// sup_j 2^{-j/2} ||v||_{shell_j}.
inline double norm_Ydot_dyadic(const Profile& p) {
  const auto& g = p.grid();
  const auto d = dyadic_shell_norms(p);
  double best = 0;
  for (int j = g.jmin; j <= g.jmax; ++j) best = std::max(best, std::exp2(-0.5 * j) * d[j - g.jmin]);
  return best;
}

inline double norm_Y_dyadic(const Profile& p) {
  const auto& g = p.grid();
  const auto d = dyadic_shell_norms(p);
  const auto B = p.cumulative();
  double best = 0;
  for (int j = 1; j <= g.jmax; ++j) best = std::max(best, std::exp2(-0.5 * j) * d[j - g.jmin]);
  return std::sqrt(std::max(0.0, B[g.node_of_pow2(0)])) + best;
}

struct NormBundle {
  double Xdot = 0, X = 0, Ydot = 0, Y = 0;
  double Ydot_dual = 0, Y_dual = 0, Xdot_dual = 0, X_dual = 0;
  double argmax_Xdot = 0, argmax_X = 0, argmax_Ydot = 0, argmax_Y = 0;
};

// All eight norms of one profile. Dual norms that hit TruncatedTail are
// reported as NaN when `tolerate_tail` is set.
inline NormBundle norm_bundle(const Profile& p, bool tolerate_tail = false) {
  NormBundle b;
  const auto xd = sup_Xdot(p), x = sup_X(p), yd = sup_Ydot(p), y = sup_Y(p);
  b.Xdot = std::sqrt(xd.value);
  b.X = std::sqrt(x.value);
  b.Ydot = std::sqrt(yd.value);
  b.Y = std::sqrt(y.value);
  b.argmax_Xdot = xd.argmax;
  b.argmax_X = x.argmax;
  b.argmax_Ydot = yd.argmax;
  b.argmax_Y = y.argmax;
  auto guarded = [&](auto fn) {
    try {
      return fn(p);
    } catch (const TruncatedTail&) {
      if (!tolerate_tail) throw;
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  b.Ydot_dual = guarded(norm_Ydot_dual);
  b.Y_dual = guarded(norm_Y_dual);
  b.Xdot_dual = guarded(norm_Xdot_dual);
  b.X_dual = guarded(norm_X_dual);
  return b;
}

// Dyadic window large enough to contain a field supported in |x| <= extent.
inline ShellGrid shell_grid_for_extent(double extent, int per_octave = 20, int jmin = -10) {
  const int jmax = std::max(10, static_cast<int>(std::ceil(std::log2(extent))) + 1);
  return make_shell_grid(jmin, jmax, per_octave);
}

}  // namespace helmest
