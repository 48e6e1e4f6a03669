#pragma once

// Coefficient fields a(x), b(x), c(x), exterior domains and analytic test
// functions, all evaluated as Taylor jets so every derivative the multiplier
// formulas need is available in closed form.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helmest/errors.hpp"
#include "helmest/jet.hpp"
#include "helmest/rng.hpp"

namespace helmest {

using cd = std::complex<double>;
using Point = std::vector<double>;
inline constexpr cd I_unit{0.0, 1.0};

inline double norm(const Point& x) {
  double s = 0;
  for (double e : x) s += e * e;
  return std::sqrt(s);
}

inline double bracket(double r) { return std::sqrt(1.0 + r * r); }

// |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2).
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

enum class Provenance { analytic, finite_difference };

inline const char* to_string(Provenance p) {
  return p == Provenance::analytic ? "analytic" : "finite-difference";
}

namespace detail {

// Derivative jets of a field known only by value, by nested 4th-order central
// differences with step h = 1e-4 max(1,|x|). Third derivatives lose roughly
// eps/h^3 in accuracy.
template <class T>
std::vector<Jet<T>> fd_jets(const std::function<std::vector<T>(const Point&)>& f, const Point& x,
                            int order, int components) {
  const int n = static_cast<int>(x.size());
  const double h = 1e-4 * std::max(1.0, norm(x));
  static const double off[4] = {-2, -1, 1, 2};
  static const double wts[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
  std::vector<Jet<T>> out(components, Jet<T>(n, order));
  const auto v0 = f(x);
  for (int c = 0; c < components; ++c) out[c].value() = v0[c];
  int digits[kMaxJetOrder];
  int sorted[kMaxJetOrder];
  for (int k = 1; k <= order; ++k) {
    const int len = ipow(n, k);
    std::map<int, std::vector<T>> cache;
    for (int t = 0; t < len; ++t) {
      decode(t, k, n, digits);
      std::copy(digits, digits + k, sorted);
      std::sort(sorted, sorted + k);
      int key = 0;
      for (int p = 0; p < k; ++p) key = key * n + sorted[p];
      auto it = cache.find(key);
      if (it == cache.end()) {
        std::vector<T> acc(components, T{});
        const int combos = ipow(4, k);
        for (int s = 0; s < combos; ++s) {
          Point y = x;
          double w = 1.0;
          int code = s;
          for (int p = 0; p < k; ++p) {
            const int q = code % 4;
            code /= 4;
            y[sorted[p]] += off[q] * h;
            w *= wts[q];
          }
          const auto fy = f(y);
          for (int c = 0; c < components; ++c) acc[c] += w * fy[c];
        }
        const double scale = std::pow(h, -k);
        for (auto& e : acc) e *= scale;
        it = cache.emplace(key, std::move(acc)).first;
      }
      for (int c = 0; c < components; ++c) out[c].block(k)[t] = it->second[c];
    }
  }
  return out;
}

}  // namespace detail

// A field with `components` entries evaluated as jets of coordinate jets.
template <class T>
class JetField {
 public:
  using JetFn = std::function<std::vector<Jet<T>>(const std::vector<RJet>&)>;
  using ValueFn = std::function<std::vector<T>(const Point&)>;

  JetField() = default;
  JetField(int n, int components, JetFn fn, bool constant = false)
      : n_(n), components_(components), fn_(std::move(fn)), constant_(constant) {}

  static JetField constant(int n, std::vector<T> values) {
    JetField f;
    f.n_ = n;
    f.components_ = static_cast<int>(values.size());
    f.constant_ = true;
    f.const_values_ = std::move(values);
    return f;
  }

  static JetField from_values(int n, int components, ValueFn fn) {
    JetField f;
    f.n_ = n;
    f.components_ = components;
    f.values_fn_ = std::move(fn);
    f.provenance_ = Provenance::finite_difference;
    return f;
  }

  int dim() const { return n_; }
  int components() const { return components_; }
  bool is_constant() const { return constant_; }
  Provenance provenance() const { return provenance_; }

  std::vector<Jet<T>> jets(const Point& x, int order) const {
    if (!const_values_.empty() || (constant_ && !fn_)) {
      std::vector<Jet<T>> out;
      out.reserve(components_);
      for (const T& v : const_values_) out.emplace_back(n_, order, v);
      return out;
    }
    if (values_fn_) return detail::fd_jets<T>(values_fn_, x, order, components_);
    return fn_(coordinate_jets(x, order));
  }

  // Closed-form values for hot loops; jets still come from the jet function.
  JetField& with_fast_values(ValueFn fn) {
    fast_values_ = std::move(fn);
    return *this;
  }

  std::vector<T> values(const Point& x) const {
    if (!const_values_.empty()) return const_values_;
    if (fast_values_) return fast_values_(x);
    if (values_fn_) return values_fn_(x);
    const auto j = fn_(coordinate_jets(x, 0));
    std::vector<T> out(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = j[i].value();
    return out;
  }

 private:
  int n_ = 0;
  int components_ = 0;
  JetFn fn_;
  ValueFn values_fn_;
  ValueFn fast_values_;
  bool constant_ = false;
  std::vector<T> const_values_;
  Provenance provenance_ = Provenance::analytic;
};

// Symmetric matrix field a(x), stored row-major.
class MatrixField : public JetField<double> {
 public:
  MatrixField() = default;
  MatrixField(JetField<double> f) : JetField<double>(std::move(f)) {}  // NOLINT

  static MatrixField constant(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<double> v(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[i * n + j] = A(i, j);
    return MatrixField(JetField<double>::constant(n, std::move(v)));
  }

  static MatrixField identity(int n) { return constant(Eigen::MatrixXd::Identity(n, n)); }

  static MatrixField from_matrix_values(int n, std::function<Eigen::MatrixXd(const Point&)> fn) {
    return MatrixField(JetField<double>::from_values(n, n * n, [n, fn](const Point& x) {
      const Eigen::MatrixXd A = fn(x);
      std::vector<double> v(n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[i * n + j] = A(i, j);
      return v;
    }));
  }

  Eigen::MatrixXd value(const Point& x) const {
    const int n = dim();
    const auto v = values(x);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = v[i * n + j];
    return A;
  }
};

class VectorField : public JetField<double> {
 public:
  VectorField() = default;
  VectorField(JetField<double> f) : JetField<double>(std::move(f)) {}  // NOLINT

  static VectorField zero(int n) { return VectorField(JetField<double>::constant(n, std::vector<double>(n, 0.0))); }

  // db_{jl} = d_j b_l - d_l b_j.
  Eigen::MatrixXd db(const Point& x) const {
    const int n = dim();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    if (is_constant()) return D;
    const auto b = jets(x, 1);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) D(j, l) = b[l].d(j) - b[j].d(l);
    return D;
  }
};

template <class T>
class ScalarField : public JetField<T> {
 public:
  ScalarField() = default;
  ScalarField(JetField<T> f) : JetField<T>(std::move(f)) {}  // NOLINT

  static ScalarField constant(int n, T value) {
    return ScalarField(JetField<T>::constant(n, std::vector<T>{value}));
  }

  static ScalarField from_jet(int n, std::function<Jet<T>(const std::vector<RJet>&)> fn) {
    return ScalarField(JetField<T>(n, 1, [fn](const std::vector<RJet>& X) {
      return std::vector<Jet<T>>{fn(X)};
    }));
  }

  Jet<T> jet(const Point& x, int order) const { return this->jets(x, order)[0]; }
  T value(const Point& x) const { return this->values(x)[0]; }
};

using PotentialField = ScalarField<double>;
using ComplexField = ScalarField<cd>;

// Radially symmetric scalar coefficients: a = alpha(|x|) I, b = 0, c = c(|x|).
struct RadialCoefficients {
  std::function<double(double)> alpha;
  std::function<double(double)> c;
};

struct CoefficientSet {
  std::string id = "custom";
  int n = 3;
  double delta = 0.5;
  MatrixField a;
  VectorField b;
  PotentialField c;
  std::optional<RadialCoefficients> radial;

  void validate() const {
    if (n < 3) throw ConfigError("dimension must be at least 3");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie strictly inside (0,1)");
    if (a.dim() != n || b.dim() != n || c.dim() != n)
      throw ConfigError("coefficient dimensions disagree");
  }
};

struct BoundarySample {
  Point x;
  Point normal;  // exterior normal of the domain (points into the obstacle)
  double weight = 0.0;
};

class DomainSpec {
 public:
  enum class Kind { none, ball, level_set };

  static DomainSpec whole_space(int n) {
    DomainSpec d;
    d.n_ = n;
    return d;
  }

  static DomainSpec ball(int n, double r0) {
    if (!(r0 > 0)) throw ConfigError("ball obstacle radius must be positive");
    DomainSpec d;
    d.n_ = n;
    d.kind_ = Kind::ball;
    d.r0_ = r0;
    return d;
  }

  // Obstacle {phi < 0}, contained in the cube of half-width `extent`.
  static DomainSpec level_set(int n, PotentialField phi, double extent) {
    DomainSpec d;
    d.n_ = n;
    d.kind_ = Kind::level_set;
    d.phi_ = std::move(phi);
    d.extent_ = extent;
    return d;
  }

  int dim() const { return n_; }
  Kind kind() const { return kind_; }
  double r0() const { return r0_; }
  bool empty() const { return kind_ == Kind::none; }

  bool contains(const Point& x) const {
    switch (kind_) {
      case Kind::none:
        return true;
      case Kind::ball:
        return norm(x) >= r0_;
      case Kind::level_set:
        return phi_.value(x) >= 0.0;
    }
    return true;
  }

  std::vector<BoundarySample> boundary_samples(int count, std::uint64_t seed) const {
    std::vector<BoundarySample> out;
    if (kind_ == Kind::none) return out;
    Rng rng(seed);
    if (kind_ == Kind::ball) {
      const double w = sphere_area(n_) * std::pow(r0_, n_ - 1) / count;
      for (int s = 0; s < count; ++s) {
        Point u = rng.unit_vector(n_);
        BoundarySample b;
        b.x = u;
        for (auto& e : b.x) e *= r0_;
        b.normal = u;
        for (auto& e : b.normal) e = -e;
        b.weight = w;
        out.push_back(std::move(b));
      }
      return out;
    }
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 200 * count) {
      ++attempts;
      Point x(n_);
      for (auto& e : x) e = rng.uniform(-extent_, extent_);
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const auto j = phi_.jet(x, 1);
        double g2 = 0;
        for (int i = 0; i < n_; ++i) g2 += j.d(i) * j.d(i);
        if (g2 < 1e-24) break;
        for (int i = 0; i < n_; ++i) x[i] -= j.value() * j.d(i) / g2;
        if (std::abs(j.value()) < 1e-14) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const auto j = phi_.jet(x, 1);
      if (std::abs(j.value()) > 1e-10) continue;
      double g = 0;
      for (int i = 0; i < n_; ++i) g += j.d(i) * j.d(i);
      g = std::sqrt(g);
      if (g < 1e-10) throw DegenerateNormal("level-set gradient vanishes on the boundary");
      BoundarySample b;
      b.x = x;
      b.normal.resize(n_);
      for (int i = 0; i < n_; ++i) b.normal[i] = -j.d(i) / g;
      out.push_back(std::move(b));
    }
    return out;
  }

 private:
  int n_ = 3;
  Kind kind_ = Kind::none;
  double r0_ = 0.0;
  double extent_ = 0.0;
  PotentialField phi_;
};

// C^3 ramp vanishing to third order at s = 0 and equal to 1 for s >= 1.
struct CutoffRamp {
  double r0 = 0.0;
  double width = 1.0;

  // Derivatives (order 0..4) of chi(r) with respect to r.
  std::array<double, 5> derivatives(double r) const {
    std::array<double, 5> g{};
    const double s = (r - r0) / width;
    if (s <= 0) return g;
    if (s >= 1) {
      g[0] = 1;
      return g;
    }
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s, s6 = s5 * s, s7 = s6 * s;
    const double w1 = 1 / width;
    g[0] = 35 * s4 - 84 * s5 + 70 * s6 - 20 * s7;
    g[1] = (140 * s3 - 420 * s4 + 420 * s5 - 140 * s6) * w1;
    g[2] = (420 * s2 - 1680 * s3 + 2100 * s4 - 840 * s5) * w1 * w1;
    g[3] = (840 * s - 5040 * s2 + 8400 * s3 - 4200 * s4) * w1 * w1 * w1;
    g[4] = (840 - 10080 * s + 25200 * s2 - 16800 * s3) * w1 * w1 * w1 * w1;
    return g;
  }
};

// amp * (c0 + p.y + y^T Q y) * exp(-|y|^2/sigma^2) * exp(i k.x), y = x - x0.
struct GaussianTerm {
  cd amp{1.0, 0.0};
  Point x0;
  double sigma = 1.0;
  double c0 = 1.0;
  std::vector<double> p;
  Eigen::MatrixXd Q;
  std::vector<double> k;
};

class TestFunction {
 public:
  TestFunction() = default;
  TestFunction(int n, std::vector<GaussianTerm> terms, std::optional<CutoffRamp> cutoff = std::nullopt)
      : n_(n), terms_(std::move(terms)), cutoff_(cutoff) {
    for (auto& t : terms_) {
      if (t.x0.empty()) t.x0.assign(n_, 0.0);
      if (t.p.empty()) t.p.assign(n_, 0.0);
      if (t.k.empty()) t.k.assign(n_, 0.0);
      if (t.Q.size() == 0) t.Q = Eigen::MatrixXd::Zero(n_, n_);
    }
  }

  static TestFunction gaussian(int n, double sigma = 1.0) {
    GaussianTerm t;
    t.sigma = sigma;
    return TestFunction(n, {t});
  }

  int dim() const { return n_; }
  const std::vector<GaussianTerm>& terms() const { return terms_; }
  const std::optional<CutoffRamp>& cutoff() const { return cutoff_; }

  CJet jet(const Point& x, int order) const {
    const auto X = coordinate_jets(x, order);
    CJet sum(n_, order, cd(0.0));
    for (const auto& t : terms_) {
      std::vector<RJet> y;
      y.reserve(n_);
      for (int i = 0; i < n_; ++i) y.push_back(X[i] - t.x0[i]);
      RJet r2(n_, order, 0.0), poly(n_, order, t.c0);
      RJet kx(n_, order, 0.0);
      for (int i = 0; i < n_; ++i) {
        r2 = r2 + y[i] * y[i];
        if (t.p[i] != 0) poly = poly + y[i] * t.p[i];
        if (t.k[i] != 0) kx = kx + X[i] * t.k[i];
        for (int j = 0; j < n_; ++j)
          if (t.Q(i, j) != 0) poly = poly + (y[i] * y[j]) * t.Q(i, j);
      }
      const RJet g = exp(r2 * (-1.0 / (t.sigma * t.sigma)));
      const double kv = kx.value();
      const CJet phase = compose(kx, std::array<cd, 5>{std::exp(I_unit * kv), I_unit * std::exp(I_unit * kv),
                                                       -std::exp(I_unit * kv), -I_unit * std::exp(I_unit * kv),
                                                       std::exp(I_unit * kv)});
      sum = sum + (phase * (poly * g)) * t.amp;
    }
    if (cutoff_) {
      RJet r2(n_, order, 0.0);
      for (int i = 0; i < n_; ++i) r2 = r2 + X[i] * X[i];
      const RJet chi = compose(sqrt(r2), cutoff_->derivatives(norm(x)));
      sum = sum * chi;
    }
    return sum;
  }

  // x -> v(s x).
  TestFunction scaled(double s) const {
    std::vector<GaussianTerm> terms = terms_;
    for (auto& t : terms) {
      for (auto& e : t.x0) e /= s;
      for (auto& e : t.p) e *= s;
      for (auto& e : t.k) e *= s;
      t.Q *= s * s;
      t.sigma /= s;
    }
    std::optional<CutoffRamp> cut = cutoff_;
    if (cut) cut = CutoffRamp{cut->r0 / s, cut->width / s};
    return TestFunction(n_, std::move(terms), cut);
  }

  cd value(const Point& x) const {
    cd v;
    std::vector<cd> g;
    value_grad(x, v, g);
    return v;
  }

  // Closed-form value and gradient without jets (hot path of the norm suite).
  void value_grad(const Point& x, cd& v, std::vector<cd>& grad) const {
    v = 0;
    grad.assign(n_, cd(0));
    double chi = 1, dchi = 0;
    if (cutoff_) {
      const auto c = cutoff_->derivatives(norm(x));
      chi = c[0];
      dchi = c[1];
      if (chi == 0 && dchi == 0) return;
    }
    double y[16];
    double* yy = n_ <= 16 ? y : new double[n_];
    for (const auto& t : terms_) {
      double r2 = 0, kx = 0, poly = t.c0;
      for (int i = 0; i < n_; ++i) {
        yy[i] = x[i] - t.x0[i];
        r2 += yy[i] * yy[i];
        kx += t.k[i] * x[i];
        poly += t.p[i] * yy[i];
      }
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) poly += t.Q(i, j) * yy[i] * yy[j];
      const double s2 = t.sigma * t.sigma;
      const double g = std::exp(-r2 / s2);
      const cd e = std::exp(I_unit * kx) * t.amp;
      v += e * (poly * g);
      for (int i = 0; i < n_; ++i) {
        double dp = t.p[i];
        for (int j = 0; j < n_; ++j) dp += (t.Q(i, j) + t.Q(j, i)) * yy[j];
        grad[i] += e * g * (cd(dp - 2.0 * yy[i] / s2 * poly) + I_unit * t.k[i] * poly);
      }
    }
    if (yy != y) delete[] yy;
    if (cutoff_) {
      const double r = norm(x);
      for (int i = 0; i < n_; ++i) grad[i] = grad[i] * chi + v * (dchi * x[i] / r);
      v *= chi;
    }
  }

 private:
  int n_ = 3;
  std::vector<GaussianTerm> terms_;
  std::optional<CutoffRamp> cutoff_;
};

struct TestFunctionOptions {
  int terms = 2;
  double center_scale = 1.0;
  double sigma_min = 0.6;
  double sigma_max = 2.0;
  double poly_scale = 0.5;
  double wave_scale = 1.0;
  double cutoff_r0 = 0.0;  // > 0 multiplies by a ramp vanishing on |x| = cutoff_r0
  double cutoff_width = 1.0;
};

inline TestFunction random_test_function(int n, Rng& rng, const TestFunctionOptions& o = {}) {
  std::vector<GaussianTerm> terms;
  for (int m = 0; m < o.terms; ++m) {
    GaussianTerm t;
    t.amp = cd(rng.normal(), rng.normal());
    t.x0.resize(n);
    for (auto& e : t.x0) e = o.center_scale * rng.uniform(-1, 1);
    t.sigma = rng.uniform(o.sigma_min, o.sigma_max);
    t.c0 = 1.0 + 0.5 * rng.uniform(-1, 1);
    t.p.resize(n);
    for (auto& e : t.p) e = o.poly_scale * rng.normal();
    t.Q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double q = 0.5 * o.poly_scale * rng.normal();
        t.Q(i, j) = q;
        t.Q(j, i) = q;
      }
    t.k.resize(n);
    for (auto& e : t.k) e = o.wave_scale * rng.normal();
    terms.push_back(std::move(t));
  }
  std::optional<CutoffRamp> cut;
  if (o.cutoff_r0 > 0) cut = CutoffRamp{o.cutoff_r0, o.cutoff_width};
  return TestFunction(n, std::move(terms), cut);
}

// grad v + i b v from jets of v (order >= 1) and b (order >= 0).
inline std::vector<CJet> covariant_grad_jets(const CJet& v, const std::vector<RJet>& b) {
  const int n = v.dim();
  std::vector<CJet> g;
  g.reserve(n);
  for (int k = 0; k < n; ++k) g.push_back(v.partial(k) + (b[k] * v) * I_unit);
  return g;
}

inline std::vector<cd> covariant_grad(const TestFunction& v, const VectorField& b, const Point& x) {
  cd val;
  std::vector<cd> g;
  v.value_grad(x, val, g);
  const auto bv = b.values(x);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += I_unit * bv[k] * val;
  return g;
}

// Four-term expansion of d^b_j(a_jk d^b_k v): d_j(a_jk d_k v) + i d_j(a_jk b_k v)
// + i b_j a_jk d_k v - b_j a_jk b_k v. Needs v to order 2, a and b to order 1.
inline CJet apply_Ab_jet(const CJet& v, const std::vector<RJet>& a, const std::vector<RJet>& b) {
  const int n = v.dim();
  std::vector<CJet> dv;
  for (int k = 0; k < n; ++k) dv.push_back(v.partial(k));
  const int order = std::min({v.order() - 2, a[0].order() - 1, b[0].order() - 1});
  CJet t1(n, order, 0.0), t2(n, order, 0.0), t34(n, order, 0.0);
  for (int j = 0; j < n; ++j) {
    CJet flux(n, order + 1, 0.0), mag(n, order + 1, 0.0);
    for (int k = 0; k < n; ++k) {
      const RJet& ajk = a[j * n + k];
      flux = flux + ajk * dv[k];
      mag = mag + (ajk * b[k]) * v;
      t34 = t34 + ((b[j] * ajk) * dv[k]) * I_unit - ((b[j] * ajk) * b[k]) * v;
    }
    t1 = t1 + flux.partial(j);
    t2 = t2 + mag.partial(j) * I_unit;
  }
  return t1 + t2 + t34;
}

inline cd apply_Ab(const TestFunction& v, const CoefficientSet& C, const Point& x) {
  return apply_Ab_jet(v.jet(x, 2), C.a.jets(x, 1), C.b.jets(x, 1)).value();
}

// b = 0 form a_jk d_j d_k v + (d_j a_jk) d_k v, from independent jet entries.
inline cd apply_A_nondivergence(const TestFunction& v, const MatrixField& a, const Point& x) {
  const int n = v.dim();
  const CJet vj = v.jet(x, 2);
  const auto aj = a.jets(x, 1);
  cd s = 0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const RJet& ajk = aj[j * n + k];
      s += ajk.value() * vj.d(j, k) + ajk.d(j) * vj.d(k);
    }
  return s;
}

// f := A^b v - c v + (lambda + i eps) v in closed form.
inline cd manufactured_rhs(const TestFunction& v, const CoefficientSet& C, double lambda, double eps,
                           const Point& x) {
  const CJet vj = v.jet(x, 2);
  const cd Av = apply_Ab_jet(vj, C.a.jets(x, 1), C.b.jets(x, 1)).value();
  return Av + (cd(lambda, eps) - C.c.value(x)) * vj.value();
}

struct StarshapedReport {
  bool pass = true;
  bool empty_obstacle = false;
  double worst_value = -std::numeric_limits<double>::infinity();
  Point worst_point;
  int samples = 0;
};

// Samples a(x) x . nu on the boundary; pass iff the max is <= 1e-12.
inline StarshapedReport starshaped_check(const DomainSpec& domain, const MatrixField& a, int nsamples,
                                         std::uint64_t seed = 7) {
  StarshapedReport rep;
  if (domain.empty()) {
    rep.empty_obstacle = true;
    return rep;
  }
  const auto samples = domain.boundary_samples(nsamples, seed);
  rep.samples = static_cast<int>(samples.size());
  for (const auto& s : samples) {
    const Eigen::MatrixXd A = a.value(s.x);
    double val = 0;
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) val += A(i, j) * s.x[j] * s.normal[i];
    if (val > rep.worst_value) {
      rep.worst_value = val;
      rep.worst_point = s.x;
    }
  }
  rep.pass = rep.worst_value <= 1e-12;
  return rep;
}

}  // namespace helmest
