#pragma once

// Sampled estimates of the structural constants of (a, b, c) and the
// pass/fail checks built from them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helmest/fields.hpp"
#include "helmest/rng.hpp"

namespace helmest {

enum class Mode { homogeneous, nonhomogeneous };

inline const char* to_string(Mode m) { return m == Mode::homogeneous ? "homogeneous" : "nonhomogeneous"; }

struct SampleCloudSpec {
  double r_min = 1e-3;
  double r_max = 1e3;
  int shells = 60;
  int directions = 26;
  int quasi_random = 10000;
};

struct SampleCloud {
  int n = 3;
  SampleCloudSpec spec;
  std::vector<Point> points;
  std::vector<double> radii;
};

namespace detail {

inline std::vector<Point> cloud_directions(int n, int count) {
  std::vector<Point> dirs;
  if (n == 3 && count == 26) {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          const double s = std::sqrt(double(i * i + j * j + k * k));
          dirs.push_back({i / s, j / s, k / s});
        }
    return dirs;
  }
  for (int i = 0; i < n && static_cast<int>(dirs.size()) < std::max(count, 2 * n); ++i) {
    Point e(n, 0.0);
    e[i] = 1;
    dirs.push_back(e);
    e[i] = -1;
    dirs.push_back(e);
  }
  // Remaining directions: Halton points pushed through Box-Muller.
  for (std::uint64_t s = 1; static_cast<int>(dirs.size()) < count; ++s) {
    Point d(n);
    double norm2 = 0;
    for (int i = 0; i < n; i += 2) {
      const double u1 = std::max(radical_inverse(s, nth_prime(i)), 1e-12);
      const double u2 = radical_inverse(s, nth_prime(i + 1));
      const double rad = std::sqrt(-2 * std::log(u1));
      d[i] = rad * std::cos(2 * std::numbers::pi * u2);
      if (i + 1 < n) d[i + 1] = rad * std::sin(2 * std::numbers::pi * u2);
    }
    for (double e : d) norm2 += e * e;
    for (auto& e : d) e /= std::sqrt(norm2);
    dirs.push_back(d);
  }
  return dirs;
}

}  // namespace detail

// Log-radial shells times fixed directions, plus a Halton fill with
// log-uniform radii. Doubling `shells`-1 and `quasi_random` gives a superset.
inline SampleCloud make_cloud(int n, const DomainSpec& domain, const SampleCloudSpec& spec = {}) {
  SampleCloud cloud;
  cloud.n = n;
  cloud.spec = spec;
  double rmin = spec.r_min;
  if (domain.kind() == DomainSpec::Kind::ball) rmin = std::max(rmin, domain.r0());
  if (!(rmin > 0 && spec.r_max > rmin)) throw ConfigError("sample cloud radius window is empty");
  const double l0 = std::log(rmin), l1 = std::log(spec.r_max);
  auto push = [&](Point x) {
    if (!domain.contains(x)) return;
    cloud.radii.push_back(norm(x));
    cloud.points.push_back(std::move(x));
  };
  const auto dirs = detail::cloud_directions(n, spec.directions);
  for (int s = 0; s < spec.shells; ++s) {
    const double r = std::exp(spec.shells == 1 ? l0 : l0 + (l1 - l0) * s / (spec.shells - 1));
    for (const auto& d : dirs) {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = r * d[i];
      push(std::move(x));
    }
  }
  for (int q = 1; q <= spec.quasi_random; ++q) {
    const double r = std::exp(l0 + (l1 - l0) * radical_inverse(q, 2));
    Point d(n);
    double norm2 = 0;
    for (int i = 0; i < n; i += 2) {
      const double u1 = std::max(radical_inverse(q, nth_prime(i + 1)), 1e-12);
      const double u2 = radical_inverse(q, nth_prime(i + 2));
      const double rad = std::sqrt(-2 * std::log(u1));
      d[i] = rad * std::cos(2 * std::numbers::pi * u2);
      if (i + 1 < n) d[i + 1] = rad * std::sin(2 * std::numbers::pi * u2);
    }
    for (double e : d) norm2 += e * e;
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = r * d[i] / std::sqrt(norm2);
    push(std::move(x));
  }
  return cloud;
}

inline SampleCloudSpec refined(const SampleCloudSpec& s) {
  SampleCloudSpec r = s;
  r.shells = 2 * s.shells - 1;
  r.quasi_random = 2 * s.quasi_random;
  return r;
}

inline double spectral_norm_sym(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double spectral_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace detail {

// Derivative sums |a'|, |a''|, |a'''|: operator norms summed over sorted multi-indices.
inline std::array<double, 3> derivative_norms(const std::vector<RJet>& a, int n) {
  std::array<double, 3> out{};
  Eigen::MatrixXd D(n, n);
  int idx[3];
  for (int k = 1; k <= 3; ++k) {
    const int len = detail::ipow(n, k);
    for (int t = 0; t < len; ++t) {
      detail::decode(t, k, n, idx);
      if (!std::is_sorted(idx, idx + k)) continue;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = a[i * n + j].block(k)[t];
      out[k - 1] += spectral_norm_sym(D);
    }
  }
  return out;
}

// 2|a|_HS^2 + abar^2 - 6 abar ahat + 15 ahat^2 - 12 |a xhat|^2.
inline double caseA_value(const Eigen::MatrixXd& A, const Point& x) {
  const int n = static_cast<int>(x.size());
  const double r = norm(x);
  if (r == 0) throw OriginSample("x-hat is undefined at the origin");
  Eigen::VectorXd xh(n);
  for (int i = 0; i < n; ++i) xh[i] = x[i] / r;
  const Eigen::VectorXd ax = A * xh;
  const double ahat = xh.dot(ax), abar = A.trace(), hs2 = A.squaredNorm();
  return 2 * hs2 + abar * abar - 6 * abar * ahat + 15 * ahat * ahat - 12 * ax.squaredNorm();
}

// Per-point quantities needed by every estimator.
struct PointData {
  double lam_min = 0, lam_max = 0;
  double da[3] = {0, 0, 0};
  double db = 0;
  double c = 0;
  double axgradc = 0;
  double a_minus_I = 0;
  double caseA = 0;
};

inline PointData evaluate_point(const CoefficientSet& C, const Point& x) {
  const int n = C.n;
  PointData d;
  Eigen::MatrixXd A(n, n);
  if (C.a.is_constant()) {
    A = C.a.value(x);
  } else {
    const auto aj = C.a.jets(x, 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = aj[i * n + j].value();
    const auto dn = derivative_norms(aj, n);
    for (int k = 0; k < 3; ++k) d.da[k] = dn[k];
  }
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw NonSymmetric("a(x) is not symmetric at a sample point");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  d.lam_min = es.eigenvalues().minCoeff();
  d.lam_max = es.eigenvalues().maxCoeff();
  d.a_minus_I = spectral_norm_sym(A - Eigen::MatrixXd::Identity(n, n));
  d.caseA = caseA_value(A, x);
  if (!C.b.is_constant()) d.db = spectral_norm(C.b.db(x));
  if (C.c.is_constant()) {
    d.c = C.c.value(x);
  } else {
    const RJet cj = C.c.jet(x, 1);
    d.c = cj.value();
    Eigen::VectorXd g(n), xv(n);
    for (int i = 0; i < n; ++i) {
      g[i] = cj.d(i);
      xv[i] = x[i];
    }
    d.axgradc = (A * xv).dot(g);
  }
  return d;
}

}  // namespace detail

// A sampled supremum; `divergent` means the weighted quantity keeps growing
// into the outer decade and the constant is reported as infinite.
struct SupEstimate {
  double sampled = 0;
  bool divergent = false;
  Point argmax;
  double refinement_change = 0;  // relative change on the 2x cloud

  double value() const { return divergent ? std::numeric_limits<double>::infinity() : sampled; }
};

struct ConditionRecord {
  std::string name;
  double measured = 0;
  double threshold = 0;
  bool pass = false;
  bool boundary = false;  // within 1e-6 relative of the threshold
  bool strict = false;
  bool gating = true;  // informational records do not affect the verdict
  Point argmax;
  std::string note;
};

struct ConditionReport {
  Mode mode = Mode::homogeneous;
  int n = 3;
  double delta = 0.5;
  double N = 0, nu = 0;
  SupEstimate Ca, Cb, Cminus, Cplus, Cc, CI;
  double caseA_min = 0;
  Point caseA_argmin;
  std::optional<double> K0, K, M0;
  std::vector<ConditionRecord> records;
  bool trapped = false;
  int cloud_points = 0;
  std::string matrix_norm = "operator";

  bool pass() const {
    for (const auto& r : records)
      if (r.gating && !r.pass) return false;
    return true;
  }
};

inline ConditionRecord make_record(std::string name, double measured, double threshold, bool strict,
                                   bool gating = true) {
  ConditionRecord r;
  r.name = std::move(name);
  r.measured = measured;
  r.threshold = threshold;
  r.strict = strict;
  r.gating = gating;
  const double scale = std::max(1.0, std::abs(threshold));
  if (strict)
    r.pass = measured < threshold;
  else
    r.pass = measured <= threshold + 1e-12 * scale;
  r.boundary = std::isfinite(measured) && std::abs(measured - threshold) <= 1e-6 * scale;
  return r;
}

// ---- individual estimators ----------------------------------------------

inline std::pair<double, double> estimate_spectral_bounds(const MatrixField& a, const SampleCloud& cloud) {
  double N = -std::numeric_limits<double>::infinity(), nu = std::numeric_limits<double>::infinity();
  if (cloud.points.empty()) throw ConfigError("empty sample cloud");
  const int n = a.dim();
  const bool constant = a.is_constant();
  for (const auto& x : cloud.points) {
    const Eigen::MatrixXd A = a.value(x);
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
      throw NonSymmetric("a(x) is not symmetric at a sample point");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    N = std::max(N, es.eigenvalues().maxCoeff());
    nu = std::min(nu, es.eigenvalues().minCoeff());
    if (constant) break;
  }
  (void)n;
  return {N, nu};
}

// Sup of w(x) over the cloud with the outer-decade divergence rule.
template <class F>
SupEstimate sampled_sup(const SampleCloud& cloud, F&& weighted) {
  SupEstimate s;
  double mid = 0, outer = 0;
  const double rmin = *std::min_element(cloud.radii.begin(), cloud.radii.end());
  const double rmax = cloud.spec.r_max;
  // Middle decade [10^-0.5, 10^0.5], shifted outward if the obstacle covers it.
  double mlo = std::pow(10.0, -0.5), mhi = std::pow(10.0, 0.5);
  if (rmin > mlo) {
    mlo = rmin;
    mhi = rmin * 10;
  }
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const double w = weighted(i);
    if (w > s.sampled || s.argmax.empty()) {
      s.argmax = cloud.points[i];
      s.sampled = std::max(s.sampled, w);
    }
    const double r = cloud.radii[i];
    if (r >= mlo && r <= mhi) mid = std::max(mid, w);
    if (r >= rmax / 10) outer = std::max(outer, w);
  }
  s.divergent = outer > 0 && outer > 10 * mid;
  return s;
}

// Holds the per-point data so that every constant is one pass over the cloud.
class CloudEvaluation {
 public:
  CloudEvaluation(const CoefficientSet& C, const SampleCloud& cloud) : cloud_(&cloud) {
    data_.reserve(cloud.points.size());
    const bool all_constant = C.a.is_constant() && C.b.is_constant() && C.c.is_constant();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      if (all_constant && i > 0) {
        // Only caseA depends on the direction.
        auto d = data_.front();
        d.caseA = detail::caseA_value(C.a.value(cloud.points[i]), cloud.points[i]);
        data_.push_back(d);
        continue;
      }
      data_.push_back(detail::evaluate_point(C, cloud.points[i]));
    }
  }
  const SampleCloud& cloud() const { return *cloud_; }
  const detail::PointData& operator[](std::size_t i) const { return data_[i]; }
  std::size_t size() const { return data_.size(); }

 private:
  const SampleCloud* cloud_;
  std::vector<detail::PointData> data_;
};

inline SupEstimate estimate_Ca(const CloudEvaluation& ev, double delta) {
  const auto& cl = ev.cloud();
  return sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    const auto& d = ev[i];
    return (d.da[0] + r * d.da[1] + r * r * d.da[2]) * std::pow(1 + r * r, 0.5 * (1 + delta));
  });
}

inline SupEstimate estimate_Cb(const CloudEvaluation& ev, double delta, Mode mode) {
  const auto& cl = ev.cloud();
  return sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    const double w = mode == Mode::homogeneous ? std::pow(r, 2 + delta) + std::pow(r, 2 - delta)
                                               : std::pow(r, 2 + delta) + r;
    return ev[i].db * w;
  });
}

// Returns squared-root constants (C_-, C_+, C_c).
inline std::array<SupEstimate, 3> estimate_Cpm_Cc(const CloudEvaluation& ev, double delta, Mode mode) {
  const auto& cl = ev.cloud();
  SupEstimate cm = sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    const double w = mode == Mode::homogeneous ? std::pow(r, 2 + delta) + std::pow(r, 2 - delta)
                                               : std::pow(1 + r * r, 0.5 * (2 + delta));
    return std::max(-ev[i].c, 0.0) * w;
  });
  SupEstimate cp = sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    return std::max(ev[i].c, 0.0) * r * r;
  });
  SupEstimate cc = sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    const double w = mode == Mode::homogeneous ? r * std::pow(1 + r * r, 0.5 * (1 + delta))
                                               : std::pow(1 + r * r, 0.5 * (2 + delta));
    return std::max(ev[i].axgradc, 0.0) * w;
  });
  cm.sampled = std::sqrt(cm.sampled);
  cp.sampled = std::sqrt(cp.sampled);
  return {cm, cp, cc};
}

inline SupEstimate estimate_CI(const CloudEvaluation& ev, double delta) {
  const auto& cl = ev.cloud();
  return sampled_sup(cl, [&](std::size_t i) {
    const double r = cl.radii[i];
    return ev[i].a_minus_I * std::pow(1 + r * r, 0.5 * delta);
  });
}

struct CaseAResult {
  bool pass = false;
  double min_value = 0;
  Point argmin;
};

inline CaseAResult pointwise_caseA(const MatrixField& a, const SampleCloud& cloud) {
  CaseAResult res;
  res.min_value = std::numeric_limits<double>::infinity();
  for (const auto& x : cloud.points) {
    const double v = detail::caseA_value(a.value(x), x);
    if (v < res.min_value) {
      res.min_value = v;
      res.argmin = x;
    }
  }
  res.pass = res.min_value >= -1e-12;
  return res;
}

struct RatioCheck {
  bool pass = false;
  double threshold = 0;
  bool strict = false;
  std::string branch;
};

inline RatioCheck check_ratio(double N, double nu, int n) {
  RatioCheck r;
  const double ratio = N / nu;
  if (n <= 46) {
    r.threshold = std::sqrt(double(n * n + 2 * n + 15) / (6.0 * (n + 2)));
    r.branch = "n<=46";
    r.pass = ratio <= r.threshold + 1e-12 * r.threshold;
  } else {
    r.threshold = double(3 * n - 1) / (n + 3);
    r.branch = "n>=47";
    r.strict = true;
    r.pass = ratio < r.threshold;
  }
  return r;
}

struct KConstants {
  double K0 = 0, K = 0, M0 = 0;
};

inline double K0_of(double N, double nu, int n) { return (3.0 * n - 1) / 2 - (n + 3) * N / (2 * nu); }

// Third entry of K in its unsimplified closed form.
inline double K_third_term_alt(double N, double nu, int n) {
  return (n + 3) * nu * nu / 18 * ((3.0 * n - 1) / (n + 3) - N / nu);
}

inline KConstants compute_K_M0(double N, double nu, int n, double Cplus) {
  KConstants k;
  k.K0 = K0_of(N, nu, n);
  if (!(k.K0 > 0)) throw Trapped("N/nu = " + std::to_string(N / nu) + " violates the ratio condition (K0 <= 0)");
  k.K = std::min({1.0, nu * nu / 9, nu * nu * k.K0 / 9});
  k.M0 = 64.0 * n * n / (k.K * k.K) * (nu + 1) * (nu + 1) * (Cplus + nu + 1) * (Cplus + nu + 1);
  return k;
}

struct SmallnessCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  bool pass = false;
  bool strict = false;
};

inline std::vector<SmallnessCheck> check_smallness(const ConditionReport& r, Mode mode) {
  std::vector<SmallnessCheck> out;
  auto add = [&](std::string name, double lhs, double rhs, bool strict = false) {
    SmallnessCheck s{std::move(name), lhs, rhs, false, strict};
    s.pass = strict ? lhs < rhs : lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
    out.push_back(s);
  };
  const double d = r.delta;
  if (mode == Mode::homogeneous) {
    const double K = r.K.value_or(0.0);
    const double N = r.N;
    const double Ca = r.Ca.value();
    add("Ca(N+Ca) <= K delta/(24n)", Ca * (N + Ca), K * d / (24.0 * r.n));
    add("Cb <= K delta/(5N^2)", r.Cb.value(), K * d / (5 * N * N));
    add("C- <= K delta/(18N(N+2))", r.Cminus.value(), K * d / (18 * N * (N + 2)));
    add("Cc <= K delta", r.Cc.value(), K * d);
  } else {
    add("Ca <= delta/48000", r.Ca.value(), d / 48000);
    add("CI <= delta/7200", r.CI.value(), d / 7200);
    add("Cb <= delta/920", r.Cb.value(), d / 920);
    add("C- <= delta/5500", r.Cminus.value(), d / 5500);
    add("Cc <= delta/1300", r.Cc.value(), d / 1300);
    add("CI < 1/100", r.CI.value(), 0.01, true);
  }
  return out;
}

inline bool check_positivity(double Cminus, double nu, int n) { return Cminus < (n - 2) * std::sqrt(nu) / 2; }

struct CertifyOptions {
  SampleCloudSpec cloud;
  bool refine = true;  // re-run on the 2x cloud for the stability metric
  int boundary_samples = 2000;
};

namespace detail {

inline void fill_constants(ConditionReport& rep, const CoefficientSet& C, const SampleCloud& cloud) {
  const CloudEvaluation ev(C, cloud);
  rep.cloud_points = static_cast<int>(cloud.points.size());
  rep.N = -std::numeric_limits<double>::infinity();
  rep.nu = std::numeric_limits<double>::infinity();
  rep.caseA_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    rep.N = std::max(rep.N, ev[i].lam_max);
    rep.nu = std::min(rep.nu, ev[i].lam_min);
    if (ev[i].caseA < rep.caseA_min) {
      rep.caseA_min = ev[i].caseA;
      rep.caseA_argmin = cloud.points[i];
    }
  }
  rep.Ca = estimate_Ca(ev, rep.delta);
  rep.Cb = estimate_Cb(ev, rep.delta, rep.mode);
  const auto cpm = estimate_Cpm_Cc(ev, rep.delta, rep.mode);
  rep.Cminus = cpm[0];
  rep.Cplus = cpm[1];
  rep.Cc = cpm[2];
  rep.CI = estimate_CI(ev, rep.delta);
}

inline double rel_change(double a, double b) {
  if (a == b) return 0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

// Estimates every constant on the cloud and evaluates the hypotheses of the
// requested mode. Never throws on a failed hypothesis; Trapped is recorded.
inline ConditionReport certify(const CoefficientSet& C, const DomainSpec& domain, Mode mode,
                               const CertifyOptions& opt = {}) {
  C.validate();
  ConditionReport rep;
  rep.mode = mode;
  rep.n = C.n;
  rep.delta = C.delta;
  const SampleCloud cloud = make_cloud(C.n, domain, opt.cloud);
  detail::fill_constants(rep, C, cloud);
  if (opt.refine) {
    ConditionReport fine = rep;
    detail::fill_constants(fine, C, make_cloud(C.n, domain, refined(opt.cloud)));
    rep.Ca.refinement_change = detail::rel_change(rep.Ca.sampled, fine.Ca.sampled);
    rep.Cb.refinement_change = detail::rel_change(rep.Cb.sampled, fine.Cb.sampled);
    rep.Cminus.refinement_change = detail::rel_change(rep.Cminus.sampled, fine.Cminus.sampled);
    rep.Cplus.refinement_change = detail::rel_change(rep.Cplus.sampled, fine.Cplus.sampled);
    rep.Cc.refinement_change = detail::rel_change(rep.Cc.sampled, fine.Cc.sampled);
    rep.CI.refinement_change = detail::rel_change(rep.CI.sampled, fine.CI.sampled);
  }

  {
    ConditionRecord r;
    r.name = "nu > 0";
    r.measured = rep.nu;
    r.strict = true;
    r.pass = rep.nu > 0;
    rep.records.push_back(r);
  }

  const auto star = starshaped_check(domain, C.a, opt.boundary_samples);
  {
    ConditionRecord r = make_record("a(x)x.nu <= 0 on the boundary", star.empty_obstacle ? 0.0 : star.worst_value,
                                    0.0, false);
    r.argmax = star.worst_point;
    if (star.empty_obstacle) r.note = "empty obstacle";
    rep.records.push_back(r);
  }

  auto sup_record = [&](const std::string& name, const SupEstimate& s, double threshold, bool strict = false) {
    ConditionRecord r = make_record(name, s.value(), threshold, strict);
    r.argmax = s.argmax;
    if (s.divergent) r.note = "divergent";
    rep.records.push_back(r);
  };

  if (mode == Mode::homogeneous) {
    if (rep.nu > 0) {
      const RatioCheck rc = check_ratio(rep.N, rep.nu, C.n);
      ConditionRecord r = make_record("N/nu ratio (" + rc.branch + ")", rep.N / rep.nu, rc.threshold, rc.strict);
      rep.records.push_back(r);
      try {
        const KConstants k = compute_K_M0(rep.N, rep.nu, C.n, rep.Cplus.value());
        rep.K0 = k.K0;
        rep.K = k.K;
        rep.M0 = k.M0;
      } catch (const Trapped& e) {
        rep.trapped = true;
        ConditionRecord t = make_record("K0 > 0", K0_of(rep.N, rep.nu, C.n), 0.0, true);
        t.pass = false;
        t.note = e.what();
        rep.records.push_back(t);
      }
    }
    ConditionRecord ca = make_record("pointwise caseA >= 0", -rep.caseA_min, 0.0, false, false);
    ca.measured = rep.caseA_min;
    ca.pass = rep.caseA_min >= -1e-12;
    ca.argmax = rep.caseA_argmin;
    ca.note = "informational";
    rep.records.push_back(ca);
    if (!std::isfinite(rep.Cplus.value())) {
      ConditionRecord r = make_record("C+ finite", rep.Cplus.value(), std::numeric_limits<double>::infinity(), true);
      r.note = "divergent";
      rep.records.push_back(r);
    }
    if (rep.K) {
      for (const auto& s : check_smallness(rep, mode)) {
        ConditionRecord r = make_record(s.name, s.lhs, s.rhs, s.strict);
        rep.records.push_back(r);
      }
    }
    if (rep.nu > 0) {
      ConditionRecord r =
          make_record("C- < (n-2)sqrt(nu)/2", rep.Cminus.value(), (C.n - 2) * std::sqrt(rep.nu) / 2, true);
      rep.records.push_back(r);
    }
  } else {
    if (C.n != 3) {
      ConditionRecord r = make_record("n == 3", C.n, 3, false);
      r.pass = false;
      rep.records.push_back(r);
    }
    if (!std::isfinite(rep.Cplus.value())) {
      ConditionRecord r = make_record("C+ finite", rep.Cplus.value(), std::numeric_limits<double>::infinity(), true);
      r.note = "divergent";
      rep.records.push_back(r);
    }
    const auto checks = check_smallness(rep, mode);
    const SupEstimate* sup_for[] = {&rep.Ca, &rep.CI, &rep.Cb, &rep.Cminus, &rep.Cc, &rep.CI};
    for (std::size_t i = 0; i < checks.size(); ++i) sup_record(checks[i].name, *sup_for[i], checks[i].rhs, checks[i].strict);
  }
  return rep;
}

}  // namespace helmest
