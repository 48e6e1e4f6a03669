#pragma once

// Property battery for the weighted-norm inequalities: every inequality is
// evaluated by shell quadrature on random pairs of test functions and checked
// as lhs <= rhs (1 + slack).

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "helmest/errors.hpp"
#include "helmest/fields.hpp"
#include "helmest/norms.hpp"
#include "helmest/presets.hpp"
#include "helmest/rng.hpp"

namespace helmest {

struct InequalityOutcome {
  std::string name;
  std::string setting;
  int trials = 0;
  int violations = 0;
  double worst_ratio = 0;  // max over trials of lhs / rhs
  double worst_lhs = 0, worst_rhs = 0;
  bool pass() const { return trials > 0 && violations == 0; }
};

struct LemmaReport {
  int n = 3;
  double delta = 0.5;
  double slack = 1e-3;
  std::vector<InequalityOutcome> items;
  double seconds = 0;
  bool pass() const {
    for (const auto& i : items)
      if (!i.pass()) return false;
    return !items.empty();
  }
};

struct LemmaSuiteOptions {
  int n = 3;
  double delta = 0.5;
  int trials = 100;
  double slack = 1e-3;
  std::uint64_t seed = 1;
  TestFunctionOptions functions{};
  std::optional<VectorField> b;  // default: swirl field of strength `beta`
  double beta = 0.5;
  bool exterior = true;  // also run on the exterior of a ball with vanishing test functions
  double obstacle_r0 = 1.0;
  int per_octave = 20;
  // |v||w| and |v||grad v| have cone points on the sphere where v or w vanishes,
  // so the angular rule needs more nodes than for |v|^2 alone.
  double angular_scale = 1.5;
  int refine_every = 25;  // refinement check on trial 0 and every k-th trial; 0 disables
};

// Channels of a (v, w) pair.
enum PairChannel { kPV2 = 0, kPG2, kPVG, kPW2, kPVW, kPairChannels };

struct PairProfiles {
  Profile V, G, VG, W, VW;
};

inline PairProfiles pair_profiles(const TestFunction& v, const TestFunction& w, const VectorField& b,
                                  const ShellGrid& grid, double r0 = 0.0, double resolution_scale = 1.0) {
  const int n = v.dim();
  const bool zero_b = is_zero_field(b);
  const TestFunctionPlan plan({&v, &w}, 96, resolution_scale);
  auto density = [v, w, b, zero_b](const Point& x, double* out) {
    cd val, wv;
    double g2;
    covariant_density(v, b, zero_b, x, val, g2);
    std::vector<cd> dummy;
    w.value_grad(x, wv, dummy);
    out[kPV2] = std::norm(val);
    out[kPG2] = g2;
    out[kPVG] = std::abs(val) * std::sqrt(g2);
    out[kPW2] = std::norm(wv);
    out[kPVW] = std::abs(val) * std::abs(wv);
  };
  const ShellFn fn = zero_outside(
      plan, sphere_shells(n, density, kPairChannels, [plan](double r) { return plan.resolution(r); }, r0),
      kPairChannels);
  // Refinement between nodes interpolates; the fine-grid check guards its accuracy.
  auto p = compute_profiles(grid, kPairChannels, fn, n, false);
  return {p[kPV2], p[kPG2], p[kPVG], p[kPW2], p[kPVW]};
}

struct SideBySide {
  double lhs = 0, rhs = 0;
};

namespace detail {

// sup over R in [Rmin, rho_last_valid] of f(R), grid first, then golden section.
template <class AtR>
double refined_sup(const ShellGrid& g, int i_begin, int i_end, AtR at) {
  double best = -1;
  int arg = -1;
  for (int i = i_begin; i <= i_end; ++i) {
    const double val = at(g.rho[i]);
    if (val > best) {
      best = val;
      arg = i;
    }
  }
  if (arg < 0) return 0.0;
  const double ta = std::log(g.rho[std::max(arg - 1, i_begin)]);
  const double tb = std::log(g.rho[std::min(arg + 1, i_end)]);
  if (tb > ta) best = std::max(best, golden_max([&](double t) { return at(std::exp(t)); }, ta, tb).second);
  return best;
}

// int_a^b w s drho in pieces no longer than four grid spacings.
inline double piecewise_between(const Profile& p, double a, double b) {
  if (b <= a) return 0.0;
  const double span = std::log(b / a);
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / (4 * p.grid().dt()))));
  double sum = 0;
  for (int k = 0; k < pieces; ++k)
    sum += p.integrate_between(a * std::exp(span * k / pieces), a * std::exp(span * (k + 1) / pieces));
  return sum;
}

inline double bracket(double r) { return std::sqrt(1 + r * r); }

}  // namespace detail

inline const std::vector<std::string>& inequality_names() {
  static const std::vector<std::string> names = {
      "inverse_radius_Ydot_by_Xdot",
      "inverse_bracket_Y_by_X",
      "origin_weight_by_Xdot",
      "exterior_bracket_weight_below_power_weight",
      "exterior_power_weight_by_X",
      "bracket_weight_by_Y",
      "Y_below_Ydot",
      "annulus_over_radius_by_X",
      "annulus_over_radius_by_Xdot",
      "tail_by_Xdot",
      "tail_by_X",
      "annulus_product_Xdot_Ydot",
      "ball_product_Xdot_Ydot_dual",
      "annulus_product_X_Y",
      "ball_product_X_Y_dual",
      "split_product_Xdot_Ydot",
      "exterior_product_X_Y",
      "magnetic_hardy",
      "inverse_radius_Y_by_gradient",
      "gradient_product_by_Y_and_X",
      "X_by_exterior_shells_and_gradient",
      "max_weight_by_X_and_gradient",
      "Y_below_exterior_ball_sup",
      "exterior_ball_sup_below_sqrt2_Y",
      "Ydot_dyadic_lower",
      "Ydot_dyadic_upper",
      "Y_dyadic_lower",
      "Y_dyadic_upper",
      "duality_Ydot_Ydot_dual",
  };
  return names;
}

// Both sides of every inequality for one pair, in the order of inequality_names().
// Inequalities quantified over all R are evaluated at R = 2^{k/4} and report the
// instance with the largest lhs/rhs.
inline std::vector<SideBySide> evaluate_inequalities(const PairProfiles& P, int n, double delta) {
  using detail::bracket;
  const ShellGrid& g = P.V.grid();
  const int last = g.size() - 1;
  const int one = g.node_of_pow2(0);
  const int po = g.per_octave;
  const int stride = std::max(1, po / 4);
  auto total = [&](const Profile& p, const std::function<double(double)>& w) {
    return p.inner(w) + p.integrate(0, last, w);
  };
  auto below_one = [&](const Profile& p, const std::function<double(double)>& w) {
    return p.inner(w) + p.integrate(0, one, w);
  };
  auto above_one = [&](const Profile& p, const std::function<double(double)>& w) {
    return p.integrate(one, last, w);
  };

  const double Xd = norm_Xdot(P.V), X = norm_X(P.V), Yd = norm_Ydot(P.V), Y = norm_Y(P.V);
  const double YdW = norm_Ydot(P.W), YW = norm_Y(P.W);
  const double YdsW = norm_Ydot_dual(P.W), YsW = norm_Y_dual(P.W);
  const double YG = norm_Y(P.G);
  const double d = delta;

  std::vector<SideBySide> out;
  // Inverse-weight embeddings.
  out.push_back({norm_Ydot(P.V.weighted([](double r) { return 1 / (r * r); })), Xd});
  out.push_back({norm_Y(P.V.weighted([](double r) { return 1 / (1 + r * r); })), X});
  out.push_back(
      {total(P.V, [d](double r) { return 1 / (r * r * std::pow(bracket(r), 1 + d)); }), 2 / d * Xd * Xd});
  const double ext_pow = above_one(P.V, [d](double r) { return std::pow(r, -3 - d); });
  out.push_back({above_one(P.V, [d](double r) { return 1 / (r * r * r * std::pow(bracket(r), d)); }), ext_pow});
  out.push_back({ext_pow, 2 / d * X * X});
  out.push_back({total(P.V, [d](double r) { return std::pow(bracket(r), -1 - d); }), 8 / d * Y * Y});
  out.push_back({Y * Y, Yd * Yd});

  // Annulus and tail sups.
  {
    const Profile q = P.V.weighted([](double r) { return 1 / r; });
    const auto C = q.cumulative();
    auto node_annulus = [&](int i) { return (C[i + po] - C[i]) / (g.rho[i] * g.rho[i]); };
    auto at = [&](double R) { return detail::piecewise_between(q, R, 2 * R) / (R * R); };
    auto annulus_sup = [&](int i_begin) {
      double best = -1;
      int arg = -1;
      for (int i = i_begin; i + po <= last; ++i)
        if (node_annulus(i) > best) best = node_annulus(i), arg = i;
      if (arg < 0) return 0.0;
      const double ta = std::log(g.rho[std::max(arg - 1, i_begin)]), tb = std::log(g.rho[std::min(arg + 1, last - po)]);
      return std::max(best, detail::golden_max([&](double t) { return at(std::exp(t)); }, ta, tb).second);
    };
    out.push_back({annulus_sup(one), 3 * X * X});
    out.push_back({annulus_sup(0), 1.5 * Xd * Xd});
  }
  {
    const Profile q = P.V.weighted([n](double r) { return std::pow(r, -n - 2.0); });
    const auto C = q.cumulative({}, false);
    auto at = [&](double R) {
      const double t = (std::log(R) - std::log(g.rho[0])) / g.dt();
      const int hi = std::clamp(static_cast<int>(std::ceil(t)), 0, last);
      return std::pow(R, n - 1.0) * (C[last] - C[hi] + detail::piecewise_between(q, R, g.rho[hi]));
    };
    out.push_back({detail::refined_sup(g, 0, last, at), Xd * Xd / (n - 1)});
    out.push_back({detail::refined_sup(g, one, last, at), 2 * X * X / (n - 1)});
  }

  // Products over annuli and balls, for R = 2^{k/4}.
  {
    const auto C = P.VW.cumulative();
    auto worst = [&](auto lhs_of, auto rhs_of) {
      SideBySide w{0, 1};
      double ratio = -1;
      for (int i = 0; i <= last; i += stride) {
        const double l = lhs_of(i), r = rhs_of(g.rho[i]);
        if (l <= 0) continue;
        const double q = r > 0 ? l / r : std::numeric_limits<double>::infinity();
        if (q > ratio) ratio = q, w = {l, r};
      }
      return ratio < 0 ? SideBySide{0, 0} : w;
    };
    auto annulus = [&](int i) { return i + po <= last ? C[i + po] - C[i] : 0.0; };
    auto ball = [&](int i) { return C[i]; };
    out.push_back(worst(annulus, [&](double R) { return 3 * R * R * Xd * YdW; }));
    out.push_back(worst(ball, [&](double R) { return R * Xd * YdsW; }));
    out.push_back(worst(annulus, [&](double R) { return 3 * (1 + R * R) * X * YW; }));
    out.push_back(worst(ball, [&](double R) { return bracket(R) * X * YsW; }));
  }
  {
    const double ext = above_one(P.VW, [d](double r) { return std::pow(r, -2 - d); });
    out.push_back({below_one(P.VW, [d](double r) { return std::pow(r, d - 2); }) + ext, 9 / d * Xd * YdW});
    out.push_back({ext, 12 / d * X * YW});
  }

  // Gradient (Hardy-type) inequalities.
  out.push_back({std::sqrt(total(P.V, [](double r) { return 1 / (r * r); })),
                 2.0 / (n - 2) * std::sqrt(total(P.G, {}))});
  {
    const double l = norm_Y(P.V.weighted([](double r) { return 1 / (r * r); }));
    out.push_back({l * l, 6 * YG * YG + 3 * X * X});
  }
  out.push_back({below_one(P.VG, [](double r) { return 1 / r; }) +
                     above_one(P.VG, [d](double r) { return std::pow(r, -2 - d); }),
                 9 / d * (YG * YG + X * X)});
  {
    const double shells = shell_sup(P.V, [](double R) { return 1 / (R * R); }, 1.0).value;
    out.push_back({X * X, 4 * shells + 13 * YG * YG});
  }
  out.push_back({total(P.V, [d](double r) { return 1 / (r * std::pow(bracket(r), 1 + d) * std::max(1.0, r)); }),
                 8 / d * X * X + 9 * below_one(P.G, {})});

  // Equivalences.
  {
    const double ext_sup = ball_sup(P.V, P.V.cumulative(), [](double R) { return 1 / R; }, 1.0).value;
    out.push_back({Y * Y, ext_sup});
    out.push_back({ext_sup, std::sqrt(2.0) * Y * Y});
    const double YdD = norm_Ydot_dyadic(P.V), YD = norm_Y_dyadic(P.V);
    out.push_back({0.5 * YdD, Yd});
    out.push_back({Yd, 2 * YdD});
    out.push_back({YD / 3, Y});
    out.push_back({Y, 3 * YD});
    out.push_back({total(P.VW, {}), 4 * Yd * YdsW});
  }
  return out;
}

namespace detail {

inline void check_refinement(const std::vector<SideBySide>& a, const std::vector<SideBySide>& b, double slack,
                             const std::string& setting) {
  const auto& names = inequality_names();
  auto close = [&](double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return std::abs(x - y) <= slack * scale || scale < 1e-200;
  };
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!close(a[k].lhs, b[k].lhs) || !close(a[k].rhs, b[k].rhs))
      throw QuadratureUnresolved(names[k] + " [" + setting + "]: refinement moved (" + std::to_string(a[k].lhs) +
                                 ", " + std::to_string(a[k].rhs) + ") to (" + std::to_string(b[k].lhs) + ", " +
                                 std::to_string(b[k].rhs) + ")");
}

}  // namespace detail

inline LemmaReport lemma_suite(const LemmaSuiteOptions& opt) {
  if (opt.n < 3) throw ConfigError("lemma suite needs n >= 3");
  if (!(opt.delta > 0 && opt.delta < 1)) throw ConfigError("lemma suite needs 0 < delta < 1");
  if (opt.trials < 1) throw ConfigError("lemma suite needs at least one trial");
  const auto t0 = std::chrono::steady_clock::now();
  const VectorField b = opt.b ? *opt.b : swirl_field(opt.n, opt.delta, opt.beta);
  const auto& names = inequality_names();

  LemmaReport report;
  report.n = opt.n;
  report.delta = opt.delta;
  report.slack = opt.slack;

  struct Setting {
    std::string name;
    double r0;
  };
  std::vector<Setting> settings = {{"whole-space", 0.0}};
  if (opt.exterior) settings.push_back({"exterior", opt.obstacle_r0});

  const ShellGrid grid = make_shell_grid(-10, 10, opt.per_octave);
  const ShellGrid fine = make_shell_grid(-10, 10, 2 * opt.per_octave);
  for (const auto& s : settings) {
    Rng rng(opt.seed + (s.r0 > 0 ? 7919 : 0));
    TestFunctionOptions fo = opt.functions;
    if (s.r0 > 0) fo.cutoff_r0 = s.r0;
    std::vector<TestFunction> fns;
    for (int i = 0; i <= opt.trials; ++i) fns.push_back(random_test_function(opt.n, rng, fo));

    std::vector<InequalityOutcome> items(names.size());
    for (std::size_t k = 0; k < names.size(); ++k) items[k] = {names[k], s.name};
    for (int t = 0; t < opt.trials; ++t) {
      const auto P = pair_profiles(fns[t], fns[t + 1], b, grid, s.r0, opt.angular_scale);
      const auto sides = evaluate_inequalities(P, opt.n, opt.delta);
      if (opt.refine_every > 0 && t % opt.refine_every == 0) {
        const auto Pf = pair_profiles(fns[t], fns[t + 1], b, fine, s.r0, 1.5 * opt.angular_scale);
        detail::check_refinement(sides, evaluate_inequalities(Pf, opt.n, opt.delta), opt.slack, s.name);
      }
      for (std::size_t k = 0; k < sides.size(); ++k) {
        auto& it = items[k];
        ++it.trials;
        const double ratio = sides[k].rhs > 0 ? sides[k].lhs / sides[k].rhs
                                              : (sides[k].lhs > 0 ? std::numeric_limits<double>::infinity() : 0);
        if (!(sides[k].lhs <= sides[k].rhs * (1 + opt.slack))) ++it.violations;
        if (ratio > it.worst_ratio || it.trials == 1) {
          it.worst_ratio = ratio;
          it.worst_lhs = sides[k].lhs;
          it.worst_rhs = sides[k].rhs;
        }
      }
    }
    for (auto& it : items) report.items.push_back(std::move(it));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace helmest
