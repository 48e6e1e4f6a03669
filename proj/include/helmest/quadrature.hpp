#pragma once

// Gauss rules on [-1,1] and product rules on the unit sphere S^{n-1}.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "helmest/fields.hpp"

namespace helmest {

struct Rule1D {
  std::vector<double> x, w;
};

// Golub-Welsch for the Jacobi weight (1-t)^alpha (1+t)^beta on [-1,1].
inline Rule1D gauss_jacobi(int m, double alpha, double beta) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  const double ab = alpha + beta;
  for (int k = 0; k < m; ++k) {
    const double s = 2.0 * k + ab;
    J(k, k) = (k == 0 && ab == 0) ? (beta - alpha) / 2.0 : (beta * beta - alpha * alpha) / (s * (s + 2));
    if (k + 1 < m) {
      const double k1 = k + 1.0, s1 = 2.0 * k1 + ab;
      const double off =
          std::sqrt(4 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab) / (s1 * s1 * (s1 + 1) * (s1 - 1)));
      J(k, k + 1) = off;
      J(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, ab + 1) * std::tgamma(alpha + 1) * std::tgamma(beta + 1) / std::tgamma(ab + 2);
  Rule1D r;
  r.x.resize(m);
  r.w.resize(m);
  for (int k = 0; k < m; ++k) {
    r.x[k] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    r.w[k] = mu0 * v0 * v0;
  }
  return r;
}

inline Rule1D gauss_legendre(int m) { return gauss_jacobi(m, 0.0, 0.0); }

// Gauss-Legendre mapped to [a,b].
inline Rule1D gauss_legendre(int m, double a, double b) {
  Rule1D r = gauss_legendre(m);
  for (int k = 0; k < m; ++k) {
    r.x[k] = 0.5 * (a + b) + 0.5 * (b - a) * r.x[k];
    r.w[k] *= 0.5 * (b - a);
  }
  return r;
}

// Product rule on S^{n-1}: Gauss-Jacobi in each polar angle cosine, uniform
// midpoint rule (2m points) in the last azimuth. Exact for polynomials of
// degree <= 2m-1 restricted to the sphere. Nodes are stored flat, n per node.
struct SphereRule {
  int n = 3;
  int m = 0;
  std::vector<double> coords;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t k) const { return coords.data() + k * n; }
};

inline SphereRule sphere_rule(int n, int m) {
  SphereRule s;
  s.n = n;
  s.m = m;
  if (n == 2) {
    const int k = 2 * m;
    for (int j = 0; j < k; ++j) {
      const double phi = 2 * std::numbers::pi * (j + 0.5) / k;
      s.coords.push_back(std::cos(phi));
      s.coords.push_back(std::sin(phi));
      s.weights.push_back(2 * std::numbers::pi / k);
    }
    return s;
  }
  const SphereRule lower = sphere_rule(n - 1, m);
  const double a = 0.5 * (n - 3);
  const Rule1D t = gauss_jacobi(m, a, a);
  s.coords.reserve(std::size_t(m) * lower.size() * n);
  for (int i = 0; i < m; ++i) {
    const double st = std::sqrt(std::max(0.0, 1 - t.x[i] * t.x[i]));
    for (std::size_t j = 0; j < lower.size(); ++j) {
      s.coords.push_back(t.x[i]);
      for (int d = 0; d < n - 1; ++d) s.coords.push_back(st * lower.node(j)[d]);
      s.weights.push_back(t.w[i] * lower.weights[j]);
    }
  }
  return s;
}

// Largest m whose rule stays within `budget` nodes (2 m^{n-1} nodes).
inline int sphere_rule_cap(int n, double budget = 4e5) {
  return std::max(4, static_cast<int>(std::floor(std::pow(budget / 2, 1.0 / (n - 1)))));
}

// Thread-safe cache of sphere rules keyed by (n, m).
class SphereRuleCache {
 public:
  const SphereRule& get(int n, int m) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(n, m);
    auto it = rules_.find(key);
    if (it == rules_.end()) it = rules_.emplace(key, std::make_unique<SphereRule>(sphere_rule(n, m))).first;
    return *it->second;
  }

  static SphereRuleCache& global() {
    static SphereRuleCache cache;
    return cache;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, std::unique_ptr<SphereRule>> rules_;
};

}  // namespace helmest
