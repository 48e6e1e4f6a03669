#pragma once

// Named coefficient sets addressable from config files, plus random analytic
// draws used by the identity battery.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "helmest/fields.hpp"

namespace helmest {

namespace detail {

inline RJet radius2(const std::vector<RJet>& X) {
  RJet r2(X[0].dim(), X[0].order(), 0.0);
  for (const auto& e : X) r2 = r2 + e * e;
  return r2;
}

// <x>^{-p} as a jet.
inline RJet bracket_pow(const std::vector<RJet>& X, double p) { return pow(radius2(X) + 1.0, -0.5 * p); }

}  // namespace detail

// Optional overrides; unset fields take the preset's default.
struct PresetParams {
  std::optional<int> n;
  std::optional<double> delta;
  std::optional<double> eta;    // amplitude of the variation of a
  std::optional<double> beta;   // amplitude of b
  std::optional<double> kappa;  // amplitude of the repulsive part of c
  std::optional<double> eta_c;  // amplitude of the attractive part of c
  std::optional<std::vector<double>> diagonal;  // for "diagonal"
};

inline CoefficientSet identity_preset(int n, double delta = 0.5) {
  CoefficientSet C;
  C.id = "identity";
  C.n = n;
  C.delta = delta;
  C.a = MatrixField::identity(n);
  C.b = VectorField::zero(n);
  C.c = PotentialField::constant(n, 0.0);
  C.radial = RadialCoefficients{[](double) { return 1.0; }, [](double) { return 0.0; }};
  C.validate();
  return C;
}

inline CoefficientSet diagonal_preset(const std::vector<double>& diag, double delta = 0.5) {
  const int n = static_cast<int>(diag.size());
  CoefficientSet C = identity_preset(n, delta);
  C.id = "diagonal";
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = diag[i];
  C.a = MatrixField::constant(A);
  bool scalar = true;
  for (double d : diag) scalar = scalar && d == diag[0];
  if (scalar) {
    const double s = diag[0];
    C.radial = RadialCoefficients{[s](double) { return s; }, [](double) { return 0.0; }};
  } else {
    C.radial.reset();
  }
  return C;
}

// a = (1 + eta <x>^{-delta}) I on R^4, c = kappa/|x|^2 (repulsive, kappa >= 0).
inline CoefficientSet diag_n4_remark_preset(double delta = 0.5, double eta = 2e-5, double kappa = 0.25) {
  const int n = 4;
  CoefficientSet C;
  C.id = "diag-n4-remark";
  C.n = n;
  C.delta = delta;
  C.a = MatrixField(JetField<double>(n, n * n, [n, delta, eta](const std::vector<RJet>& X) {
    const RJet alpha = detail::bracket_pow(X, delta) * eta + 1.0;
    std::vector<RJet> out(n * n, RJet(n, X[0].order(), 0.0));
    for (int i = 0; i < n; ++i) out[i * n + i] = alpha;
    return out;
  }));
  C.b = VectorField::zero(n);
  C.c = PotentialField::from_jet(n, [kappa](const std::vector<RJet>& X) {
    return reciprocal(detail::radius2(X)) * kappa;
  });
  C.radial = RadialCoefficients{
      [delta, eta](double r) { return 1.0 + eta * std::pow(1.0 + r * r, -0.5 * delta); },
      [kappa](double r) { return kappa / (r * r); }};
  return C;
}

// Rotational field beta <x>^{-2-delta} (-x_2, x_1, 0, ..., 0).
inline VectorField swirl_field(int n, double delta, double beta) {
  JetField<double> f(n, n, [n, delta, beta](const std::vector<RJet>& X) {
    const RJet w = detail::bracket_pow(X, 2.0 + delta) * beta;
    std::vector<RJet> out(n, RJet(n, X[0].order(), 0.0));
    out[0] = -(w * X[1]);
    out[1] = w * X[0];
    return out;
  });
  f.with_fast_values([n, delta, beta](const Point& x) {
    double r2 = 0;
    for (double e : x) r2 += e * e;
    const double w = beta * std::pow(1 + r2, -0.5 * (2 + delta));
    std::vector<double> out(n, 0.0);
    out[0] = -w * x[1];
    out[1] = w * x[0];
    return out;
  });
  return VectorField(std::move(f));
}

// Fixed symmetric direction with unit operator norm for the near-identity preset.
inline Eigen::Matrix3d near_identity_direction() {
  Eigen::Matrix3d M;
  M << 1.0, 0.3, 0.0, 0.3, -0.5, 0.2, 0.0, 0.2, 0.4;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  return M / es.eigenvalues().cwiseAbs().maxCoeff();
}

// n = 3: a = I + eta <x>^{-delta} M, swirl b, c = kappa/|x|^2 - eta_c <x>^{-2-delta}.
inline CoefficientSet near_identity_n3_preset(double delta = 0.5, double eta = 4e-7, double beta = 2e-5,
                                              double kappa = 0.05, double eta_c = 1e-9) {
  const int n = 3;
  const Eigen::Matrix3d M = near_identity_direction();
  CoefficientSet C;
  C.id = "near-identity-n3";
  C.n = n;
  C.delta = delta;
  C.a = MatrixField(JetField<double>(n, n * n, [n, delta, eta, M](const std::vector<RJet>& X) {
    const RJet w = detail::bracket_pow(X, delta) * eta;
    std::vector<RJet> out;
    out.reserve(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.push_back(w * M(i, j) + (i == j ? 1.0 : 0.0));
    return out;
  }));
  C.b = swirl_field(n, delta, beta);
  C.c = PotentialField::from_jet(n, [delta, kappa, eta_c](const std::vector<RJet>& X) {
    return reciprocal(detail::radius2(X)) * kappa - detail::bracket_pow(X, 2.0 + delta) * eta_c;
  });
  return C;
}

inline CoefficientSet magnetic_small_preset(int n = 3, double delta = 0.5, double beta = 1e-3) {
  CoefficientSet C = identity_preset(n, delta);
  C.id = "magnetic-small";
  C.b = swirl_field(n, delta, beta);
  C.radial.reset();
  return C;
}

// c = kappa/|x|: repulsive but with Coulomb tail, so C_+ is infinite.
inline CoefficientSet coulomb_repulsive_preset(int n = 3, double delta = 0.5, double kappa = 1.0) {
  CoefficientSet C = identity_preset(n, delta);
  C.id = "coulomb-repulsive";
  C.c = PotentialField::from_jet(n, [kappa](const std::vector<RJet>& X) {
    return reciprocal(sqrt(detail::radius2(X))) * kappa;
  });
  C.radial = RadialCoefficients{[](double) { return 1.0; }, [kappa](double r) { return kappa / r; }};
  return C;
}

// b = grad chi with chi = s sin(x_1) cos(x_2) + s x_3^2 / 2 (n >= 3); db vanishes.
inline VectorField pure_gauge_field(int n, double s = 0.3) {
  return VectorField(JetField<double>(n, n, [n, s](const std::vector<RJet>& X) {
    std::vector<RJet> out(n, RJet(n, X[0].order(), 0.0));
    out[0] = (cos(X[0]) * cos(X[1])) * s;
    out[1] = -(sin(X[0]) * sin(X[1])) * s;
    out[2] = X[2] * s;
    return out;
  }));
}

inline RJet pure_gauge_potential(const std::vector<RJet>& X, double s = 0.3) {
  return (sin(X[0]) * cos(X[1])) * s + (X[2] * X[2]) * (0.5 * s);
}

inline const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {"identity",         "diag-n4-remark",    "near-identity-n3",
                                               "magnetic-small",   "coulomb-repulsive", "diagonal"};
  return ids;
}

inline CoefficientSet make_preset(const std::string& id, const PresetParams& p = {}) {
  const double delta = p.delta.value_or(0.5);
  CoefficientSet C;
  if (id == "identity") {
    C = identity_preset(p.n.value_or(3), delta);
  } else if (id == "diag-n4-remark") {
    if (p.n && *p.n != 4) throw ConfigError("preset diag-n4-remark is four-dimensional");
    C = diag_n4_remark_preset(delta, p.eta.value_or(2e-5), p.kappa.value_or(0.25));
  } else if (id == "near-identity-n3") {
    if (p.n && *p.n != 3) throw ConfigError("preset near-identity-n3 is three-dimensional");
    C = near_identity_n3_preset(delta, p.eta.value_or(4e-7), p.beta.value_or(2e-5), p.kappa.value_or(0.05),
                                p.eta_c.value_or(1e-9));
  } else if (id == "magnetic-small") {
    C = magnetic_small_preset(p.n.value_or(3), delta, p.beta.value_or(1e-3));
  } else if (id == "coulomb-repulsive") {
    C = coulomb_repulsive_preset(p.n.value_or(3), delta, p.kappa.value_or(1.0));
  } else if (id == "diagonal") {
    if (!p.diagonal) throw ConfigError("preset diagonal needs a 'diagonal' entry list");
    C = diagonal_preset(*p.diagonal, delta);
  } else {
    throw ConfigError("unknown preset '" + id + "'");
  }
  C.validate();
  return C;
}

// Random smooth (entire) coefficients: a = A0 + sum_m S_m sin(k_m.x + t_m),
// b and c likewise. Not necessarily elliptic; only used for algebraic identities.
struct RandomCoefficients {
  CoefficientSet coeffs;
  ComplexField V;  // complex potential for the general identities
};

inline RandomCoefficients random_coefficients(int n, Rng& rng, double amp = 0.2) {
  struct Mode {
    std::vector<double> k;
    double phase;
  };
  auto draw_mode = [&]() {
    Mode m;
    m.k.resize(n);
    for (auto& e : m.k) e = 0.7 * rng.normal();
    m.phase = rng.uniform(0, 2 * std::numbers::pi);
    return m;
  };
  auto mode_jet = [n](const Mode& m, const std::vector<RJet>& X) {
    RJet s(n, X[0].order(), m.phase);
    for (int i = 0; i < n; ++i) s = s + X[i] * m.k[i];
    return sin(s);
  };
  const int modes = 2;
  // a
  Eigen::MatrixXd A0 = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::MatrixXd> S(modes);
  std::vector<Mode> am(modes);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double q = 0.1 * rng.normal();
      A0(i, j) += q;
      if (i != j) A0(j, i) += q;
    }
  for (int m = 0; m < modes; ++m) {
    S[m] = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double q = amp * rng.normal();
        S[m](i, j) = q;
        S[m](j, i) = q;
      }
    am[m] = draw_mode();
  }
  // b
  std::vector<double> B0(n);
  for (auto& e : B0) e = 0.3 * rng.normal();
  std::vector<std::vector<double>> Bm(modes, std::vector<double>(n));
  std::vector<Mode> bm(modes);
  for (int m = 0; m < modes; ++m) {
    for (auto& e : Bm[m]) e = amp * rng.normal();
    bm[m] = draw_mode();
  }
  // c and V
  const double c0 = rng.normal();
  const double c1 = rng.normal() * 0.5;
  const Mode cm = draw_mode();
  const cd v0(rng.normal(), rng.normal());
  const cd v1(rng.normal() * 0.5, rng.normal() * 0.5);
  const Mode vm = draw_mode();

  RandomCoefficients out;
  CoefficientSet& C = out.coeffs;
  C.id = "random";
  C.n = n;
  C.delta = 0.5;
  C.a = MatrixField(JetField<double>(n, n * n, [=](const std::vector<RJet>& X) {
    std::vector<RJet> sm;
    for (int m = 0; m < modes; ++m) sm.push_back(mode_jet(am[m], X));
    std::vector<RJet> r;
    r.reserve(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        RJet e(n, X[0].order(), A0(i, j));
        for (int m = 0; m < modes; ++m) e = e + sm[m] * S[m](i, j);
        r.push_back(e);
      }
    return r;
  }));
  C.b = VectorField(JetField<double>(n, n, [=](const std::vector<RJet>& X) {
    std::vector<RJet> sm;
    for (int m = 0; m < modes; ++m) sm.push_back(mode_jet(bm[m], X));
    std::vector<RJet> r;
    for (int i = 0; i < n; ++i) {
      RJet e(n, X[0].order(), B0[i]);
      for (int m = 0; m < modes; ++m) e = e + sm[m] * Bm[m][i];
      r.push_back(e);
    }
    return r;
  }));
  C.c = PotentialField::from_jet(n, [=](const std::vector<RJet>& X) { return mode_jet(cm, X) * c1 + c0; });
  out.V = ComplexField::from_jet(n, [=](const std::vector<RJet>& X) {
    return complexify(mode_jet(vm, X)) * v1 + v0;
  });
  return out;
}

}  // namespace helmest
