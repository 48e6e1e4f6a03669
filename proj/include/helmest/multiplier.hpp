#pragma once

// Morawetz weight psi_R, the multiplier fields Q and P, the alpha matrix and
// its split, the S/R decomposition of A^2 psi, and pointwise residuals of the
// multiplier identities. All derivatives come from jet arithmetic; a
// finite-difference divergence is kept as an independent oracle.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helmest/conditions.hpp"
#include "helmest/errors.hpp"
#include "helmest/fields.hpp"
#include "helmest/jet.hpp"
#include "helmest/presets.hpp"
#include "helmest/rng.hpp"

namespace helmest {

// psi_R: psi'(r) = (n-1) r / (2nR) inside, 1/2 - R^{n-1} / (2n r^{n-1}) outside.
struct Weight {
  int n = 3;
  double R = 1.0;

  // (psi, psi', psi'', psi''', regular part of psi'''') at radius r.
  std::array<double, 5> radial(double r) const {
    const double k = (n - 1.0) / (2.0 * n);
    if (r <= R) return {k * r * r / (2 * R), k * r / R, k / R, 0.0, 0.0};
    const double q = std::pow(R / r, n - 1);  // (R/r)^{n-1}
    const double psiR = k * R / 2;
    // integral of 1/2 - R^{n-1}/(2n s^{n-1}) from R to r
    const double tail = 0.5 * (r - R) + (R / (2.0 * n * (n - 2))) * (q * r / R - 1);
    return {psiR + tail, 0.5 - q / (2.0 * n), (n - 1.0) * q / (2.0 * n * r), -(n - 1.0) * q / (2.0 * r * r),
            (n * n - 1.0) * q / (2.0 * r * r * r)};
  }

  // Coefficient of delta_{|x|=R} in psi''''.
  double surface_coefficient() const { return -(n - 1.0) / (2 * R * R); }
};

struct WeightDerivatives {
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0;
  bool near_surface = false;
};

inline WeightDerivatives weight_derivatives(double R, int n, const Point& x, double margin = 0.05) {
  const double r = norm(x);
  if (r == 0) throw OriginPoint("weight derivatives are singular at the origin");
  const auto d = Weight{n, R}.radial(r);
  return {d[1], d[2], d[3], d[4], std::abs(r - R) < margin * R};
}

// Real weight given as a jet-valued function of the coordinate jets.
using WeightJet = std::function<RJet(const std::vector<RJet>& X)>;

namespace detail {

inline RJet radius_jet(const std::vector<RJet>& X) {
  RJet r2(X[0].dim(), X[0].order(), 0.0);
  for (const auto& e : X) r2 = r2 + e * e;
  return sqrt(r2);
}

}  // namespace detail

inline WeightJet psi_jet(const Weight& w) {
  return [w](const std::vector<RJet>& X) {
    const RJet r = detail::radius_jet(X);
    return compose(r, w.radial(r.value()));
  };
}

inline WeightJet constant_weight(double value) {
  return [value](const std::vector<RJet>& X) { return RJet(X[0].dim(), X[0].order(), value); };
}

inline WeightJet linear_weight(std::vector<double> dir) {
  return [dir](const std::vector<RJet>& X) {
    RJet s(X[0].dim(), X[0].order(), 0.0);
    for (std::size_t i = 0; i < dir.size(); ++i) s = s + X[i] * dir[i];
    return s;
  };
}

// phi = 1 on |x| <= R, 2 - |x|/R on R <= |x| <= 2R, 0 beyond.
inline double tent_value(double R, double r) { return r <= R ? 1.0 : (r <= 2 * R ? 2 - r / R : 0.0); }

inline WeightJet tent_weight(double R) {
  return [R](const std::vector<RJet>& X) {
    const RJet r = detail::radius_jet(X);
    const double rv = r.value();
    const double slope = (rv > R && rv < 2 * R) ? -1 / R : 0.0;
    return compose(r, std::array<double, 5>{tent_value(R, rv), slope, 0, 0, 0});
  };
}

// Jets of every field at one point. `order` is the order of the Q, P fields
// that will be formed: v, a, phi to order+2, psi to order+3, b to order+1.
struct PointJets {
  int n = 3;
  int order = 1;
  std::vector<RJet> X, a, b;
  CJet v;
  RJet psi, phi;
  CJet V;  // complex potential, order `order`
  RJet c;  // real potential, order `order`

  const RJet& A(int j, int k) const { return a[j * n + k]; }
};

inline PointJets point_jets(const CoefficientSet& C, const ComplexField* V, const TestFunction& v,
                            const WeightJet& psi, const WeightJet& phi, const Point& x, int order) {
  PointJets J;
  J.n = C.n;
  J.order = order;
  J.X = coordinate_jets(x, order + 3);
  J.a = C.a.jets(x, order + 2);
  J.b = C.b.jets(x, order + 1);
  J.v = v.jet(x, order + 2);
  J.psi = psi(J.X);
  J.phi = phi(coordinate_jets(x, order + 2));
  J.c = C.c.jet(x, order);
  J.V = V ? V->jet(x, order) : complexify(J.c);
  return J;
}

// Derived jets shared by every identity.
struct CoreJets {
  std::vector<CJet> Dbv;  // covariant gradient
  CJet Abv;               // A^b v
  RJet Apsi, Aphi;
  std::vector<RJet> dpsi, dphi;
  CJet mult;  // (A psi) conj v + 2 a(grad psi, grad^b v)
  CJet aDD;   // a(grad^b v, grad^b v)
};

inline CoreJets core_jets(const PointJets& J) {
  const int n = J.n;
  CoreJets K;
  K.Dbv = covariant_grad_jets(J.v, J.b);
  for (int k = 0; k < n; ++k) K.dpsi.push_back(J.psi.partial(k));
  for (int k = 0; k < n; ++k) K.dphi.push_back(J.phi.partial(k));
  auto div_a = [&](const auto& g) {  // d_j (a_jk g_k)
    using Jt = std::decay_t<decltype(g[0])>;
    Jt acc;
    bool first = true;
    for (int j = 0; j < n; ++j) {
      Jt flux = J.A(j, 0) * g[0];
      for (int k = 1; k < n; ++k) flux = flux + J.A(j, k) * g[k];
      const Jt d = flux.partial(j);
      acc = first ? d : acc + d;
      first = false;
    }
    return acc;
  };
  K.Apsi = div_a(K.dpsi);
  K.Aphi = div_a(K.dphi);
  // A^b v = d_j (a_jk Dbv_k) + i b_j a_jk Dbv_k
  CJet Abv = div_a(K.Dbv);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) Abv = Abv + (J.b[j] * J.A(j, k) * K.Dbv[k]) * I_unit;
  K.Abv = Abv;
  const CJet vbar = conj(J.v);
  CJet m = K.Apsi * vbar;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) m = m + (J.A(j, k) * K.dpsi[k] * conj(K.Dbv[j])) * 2.0;
  K.mult = m;
  CJet aDD(n, K.Dbv[0].order(), cd(0));
  for (int l = 0; l < n; ++l)
    for (int mm = 0; mm < n; ++mm) aDD = aDD + J.A(l, mm) * K.Dbv[mm] * conj(K.Dbv[l]);
  K.aDD = aDD;
  return K;
}

// Q_j with potential W (complex): a_jk Dbv_k mult - 1/2 a_jk d_k(A psi) |v|^2 - a_jk d_k psi [W |v|^2 + a(D,D)].
inline std::vector<CJet> Q_field(const PointJets& J, const CoreJets& K, const CJet& W) {
  const int n = J.n;
  const RJet v2 = abs2(J.v);
  std::vector<CJet> Q;
  for (int j = 0; j < n; ++j) {
    CJet q = J.A(j, 0) * K.Dbv[0] * K.mult;
    for (int k = 1; k < n; ++k) q = q + J.A(j, k) * K.Dbv[k] * K.mult;
    for (int k = 0; k < n; ++k) {
      q = q - complexify(J.A(j, k) * K.Apsi.partial(k) * v2 * 0.5);
      q = q - J.A(j, k) * K.dpsi[k] * (W * v2 + K.aDD);
    }
    Q.push_back(q);
  }
  return Q;
}

// P_j = a_jk Dbv_k phi conj v - 1/2 a_jk d_k phi |v|^2.
inline std::vector<CJet> P_field(const PointJets& J, const CoreJets& K) {
  const int n = J.n;
  const RJet v2 = abs2(J.v);
  const CJet vbar = conj(J.v);
  std::vector<CJet> P;
  for (int j = 0; j < n; ++j) {
    CJet p(n, std::min(K.Dbv[0].order(), J.phi.order() - 1), cd(0));
    for (int k = 0; k < n; ++k) {
      p = p + J.A(j, k) * K.Dbv[k] * J.phi * vbar;
      p = p - complexify(J.A(j, k) * K.dphi[k] * v2 * 0.5);
    }
    P.push_back(p);
  }
  return P;
}

inline cd divergence(const std::vector<CJet>& F) {
  cd s = 0;
  for (std::size_t j = 0; j < F.size(); ++j) s += F[j].d(static_cast<int>(j));
  return s;
}

// alpha_lm = 2 a_jm d_j(a_lk d_k psi) - a_jk d_k psi d_j a_lm.
inline Eigen::MatrixXd alpha_matrix(const PointJets& J, const CoreJets& K) {
  const int n = J.n;
  Eigen::MatrixXd al(n, n);
  for (int l = 0; l < n; ++l) {
    RJet flux = J.A(l, 0) * K.dpsi[0];
    for (int k = 1; k < n; ++k) flux = flux + J.A(l, k) * K.dpsi[k];
    for (int m = 0; m < n; ++m) {
      double s = 0;
      for (int j = 0; j < n; ++j) {
        s += 2 * J.A(j, m).value() * flux.d(j);
        for (int k = 0; k < n; ++k) s -= J.A(j, k).value() * K.dpsi[k].value() * J.A(l, m).d(j);
      }
      al(l, m) = s;
    }
  }
  return al;
}

struct ResidualTerms {
  cd lhs = 0;
  double scale = 0;  // sum of magnitudes of every term on both sides
  cd rhs = 0;
  double relative() const { return std::abs(lhs - rhs) / std::max(scale, 1e-300); }
  void add(cd t) {
    rhs += t;
    scale += std::abs(t);
  }
};

namespace detail {

inline cd a_form(const PointJets& J, const std::vector<cd>& w, const std::vector<cd>& z) {
  cd s = 0;  // a_jk w_k conj(z_j)
  for (int j = 0; j < J.n; ++j)
    for (int k = 0; k < J.n; ++k) s += J.A(j, k).value() * w[k] * std::conj(z[j]);
  return s;
}

inline std::vector<cd> values_of(const std::vector<CJet>& g) {
  std::vector<cd> out;
  for (const auto& e : g) out.push_back(e.value());
  return out;
}

inline std::vector<cd> values_of(const std::vector<RJet>& g) {
  std::vector<cd> out;
  for (const auto& e : g) out.push_back(e.value());
  return out;
}

// 2 Im[a_jk Dbv_k db_jl a_lm d_m psi conj v].
inline cd magnetic_cross(const PointJets& J, const CoreJets& K) {
  const int n = J.n;
  cd s = 0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        const double db = J.b[l].d(j) - J.b[j].d(l);
        if (db == 0) continue;
        for (int m = 0; m < n; ++m)
          s += J.A(j, k).value() * K.Dbv[k].value() * db * J.A(l, m).value() * K.dpsi[m].value() *
               std::conj(J.v.value());
      }
  return 2.0 * s.imag();
}

// A^2 psi = d_j(a_jk d_k (A psi)).
inline double A2psi(const PointJets& J, const CoreJets& K) {
  double s = 0;
  for (int j = 0; j < J.n; ++j) {
    RJet flux = J.A(j, 0) * K.Apsi.partial(0);
    for (int k = 1; k < J.n; ++k) flux = flux + J.A(j, k) * K.Apsi.partial(k);
    s += flux.d(j);
  }
  return s;
}

}  // namespace detail

// Residuals of the two general identities (complex potential V) at x.
struct IdentityPair {
  ResidualTerms first, second;
};

inline IdentityPair general_identity_terms(const CoefficientSet& C, const ComplexField& V, const TestFunction& v,
                                           const WeightJet& psi, const WeightJet& phi, const Point& x) {
  const PointJets J = point_jets(C, &V, v, psi, phi, x, 1);
  const CoreJets K = core_jets(J);
  const int n = J.n;
  IdentityPair out;
  const auto Q = Q_field(J, K, J.V);
  const auto P = P_field(J, K);
  const cd vv = J.v.value(), Vv = J.V.value();
  const double v2 = std::norm(vv);
  const auto D = detail::values_of(K.Dbv), dpsi = detail::values_of(K.dpsi), dphi = detail::values_of(K.dphi);

  auto& r1 = out.first;
  r1.lhs = divergence(Q).real();
  for (int j = 0; j < n; ++j) r1.scale += std::abs(Q[j].d(j));
  r1.add(((K.Abv.value() - Vv * vv) * K.mult.value()).real());
  r1.add(-0.5 * detail::A2psi(J, K) * v2);
  const Eigen::MatrixXd al = alpha_matrix(J, K);
  cd aform = 0;
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) aform += al(l, m) * D[m] * std::conj(D[l]);
  r1.add(aform.real());
  std::vector<cd> gradV;
  for (int k = 0; k < n; ++k) gradV.push_back(J.V.d(k));
  r1.add(-detail::a_form(J, dpsi, gradV).real() * v2);
  r1.add(detail::magnetic_cross(J, K));
  r1.add(-2 * Vv.imag() * (detail::a_form(J, dpsi, D) * vv).imag());

  auto& r2 = out.second;
  r2.lhs = divergence(P);
  for (int j = 0; j < n; ++j) r2.scale += std::abs(P[j].d(j));
  r2.add(K.Abv.value() * J.phi.value() * std::conj(vv));
  r2.add(K.aDD.value() * J.phi.value());
  r2.add(-0.5 * K.Aphi.value() * v2);
  std::vector<cd> vdphi;
  for (int k = 0; k < n; ++k) vdphi.push_back(vv * dphi[k]);
  r2.add(I_unit * detail::a_form(J, D, vdphi).imag());
  return out;
}

// Residuals of the Helmholtz-specialised pair: f := A^b v - c v + (lambda + i eps) v.
inline IdentityPair helmholtz_identity_terms(const CoefficientSet& C, double lambda, double eps,
                                             const TestFunction& v, const WeightJet& psi, const WeightJet& phi,
                                             const Point& x) {
  const PointJets J = point_jets(C, nullptr, v, psi, phi, x, 1);
  const CoreJets K = core_jets(J);
  const int n = J.n;
  const cd z(lambda, eps);
  const CJet W = complexify(J.c) - z;
  const auto Q = Q_field(J, K, W);
  const auto P = P_field(J, K);
  const cd vv = J.v.value();
  const double v2 = std::norm(vv), cv = J.c.value(), ph = J.phi.value();
  const cd f = K.Abv.value() - cv * vv + z * vv;
  const auto D = detail::values_of(K.Dbv), dpsi = detail::values_of(K.dpsi), dphi = detail::values_of(K.dphi);

  IdentityPair out;
  auto& r1 = out.first;
  r1.lhs = (divergence(Q) + divergence(P)).real();
  for (int j = 0; j < n; ++j) r1.scale += std::abs(Q[j].d(j)) + std::abs(P[j].d(j));
  r1.add(-0.5 * (detail::A2psi(J, K) + K.Aphi.value()) * v2);
  std::vector<cd> gradc;
  for (int k = 0; k < n; ++k) gradc.push_back(J.c.d(k));
  r1.add(-(detail::a_form(J, dpsi, gradc).real() - cv * ph + lambda * ph) * v2);
  const Eigen::MatrixXd al = alpha_matrix(J, K);
  cd aform = 0;
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) aform += al(l, m) * D[m] * std::conj(D[l]);
  r1.add(aform.real());
  r1.add(K.aDD.value().real() * ph);
  r1.add(2 * eps * (detail::a_form(J, dpsi, D) * vv).imag());
  r1.add(detail::magnetic_cross(J, K));
  r1.add(((K.Apsi.value() + ph) * std::conj(vv) * f + 2.0 * detail::a_form(J, dpsi, D) * f).real());

  auto& r2 = out.second;
  r2.lhs = divergence(P);
  for (int j = 0; j < n; ++j) r2.scale += std::abs(P[j].d(j));
  r2.add(K.aDD.value() * ph);
  r2.add((cv - z) * v2 * ph);
  r2.add(f * std::conj(vv) * ph);
  r2.add(-0.5 * K.Aphi.value() * v2);
  std::vector<cd> vdphi;
  for (int k = 0; k < n; ++k) vdphi.push_back(vv * dphi[k]);
  r2.add(I_unit * detail::a_form(J, D, vdphi).imag());
  return out;
}

// Values of Q_j (complex potential V) at x, for the finite-difference oracle.
inline std::vector<cd> Q_values(const CoefficientSet& C, const ComplexField& V, const TestFunction& v,
                                const WeightJet& psi, const Point& x) {
  const PointJets J = point_jets(C, &V, v, psi, constant_weight(0.0), x, 0);
  const CoreJets K = core_jets(J);
  return detail::values_of(Q_field(J, K, J.V));
}

// Divergence of Q by the jet path and by a 4th-order central difference with step h_rel |x|.
struct DivergenceOracle {
  cd jet = 0, fd = 0;
  double scale = 0;
  double relative() const { return std::abs(jet - fd) / std::max(scale, 1e-300); }
};

inline DivergenceOracle Q_divergence_oracle(const CoefficientSet& C, const ComplexField& V, const TestFunction& v,
                                            const WeightJet& psi, const Point& x, double h_rel = 1e-3) {
  DivergenceOracle o;
  const PointJets J = point_jets(C, &V, v, psi, constant_weight(0.0), x, 1);
  const CoreJets K = core_jets(J);
  const auto Q = Q_field(J, K, J.V);
  o.jet = divergence(Q);
  for (int j = 0; j < J.n; ++j) o.scale += std::abs(Q[j].d(j));
  const double h = h_rel * norm(x);
  for (int j = 0; j < J.n; ++j) {
    auto at = [&](double s) {
      Point y = x;
      y[j] += s * h;
      return Q_values(C, V, v, psi, y)[j];
    };
    o.fd += (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12 * h);
  }
  return o;
}

// (A psi) conj v + 2 a(grad psi, grad^b v).
inline cd commutator_multiplier(const TestFunction& v, const CoefficientSet& C, const Weight& w, const Point& x,
                                double margin = 0.05) {
  if (weight_derivatives(w.R, w.n, x, margin).near_surface)
    throw SurfaceProximity("point within the excluded band around |x| = R");
  const PointJets J = point_jets(C, nullptr, v, psi_jet(w), constant_weight(0.0), x, 0);
  return core_jets(J).mult.value();
}

// conj(A^b(psi v) - psi A^b v): the operator-commutator oracle for the multiplier.
inline cd commutator_oracle(const TestFunction& v, const CoefficientSet& C, const Weight& w, const Point& x) {
  const auto X = coordinate_jets(x, 2);
  const auto a = C.a.jets(x, 1);
  const auto b = C.b.jets(x, 1);
  const CJet vj = v.jet(x, 2);
  const RJet p = psi_jet(w)(X);
  const cd lhs = apply_Ab_jet(p * vj, a, b).value() - p.value() * apply_Ab_jet(vj, a, b).value();
  return std::conj(lhs);
}

// A psi = a-hat psi'' + (a-bar - a-hat) psi' / |x| + a_{lm;l} x-hat_m psi'.
inline double Apsi_closed_form(const MatrixField& a, const Weight& w, const Point& x) {
  const int n = w.n;
  const double r = norm(x);
  const auto d = w.radial(r);
  const auto J = a.jets(x, 1);
  double ahat = 0, abar = 0, div = 0;
  for (int l = 0; l < n; ++l) {
    abar += J[l * n + l].value();
    for (int m = 0; m < n; ++m) {
      ahat += J[l * n + m].value() * x[l] * x[m] / (r * r);
      div += J[l * n + m].d(l) * x[m] / r;
    }
  }
  return ahat * d[2] + (abar - ahat) * d[1] / r + div * d[1];
}

struct AlphaSplit {
  Eigen::MatrixXd alpha, s, r;
};

inline AlphaSplit alpha_and_split(const MatrixField& a, const Weight& w, const Point& x) {
  const int n = w.n;
  const double rr = norm(x);
  if (rr == 0) throw OriginPoint("alpha split is singular at the origin");
  CoefficientSet C;
  C.n = n;
  C.a = a;
  C.b = VectorField::zero(n);
  C.c = PotentialField::constant(n, 0.0);
  const PointJets J = point_jets(C, nullptr, TestFunction::gaussian(n), psi_jet(w), constant_weight(0.0), x, 0);
  const CoreJets K = core_jets(J);
  AlphaSplit out;
  out.alpha = alpha_matrix(J, K);
  const auto d = w.radial(rr);
  Eigen::VectorXd xh(n);
  for (int i = 0; i < n; ++i) xh[i] = x[i] / rr;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = J.A(i, j).value();
  const Eigen::VectorXd Ax = A * xh;
  // s_lm = 2 (a x)_m (a x)_l (psi'' - psi'/r) + 2 (a a)_{lm} psi'/r
  out.s = 2 * (d[2] - d[1] / rr) * (Ax * Ax.transpose()) + 2 * d[1] / rr * (A * A);
  out.r = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      double s = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          s += (2 * A(j, m) * J.A(l, k).d(j) - A(j, k) * J.A(l, m).d(j)) * xh[k];
      out.r(l, m) = s * d[1];
    }
  return out;
}

struct SRDecomposition {
  double A2psi = 0, S = 0, Rrem = 0;
};

inline SRDecomposition S_R_decomposition(const MatrixField& a, const Weight& w, const Point& x,
                                         double margin = 0.05) {
  const auto wd = weight_derivatives(w.R, w.n, x, margin);
  if (wd.near_surface) throw SurfaceProximity("point within the excluded band around |x| = R");
  const int n = w.n;
  CoefficientSet C;
  C.n = n;
  C.a = a;
  C.b = VectorField::zero(n);
  C.c = PotentialField::constant(n, 0.0);
  const PointJets J = point_jets(C, nullptr, TestFunction::gaussian(n), psi_jet(w), constant_weight(0.0), x, 1);
  const CoreJets K = core_jets(J);
  SRDecomposition out;
  out.A2psi = detail::A2psi(J, K);
  const double r = norm(x);
  double ahat = 0, abar = 0, hs = 0, ax2 = 0;
  for (int l = 0; l < n; ++l) {
    abar += J.A(l, l).value();
    double axl = 0;
    for (int m = 0; m < n; ++m) {
      const double alm = J.A(l, m).value();
      ahat += alm * x[l] * x[m] / (r * r);
      hs += alm * alm;
      axl += alm * x[m] / r;
    }
    ax2 += axl * axl;
  }
  out.S = ahat * ahat * wd.d4 + (2 * abar * ahat - 6 * ahat * ahat + 4 * ax2) * wd.d3 / r +
          (2 * hs + abar * abar - 6 * abar * ahat + 15 * ahat * ahat - 12 * ax2) * (wd.d2 / (r * r) - wd.d1 / (r * r * r));
  out.Rrem = out.A2psi - out.S;
  return out;
}

// Bound on the remainder: 12 n C_a (N + C_a) / (|x| <x>^{1+delta} max(R, |x|)).
inline double remainder_bound(int n, double Ca, double N, double delta, double R, const Point& x) {
  const double r = norm(x);
  return 12.0 * n * Ca * (N + Ca) / (r * std::pow(1 + r * r, 0.5 * (1 + delta)) * std::max(R, r));
}

// Upper bounds on S outside the ball |x| > R.
inline double S_bound_general(int n, double N, double nu, double ahat, double R, double r) {
  return (n - 1.0) * ((n + 3.0) / 2 * N - n * nu) * ahat * std::pow(R, n - 1) / std::pow(r, n + 2);
}
inline double S_bound_near_identity(double CI, double delta, double R, double r) {
  return 24 * CI * (R * R / std::pow(r, 5) + 1 / (r * r * r * std::pow(1 + r * r, 0.5 * delta)));
}

struct MagneticTerm {
  double Ib = 0, bound = 0;
};

// I_b = 2 Im[(db a x-hat) . (a grad^b v) conj v psi'] and its bound N^2 |db| |grad^b v| |v|.
inline MagneticTerm magnetic_term(const TestFunction& v, const CoefficientSet& C, const Weight& w, double N,
                                  const Point& x) {
  const int n = C.n;
  const double r = norm(x);
  if (r == 0) throw OriginPoint("magnetic term evaluated at the origin");
  const Eigen::MatrixXd A = C.a.value(x);
  const Eigen::MatrixXd db = C.b.db(x);
  const auto g = covariant_grad(v, C.b, x);
  const cd vv = v.value(x);
  Eigen::VectorXd xh(n);
  for (int i = 0; i < n; ++i) xh[i] = x[i] / r;
  Eigen::VectorXcd Ag = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) Ag[j] += A(j, k) * g[k];
  const Eigen::VectorXd dax = db * (A * xh);
  cd s = 0;
  for (int j = 0; j < n; ++j) s += Ag[j] * dax[j];
  const double psi1 = w.radial(r)[1];
  MagneticTerm out;
  out.Ib = 2 * (s * std::conj(vv) * psi1).imag();
  double g2 = 0;
  for (const auto& e : g) g2 += std::norm(e);
  out.bound = N * N * spectral_norm(db) * std::sqrt(g2) * std::abs(vv);
  return out;
}

struct BoundaryTermResult {
  double integral = 0;
  double max_integrand = 0;
  int samples = 0;
  bool nonpositive() const { return max_integrand <= 1e-14; }
};

// Surface quadrature of |nu . grad v|^2 a(nu, nu) a(x-hat, nu) psi'.
inline BoundaryTermResult boundary_term(const DomainSpec& domain, const MatrixField& a,
                                        const std::function<cd(const BoundarySample&)>& normal_derivative,
                                        const Weight& w, int count = 2000, std::uint64_t seed = 1) {
  BoundaryTermResult out;
  if (domain.kind() == DomainSpec::Kind::none) return out;
  const int n = w.n;
  out.max_integrand = -std::numeric_limits<double>::infinity();
  for (const auto& s : domain.boundary_samples(count, seed)) {
    const Eigen::MatrixXd A = a.value(s.x);
    const double r = norm(s.x);
    Eigen::VectorXd nu(n), xh(n);
    for (int i = 0; i < n; ++i) {
      nu[i] = s.normal[i];
      xh[i] = s.x[i] / r;
    }
    const double val =
        std::norm(normal_derivative(s)) * nu.dot(A * nu) * nu.dot(A * xh) * w.radial(r)[1];
    out.integral += s.weight * val;
    out.max_integrand = std::max(out.max_integrand, val);
    ++out.samples;
  }
  return out;
}

// ---- identity suite --------------------------------------------------------

struct IdentitySuiteOptions {
  int n = 3;
  int draws = 20;
  int points = 1000;
  std::uint64_t seed = 1;
  double R = 1.0;
  double margin = 0.05;  // excluded relative band around |x| = R and |x| = 2R
  double coefficient_amplitude = 0.2;
  int oracle_every = 10;  // finite-difference divergence oracle on every k-th point
  // Fixed coefficients for every draw (V = c); unset draws random smooth ones.
  std::optional<CoefficientSet> coefficients;
};

struct IdentitySuiteReport {
  double worst_general_first = 0, worst_general_second = 0;
  double worst_helmholtz_first = 0, worst_helmholtz_second = 0;
  double worst_oracle = 0;
  int evaluations = 0, oracle_evaluations = 0;
  double seconds = 0;
  bool pass(double tol = 1e-7, double oracle_tol = 1e-6) const {
    return evaluations > 0 && worst_general_first < tol && worst_general_second < tol &&
           worst_helmholtz_first < tol && worst_helmholtz_second < tol && worst_oracle < oracle_tol;
  }
};

// Radius in [0.3, 3] R avoiding the bands around R and 2R.
inline Point identity_sample_point(int n, Rng& rng, double R, double margin) {
  for (;;) {
    const double r = R * rng.uniform(0.3, 3.0);
    if (std::abs(r - R) < margin * R || std::abs(r - 2 * R) < margin * 2 * R) continue;
    const auto u = rng.unit_vector(n);
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = r * u[i];
    return x;
  }
}

inline IdentitySuiteReport identity_suite(const IdentitySuiteOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  if (o.coefficients && o.coefficients->n != o.n)
    throw ConfigError("identity suite: coefficient dimension " + std::to_string(o.coefficients->n) +
                      " differs from n = " + std::to_string(o.n));
  IdentitySuiteReport rep;
  Rng rng(o.seed);
  const Weight w{o.n, o.R};
  const WeightJet psi = psi_jet(w), phi = tent_weight(o.R);
  for (int d = 0; d < o.draws; ++d) {
    RandomCoefficients rc = random_coefficients(o.n, rng, o.coefficient_amplitude);
    if (o.coefficients) {
      rc.coeffs = *o.coefficients;
      const PotentialField c = o.coefficients->c;
      const int n = o.n;
      rc.V = ComplexField(JetField<cd>(n, 1, [c, n](const std::vector<RJet>& X) {
        Point x(n);
        for (int i = 0; i < n; ++i) x[i] = X[i].value();
        return std::vector<CJet>{complexify(c.jet(x, X[0].order()))};
      }));
    }
    const double lambda = rng.uniform(-5, 5), eps = rng.uniform(0.05, 2);
    for (int p = 0; p < o.points; ++p) {
      const TestFunction v = random_test_function(o.n, rng);
      const Point x = identity_sample_point(o.n, rng, o.R, o.margin);
      const auto g = general_identity_terms(rc.coeffs, rc.V, v, psi, phi, x);
      const auto h = helmholtz_identity_terms(rc.coeffs, lambda, eps, v, psi, phi, x);
      rep.worst_general_first = std::max(rep.worst_general_first, g.first.relative());
      rep.worst_general_second = std::max(rep.worst_general_second, g.second.relative());
      rep.worst_helmholtz_first = std::max(rep.worst_helmholtz_first, h.first.relative());
      rep.worst_helmholtz_second = std::max(rep.worst_helmholtz_second, h.second.relative());
      ++rep.evaluations;
      if (o.oracle_every > 0 && p % o.oracle_every == 0) {
        rep.worst_oracle = std::max(rep.worst_oracle, Q_divergence_oracle(rc.coeffs, rc.V, v, psi, x).relative());
        ++rep.oracle_evaluations;
      }
    }
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace helmest
