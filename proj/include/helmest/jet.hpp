#pragma once

// Truncated multivariate Taylor jets: a value together with all partial
// derivatives up to a fixed order (at most 4), stored as full tensors.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace helmest {

inline constexpr int kMaxJetOrder = 4;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

namespace detail {

// Set partitions of {0,..,k-1}, each partition a list of block bitmasks.
struct PartitionTable {
  std::array<std::vector<std::vector<unsigned>>, kMaxJetOrder + 1> of;

  PartitionTable() {
    of[0] = {{}};
    for (int k = 1; k <= kMaxJetOrder; ++k) {
      // Element k-1 either joins an existing block or opens a new one.
      for (const auto& p : of[k - 1]) {
        for (std::size_t b = 0; b < p.size(); ++b) {
          auto q = p;
          q[b] |= 1u << (k - 1);
          of[k].push_back(q);
        }
        auto q = p;
        q.push_back(1u << (k - 1));
        of[k].push_back(q);
      }
    }
  }
};

inline const PartitionTable& partitions() {
  static const PartitionTable table;
  return table;
}

inline int ipow(int n, int k) {
  int r = 1;
  for (int i = 0; i < k; ++i) r *= n;
  return r;
}

// Flat index of the digits of `digits` selected by `mask`, in order.
inline int sub_index(const int* digits, int k, unsigned mask, int n) {
  int idx = 0;
  for (int p = 0; p < k; ++p)
    if (mask & (1u << p)) idx = idx * n + digits[p];
  return idx;
}

inline void decode(int flat, int k, int n, int* digits) {
  for (int p = k - 1; p >= 0; --p) {
    digits[p] = flat % n;
    flat /= n;
  }
}

}  // namespace detail

template <class T>
class Jet {
 public:
  using value_type = T;

  Jet() = default;

  Jet(int dim, int order, T value = T{}) : n_(dim), order_(order) {
    if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order out of range");
    c_.assign(size_for(dim, order), T{});
    c_[0] = value;
  }

  static Jet variable(int dim, int order, int i, double x) {
    Jet j(dim, order, T(x));
    if (order >= 1) j.c_[1 + i] = T(1);
    return j;
  }

  int dim() const { return n_; }
  int order() const { return order_; }

  const T& value() const { return c_[0]; }
  T& value() { return c_[0]; }

  T* block(int k) { return c_.data() + offset(k); }
  const T* block(int k) const { return c_.data() + offset(k); }

  T d(int i) const { return block(1)[i]; }
  T d(int i, int j) const { return block(2)[i * n_ + j]; }
  T d(int i, int j, int k) const { return block(3)[(i * n_ + j) * n_ + k]; }
  T d(int i, int j, int k, int l) const { return block(4)[((i * n_ + j) * n_ + k) * n_ + l]; }

  // Jet of the partial derivative along coordinate i (one order lower).
  Jet partial(int i) const {
    if (order_ < 1) throw std::logic_error("partial of an order-0 jet");
    Jet r(n_, order_ - 1);
    for (int k = 0; k <= order_ - 1; ++k) {
      const int len = detail::ipow(n_, k);
      const T* src = block(k + 1) + i * len;
      T* dst = r.block(k);
      for (int t = 0; t < len; ++t) dst[t] = src[t];
    }
    return r;
  }

  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet r(n_, order);
    for (std::size_t t = 0; t < r.c_.size(); ++t) r.c_[t] = c_[t];
    return r;
  }

  std::vector<T> gradient() const {
    std::vector<T> g(n_);
    for (int i = 0; i < n_; ++i) g[i] = d(i);
    return g;
  }

  std::size_t size() const { return c_.size(); }
  T& raw(std::size_t t) { return c_[t]; }
  const T& raw(std::size_t t) const { return c_[t]; }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator*=(T s) {
    for (auto& e : c_) e *= s;
    return *this;
  }

  static int size_for(int n, int order) {
    int s = 0;
    for (int k = 0; k <= order; ++k) s += detail::ipow(n, k);
    return s;
  }

  int offset(int k) const {
    int s = 0;
    for (int j = 0; j < k; ++j) s += detail::ipow(n_, j);
    return s;
  }

 private:
  int n_ = 0;
  int order_ = 0;
  boost::container::small_vector<T, 40> c_;
};

using RJet = Jet<double>;
using CJet = Jet<std::complex<double>>;

template <class A, class B>
using jet_product_t = decltype(std::declval<A>() * std::declval<B>());

template <class R, class A>
Jet<R> jet_cast(const Jet<A>& a) {
  Jet<R> r(a.dim(), a.order());
  for (std::size_t t = 0; t < a.size(); ++t) r.raw(t) = R(a.raw(t));
  return r;
}

template <class A, class B>
Jet<jet_product_t<A, B>> operator*(const Jet<A>& a, const Jet<B>& b) {
  using R = jet_product_t<A, B>;
  const int n = a.dim();
  const int order = std::min(a.order(), b.order());
  Jet<R> r(n, order);
  r.value() = a.value() * b.value();
  int digits[kMaxJetOrder];
  for (int k = 1; k <= order; ++k) {
    const int len = detail::ipow(n, k);
    R* out = r.block(k);
    const unsigned full = (1u << k) - 1;
    for (int t = 0; t < len; ++t) {
      detail::decode(t, k, n, digits);
      R acc{};
      for (unsigned mask = 0; mask <= full; ++mask) {
        const int ka = __builtin_popcount(mask);
        const A av = a.block(ka)[detail::sub_index(digits, k, mask, n)];
        if (av == A{}) continue;
        acc += av * b.block(k - ka)[detail::sub_index(digits, k, full & ~mask, n)];
      }
      out[t] = acc;
    }
  }
  return r;
}

template <class A, class B>
Jet<jet_product_t<A, B>> operator+(const Jet<A>& a, const Jet<B>& b) {
  using R = jet_product_t<A, B>;
  const int order = std::min(a.order(), b.order());
  Jet<R> r(a.dim(), order);
  for (std::size_t t = 0; t < r.size(); ++t) r.raw(t) = R(a.raw(t)) + R(b.raw(t));
  return r;
}

template <class A, class B>
Jet<jet_product_t<A, B>> operator-(const Jet<A>& a, const Jet<B>& b) {
  using R = jet_product_t<A, B>;
  const int order = std::min(a.order(), b.order());
  Jet<R> r(a.dim(), order);
  for (std::size_t t = 0; t < r.size(); ++t) r.raw(t) = R(a.raw(t)) - R(b.raw(t));
  return r;
}

template <class T>
Jet<T> operator-(const Jet<T>& a) {
  Jet<T> r = a;
  r *= T(-1);
  return r;
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator*(const Jet<T>& a, S s) {
  using R = jet_product_t<T, S>;
  Jet<R> r(a.dim(), a.order());
  for (std::size_t t = 0; t < a.size(); ++t) r.raw(t) = a.raw(t) * s;
  return r;
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator*(S s, const Jet<T>& a) {
  return a * s;
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator+(const Jet<T>& a, S s) {
  using R = jet_product_t<T, S>;
  Jet<R> r = jet_cast<R>(a);
  r.value() += R(s);
  return r;
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator+(S s, const Jet<T>& a) {
  return a + s;
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator-(const Jet<T>& a, S s) {
  return a + (-s);
}

template <class T, class S, class = std::enable_if_t<std::is_arithmetic_v<S> || is_complex<S>::value>>
Jet<jet_product_t<T, S>> operator-(S s, const Jet<T>& a) {
  return (-a) + s;
}

// Composition g(f) where g[k] is the k-th derivative of g at f.value().
template <class T, class G>
Jet<jet_product_t<T, G>> compose(const Jet<T>& f, const std::array<G, kMaxJetOrder + 1>& g) {
  using R = jet_product_t<T, G>;
  const int n = f.dim();
  const int order = f.order();
  Jet<R> r(n, order);
  r.value() = R(g[0]);
  const auto& parts = detail::partitions();
  int digits[kMaxJetOrder];
  for (int k = 1; k <= order; ++k) {
    const int len = detail::ipow(n, k);
    R* out = r.block(k);
    for (int t = 0; t < len; ++t) {
      detail::decode(t, k, n, digits);
      R acc{};
      for (const auto& p : parts.of[k]) {
        R term = R(g[p.size()]);
        for (unsigned blk : p) {
          term *= f.block(__builtin_popcount(blk))[detail::sub_index(digits, k, blk, n)];
          if (term == R{}) break;
        }
        acc += term;
      }
      out[t] = acc;
    }
  }
  return r;
}

template <class T>
Jet<T> exp(const Jet<T>& f) {
  using std::exp;
  const T e = exp(f.value());
  return compose(f, std::array<T, 5>{e, e, e, e, e});
}

template <class T>
Jet<T> sin(const Jet<T>& f) {
  using std::cos;
  using std::sin;
  const T s = sin(f.value()), c = cos(f.value());
  return compose(f, std::array<T, 5>{s, c, -s, -c, s});
}

template <class T>
Jet<T> cos(const Jet<T>& f) {
  using std::cos;
  using std::sin;
  const T s = sin(f.value()), c = cos(f.value());
  return compose(f, std::array<T, 5>{c, -s, -c, s, c});
}

inline RJet pow(const RJet& f, double p) {
  const double x = f.value();
  std::array<double, 5> g{};
  double coef = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    g[k] = coef * std::pow(x, p - k);
    coef *= (p - k);
  }
  return compose(f, g);
}

inline RJet sqrt(const RJet& f) { return pow(f, 0.5); }

inline RJet log(const RJet& f) {
  const double x = f.value();
  return compose(f, std::array<double, 5>{std::log(x), 1 / x, -1 / (x * x), 2 / (x * x * x),
                                          -6 / (x * x * x * x)});
}

template <class T>
Jet<T> reciprocal(const Jet<T>& f) {
  const T x = f.value();
  const T i1 = T(1) / x;
  return compose(f, std::array<T, 5>{i1, -i1 * i1, T(2) * i1 * i1 * i1, T(-6) * i1 * i1 * i1 * i1,
                                     T(24) * i1 * i1 * i1 * i1 * i1});
}

template <class A, class B>
Jet<jet_product_t<A, B>> operator/(const Jet<A>& a, const Jet<B>& b) {
  return a * reciprocal(b);
}

inline CJet conj(const CJet& a) {
  CJet r(a.dim(), a.order());
  for (std::size_t t = 0; t < a.size(); ++t) r.raw(t) = std::conj(a.raw(t));
  return r;
}

inline RJet real(const CJet& a) {
  RJet r(a.dim(), a.order());
  for (std::size_t t = 0; t < a.size(); ++t) r.raw(t) = a.raw(t).real();
  return r;
}

inline RJet imag(const CJet& a) {
  RJet r(a.dim(), a.order());
  for (std::size_t t = 0; t < a.size(); ++t) r.raw(t) = a.raw(t).imag();
  return r;
}

inline CJet complexify(const RJet& a) { return jet_cast<std::complex<double>>(a); }

// |v|^2 as a real jet.
inline RJet abs2(const CJet& v) { return real(v * conj(v)); }

// Coordinate jets x_0..x_{n-1} at the point x.
inline std::vector<RJet> coordinate_jets(const std::vector<double>& x, int order) {
  const int n = static_cast<int>(x.size());
  std::vector<RJet> X;
  X.reserve(n);
  for (int i = 0; i < n; ++i) X.push_back(RJet::variable(n, order, i, x[i]));
  return X;
}

}  // namespace helmest
