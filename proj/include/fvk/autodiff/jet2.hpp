#pragma once

/// @file jet2.hpp
/// @brief Truncated bivariate Taylor polynomials ("jets") in (x, y).
///
/// A Jet2 of order K carries every mixed partial d^{a+b} f / dx^a dy^b with
/// a + b <= K. Internally the coefficients are stored Taylor-normalized,
///   c[a,b] = (d^{a+b} f / dx^a dy^b) / (a! b!),
/// so products are plain truncated Cauchy products. Use partial() to read an
/// actual derivative.
///
/// Layout is by total degree n = a + b, then by b:
///   index(a, b) = n (n + 1) / 2 + b.
///
/// The scalar type T is double for plain evaluation, or ad::Var when the
/// whole jet computation has to be recorded for reverse accumulation.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace fvk::ad {

inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetSize = (kMaxJetOrder + 1) * (kMaxJetOrder + 2) / 2;

constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }

constexpr int jet_index(int a, int b) {
  const int n = a + b;
  return n * (n + 1) / 2 + b;
}

struct MultiIndex {
  int a = 0;  // power of x
  int b = 0;  // power of y
};

constexpr MultiIndex jet_multi_index(int index) {
  int n = 0;
  while ((n + 1) * (n + 2) / 2 <= index) ++n;
  const int b = index - n * (n + 1) / 2;
  return {n - b, b};
}

/// One term c[k] += x[i] * y[j] of the truncated product.
struct ProductTerm {
  unsigned char i, j, k;
};

namespace detail {

constexpr int product_term_count(int order) {
  int count = 0;
  for (int k = 0; k < jet_size(order); ++k) {
    const MultiIndex mk = jet_multi_index(k);
    count += (mk.a + 1) * (mk.b + 1);
  }
  return count;
}

inline constexpr int kMaxProductTerms = product_term_count(kMaxJetOrder);

struct ProductTable {
  std::array<ProductTerm, kMaxProductTerms> terms{};
  // Terms are ordered by output index; terms producing an index < size(K)
  // form a prefix, so a truncated product only walks count[K] entries.
  std::array<int, kMaxJetOrder + 1> count{};
};

constexpr ProductTable make_product_table() {
  ProductTable table{};
  int t = 0;
  for (int k = 0; k < kMaxJetSize; ++k) {
    const MultiIndex mk = jet_multi_index(k);
    for (int a1 = 0; a1 <= mk.a; ++a1) {
      for (int b1 = 0; b1 <= mk.b; ++b1) {
        table.terms[t++] = {static_cast<unsigned char>(jet_index(a1, b1)),
                            static_cast<unsigned char>(jet_index(mk.a - a1, mk.b - b1)),
                            static_cast<unsigned char>(k)};
      }
    }
  }
  for (int order = 0; order <= kMaxJetOrder; ++order) table.count[order] = product_term_count(order);
  return table;
}

inline constexpr ProductTable kProductTable = make_product_table();

constexpr double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

[[noreturn]] inline void bad_order(int order) {
  throw std::invalid_argument("jet order " + std::to_string(order) + " outside [0, " + std::to_string(kMaxJetOrder) +
                              "]");
}

inline void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder) [[unlikely]] bad_order(order);
}

}  // namespace detail

/// Product terms for a truncated product of jets of the given order.
inline const ProductTerm* product_terms_begin() { return detail::kProductTable.terms.data(); }
inline int product_term_count(int order) { return detail::kProductTable.count[order]; }

template <class T>
class Jet2 {
 public:
  Jet2() = default;

  explicit Jet2(int order) : order_(order) {
    detail::check_order(order);
    c_.fill(T(0.0));
  }

  /// Constant jet.
  Jet2(int order, T value) : Jet2(order) { c_[0] = value; }

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int size() const { return jet_size(order_); }

  [[nodiscard]] const T& value() const { return c_[0]; }

  /// Taylor-normalized coefficient by flat index.
  T& operator[](int i) { return c_[i]; }
  const T& operator[](int i) const { return c_[i]; }

  [[nodiscard]] const T& taylor(int a, int b) const { return c_[jet_index(a, b)]; }
  T& taylor(int a, int b) { return c_[jet_index(a, b)]; }

  /// Actual mixed partial d^{a+b} / dx^a dy^b.
  [[nodiscard]] T partial(int a, int b) const {
    if (a + b > order_) throw std::out_of_range("partial beyond jet order");
    return c_[jet_index(a, b)] * (detail::factorial(a) * detail::factorial(b));
  }

  /// Sets coefficient from an actual mixed partial.
  void set_partial(int a, int b, T value) {
    c_[jet_index(a, b)] = value / (detail::factorial(a) * detail::factorial(b));
  }

  Jet2& operator+=(const Jet2& o) {
    for (int i = 0; i < size(); ++i) c_[i] = c_[i] + o.c_[i];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    for (int i = 0; i < size(); ++i) c_[i] = c_[i] - o.c_[i];
    return *this;
  }
  Jet2& operator*=(const T& s) {
    for (int i = 0; i < size(); ++i) c_[i] = c_[i] * s;
    return *this;
  }

 private:
  int order_ = 0;
  std::array<T, kMaxJetSize> c_{};
};

// ---------------------------------------------------------------------------
// Seeds and structural operations

/// Jets for the coordinates themselves: value set, unit first derivative in
/// the own variable. Valid orders are 1..4.
template <class T = double>
std::pair<Jet2<T>, Jet2<T>> jet_seed(T x, T y, int order) {
  if (order < 1 || order > kMaxJetOrder) {
    throw std::invalid_argument("jet_seed: order must be in [1, 4], got " + std::to_string(order));
  }
  Jet2<T> jx(order, x);
  Jet2<T> jy(order, y);
  jx[jet_index(1, 0)] = T(1.0);
  jy[jet_index(0, 1)] = T(1.0);
  return {jx, jy};
}

/// Drops coefficients above the requested order.
template <class T>
Jet2<T> truncate(const Jet2<T>& a, int order) {
  if (order > a.order()) throw std::invalid_argument("truncate: cannot raise jet order");
  Jet2<T> r(order);
  for (int i = 0; i < r.size(); ++i) r[i] = a[i];
  return r;
}

/// d/dx of a jet, one order lower.
template <class T>
Jet2<T> d_dx(const Jet2<T>& f) {
  if (f.order() < 1) throw std::invalid_argument("d_dx: jet order 0 has no derivatives");
  Jet2<T> r(f.order() - 1);
  for (int k = 0; k < r.size(); ++k) {
    const MultiIndex m = jet_multi_index(k);
    r[k] = f.taylor(m.a + 1, m.b) * double(m.a + 1);
  }
  return r;
}

/// d/dy of a jet, one order lower.
template <class T>
Jet2<T> d_dy(const Jet2<T>& f) {
  if (f.order() < 1) throw std::invalid_argument("d_dy: jet order 0 has no derivatives");
  Jet2<T> r(f.order() - 1);
  for (int k = 0; k < r.size(); ++k) {
    const MultiIndex m = jet_multi_index(k);
    r[k] = f.taylor(m.a, m.b + 1) * double(m.b + 1);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Arithmetic

template <class S>
struct is_jet : std::false_type {};
template <class T>
struct is_jet<Jet2<T>> : std::true_type {};

/// Scalars that may be mixed with a jet: anything that is not itself a jet.
template <class S>
concept JetScalar = !is_jet<std::remove_cvref_t<S>>::value;

namespace detail {
template <class T>
int common_order(const Jet2<T>& a, const Jet2<T>& b) {
  if (a.order() != b.order()) throw std::invalid_argument("jet order mismatch");
  return a.order();
}
}  // namespace detail

template <class T>
Jet2<T> operator+(Jet2<T> a, const Jet2<T>& b) {
  detail::common_order(a, b);
  return a += b;
}

template <class T>
Jet2<T> operator-(Jet2<T> a, const Jet2<T>& b) {
  detail::common_order(a, b);
  return a -= b;
}

template <class T>
Jet2<T> operator-(Jet2<T> a) {
  for (int i = 0; i < a.size(); ++i) a[i] = -a[i];
  return a;
}

template <class T>
Jet2<T> operator*(const Jet2<T>& x, const Jet2<T>& y) {
  const int order = detail::common_order(x, y);
  Jet2<T> r(order);
  const ProductTerm* terms = product_terms_begin();
  const int n = product_term_count(order);
  for (int t = 0; t < n; ++t) r[terms[t].k] = r[terms[t].k] + x[terms[t].i] * y[terms[t].j];
  return r;
}

template <class T, JetScalar S>
Jet2<T> operator*(Jet2<T> a, const S& s) {
  const T st(s);
  return a *= st;
}

template <class T, JetScalar S>
Jet2<T> operator*(const S& s, Jet2<T> a) {
  const T st(s);
  return a *= st;
}

template <class T, JetScalar S>
Jet2<T> operator+(Jet2<T> a, const S& s) {
  a[0] = a[0] + T(s);
  return a;
}

template <class T, JetScalar S>
Jet2<T> operator+(const S& s, Jet2<T> a) {
  a[0] = a[0] + T(s);
  return a;
}

template <class T, JetScalar S>
Jet2<T> operator-(Jet2<T> a, const S& s) {
  a[0] = a[0] - T(s);
  return a;
}

template <class T, JetScalar S>
Jet2<T> operator-(const S& s, const Jet2<T>& a) {
  Jet2<T> r = -a;
  r[0] = r[0] + T(s);
  return r;
}

/// Composition f(a) given the Taylor coefficients of f at a.value():
/// taylor[n] = f^{(n)}(a0) / n!, n = 0..order.
template <class T, std::size_t N>
Jet2<T> compose(const Jet2<T>& a, const std::array<T, N>& taylor) {
  const int order = a.order();
  Jet2<T> delta = a;
  delta[0] = T(0.0);
  Jet2<T> r(order, taylor[0]);
  if (order == 0) return r;
  Jet2<T> power = delta;
  for (int n = 1; n <= order; ++n) {
    if (n > 1) power = power * delta;
    for (int i = 1; i < r.size(); ++i) r[i] = r[i] + taylor[n] * power[i];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Taylor coefficients of the supported primitives. Each fills
// out[n] = f^{(n)}(z) / n! for n = 0..count-1 (count <= kMaxJetOrder + 2, the
// extra slot is used by reverse accumulation through a composition).

inline constexpr int kMaxTaylorTerms = kMaxJetOrder + 2;

namespace detail {

/// Taylor coefficients a_n of f(z + d) for f' = c1 f + c2 f^2 + c0, from
/// (n + 1) a_{n+1} = c0 [n = 0] + c1 a_n + c2 sum_k a_k a_{n-k}.
template <class T>
void riccati_taylor(const T& f, double c0, double c1, double c2, int count, T* out) {
  out[0] = f;
  for (int n = 0; n + 1 < count; ++n) {
    T conv = out[0] * out[n];
    for (int k = 1; k <= n; ++k) conv = conv + out[k] * out[n - k];
    T next = c2 * conv;
    if (c1 != 0.0) next = next + c1 * out[n];
    if (n == 0) next = next + c0;
    out[n + 1] = next * (1.0 / (n + 1));
  }
}

}  // namespace detail

template <class T>
void tanh_taylor(const T& z, int count, T* out) {
  using std::tanh;
  // tanh' = 1 - tanh^2
  detail::riccati_taylor(T(tanh(z)), 1.0, 0.0, -1.0, count, out);
}

template <class T>
void sigmoid_taylor(const T& z, int count, T* out) {
  using std::exp;
  // s' = s - s^2
  const T s = 1.0 / (1.0 + exp(-z));
  detail::riccati_taylor(s, 0.0, 1.0, -1.0, count, out);
}

template <class T>
void sin_taylor(const T& z, int count, T* out) {
  using std::cos;
  using std::sin;
  const T s = sin(z);
  const T c = cos(z);
  for (int n = 0; n < count; ++n) {
    const T d = (n % 4 == 0) ? s : (n % 4 == 1) ? c : (n % 4 == 2) ? T(-s) : T(-c);
    out[n] = d * (1.0 / detail::factorial(n));
  }
}

template <class T>
void cos_taylor(const T& z, int count, T* out) {
  using std::cos;
  using std::sin;
  const T s = sin(z);
  const T c = cos(z);
  for (int n = 0; n < count; ++n) {
    const T d = (n % 4 == 0) ? c : (n % 4 == 1) ? T(-s) : (n % 4 == 2) ? T(-c) : s;
    out[n] = d * (1.0 / detail::factorial(n));
  }
}

template <class T>
void exp_taylor(const T& z, int count, T* out) {
  using std::exp;
  const T e = exp(z);
  for (int n = 0; n < count; ++n) out[n] = e * (1.0 / detail::factorial(n));
}

/// z^p for real p, z > 0 (or integral p).
template <class T>
void pow_taylor(const T& z, double p, int count, T* out) {
  using std::pow;
  double falling = 1.0;
  for (int n = 0; n < count; ++n) {
    out[n] = (n == 0 ? T(pow(z, p)) : T(pow(z, p - n) * falling)) * (1.0 / detail::factorial(n));
    falling *= (p - n);
  }
}

/// ReLU: only the first derivative survives away from the kink.
template <class T>
void relu_taylor(const T& z, int count, T* out) {
  const bool on = z > 0.0;
  for (int n = 0; n < count; ++n) out[n] = T(0.0);
  if (on) {
    out[0] = z;
    if (count > 1) out[1] = T(1.0);
  }
}

// ---------------------------------------------------------------------------
// Elementary functions on jets

template <class T>
Jet2<T> tanh(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  tanh_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> sigmoid(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  sigmoid_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> relu(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  relu_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> sin(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  sin_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> cos(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  cos_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> exp(const Jet2<T>& a) {
  std::array<T, kMaxTaylorTerms> t{};
  exp_taylor(a.value(), a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> sqrt(const Jet2<T>& a) {
  if (a.value() < 0.0) throw std::domain_error("jet sqrt of negative value");
  if (a.value() == 0.0 && a.order() > 0) throw std::domain_error("jet sqrt not differentiable at 0");
  std::array<T, kMaxTaylorTerms> t{};
  pow_taylor(a.value(), 0.5, a.order() + 1, t.data());
  return compose(a, t);
}

/// Real power. Integral exponents are expanded by repeated products so that
/// non-positive bases are allowed.
template <class T>
Jet2<T> pow(const Jet2<T>& a, double p) {
  if (p == std::floor(p) && std::abs(p) <= 16.0) {
    const int n = static_cast<int>(std::abs(p));
    Jet2<T> r(a.order(), T(1.0));
    for (int i = 0; i < n; ++i) r = r * a;
    if (p < 0) {
      Jet2<T> one(a.order(), T(1.0));
      return one / r;
    }
    return r;
  }
  if (!(a.value() > 0.0)) throw std::domain_error("jet pow with non-integer exponent needs positive base");
  std::array<T, kMaxTaylorTerms> t{};
  pow_taylor(a.value(), p, a.order() + 1, t.data());
  return compose(a, t);
}

template <class T>
Jet2<T> reciprocal(const Jet2<T>& a) {
  if (a.value() == 0.0) throw std::domain_error("jet division by zero value");
  std::array<T, kMaxTaylorTerms> t{};
  const T inv = 1.0 / a.value();
  T term = inv;
  for (int n = 0; n <= a.order(); ++n) {
    t[n] = (n % 2 == 0) ? term : T(-term);
    term = term * inv;
  }
  return compose(a, t);
}

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
  return a * reciprocal(b);
}

template <class T, JetScalar S>
Jet2<T> operator/(Jet2<T> a, const S& s) {
  if (T(s) == 0.0) throw std::domain_error("jet division by zero value");
  const T inv = 1.0 / T(s);
  return a *= inv;
}

/// |a|. At a zero value the subgradient 0 is used for every derivative.
template <class T>
Jet2<T> abs(const Jet2<T>& a) {
  if (a.value() > 0.0) return a;
  if (a.value() < 0.0) return -a;
  return Jet2<T>(a.order());
}

}  // namespace fvk::ad
