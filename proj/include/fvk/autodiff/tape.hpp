#pragma once

/// @file tape.hpp
/// @brief Scalar reverse-mode accumulation.
///
/// Every operation on a Var that depends on a recorded input appends one node
/// (at most two parents with their local partials) to the tape that is active
/// on the calling thread. Constants carry index -1 and are never recorded.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fvk::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(double v) : value_(v) {}  // NOLINT(google-explicit-constructor): constants mix freely

  [[nodiscard]] double value() const { return value_; }
  [[nodiscard]] std::int32_t index() const { return index_; }
  [[nodiscard]] bool is_constant() const { return index_ < 0; }

  explicit operator double() const { return value_; }

  static Var make(double v, std::int32_t index) {
    Var r(v);
    r.index_ = index;
    return r;
  }

 private:
  double value_ = 0.0;
  std::int32_t index_ = -1;
};

class Tape {
 public:
  struct Node {
    std::int32_t parent[2];
    double partial[2];
  };

  /// Registers a new independent variable.
  Var variable(double v);

  /// Records a node with one parent.
  Var unary(double v, const Var& a, double da);
  /// Records a node with two parents.
  Var binary(double v, const Var& a, double da, const Var& b, double db);

  /// Reverse sweep seeded with d(out)/d(out) = 1. Returns adjoints of every
  /// recorded node; index with Var::index().
  const std::vector<double>& backward(const Var& out);

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Makes this tape the active one for the current thread while in scope.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  static Tape* active();

 private:
  std::vector<Node> nodes_;
  std::vector<double> adjoint_;
};

// Arithmetic -------------------------------------------------------------

namespace detail {
inline Var record_unary(double v, const Var& a, double da) {
  if (a.is_constant()) return Var(v);
  return Tape::active()->unary(v, a, da);
}
inline Var record_binary(double v, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant() && b.is_constant()) return Var(v);
  if (a.is_constant()) return Tape::active()->unary(v, b, db);
  if (b.is_constant()) return Tape::active()->unary(v, a, da);
  return Tape::active()->binary(v, a, da, b, db);
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::record_binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::record_binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::record_binary(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  const double v = a.value() * inv;
  return detail::record_binary(v, a, inv, b, -v * inv);
}
inline Var operator-(const Var& a) { return detail::record_unary(-a.value(), a, -1.0); }

inline Var operator+(const Var& a, double b) { return detail::record_unary(a.value() + b, a, 1.0); }
inline Var operator+(double a, const Var& b) { return b + a; }
inline Var operator-(const Var& a, double b) { return detail::record_unary(a.value() - b, a, 1.0); }
inline Var operator-(double a, const Var& b) { return detail::record_unary(a - b.value(), b, -1.0); }
inline Var operator*(const Var& a, double b) { return detail::record_unary(a.value() * b, a, b); }
inline Var operator*(double a, const Var& b) { return b * a; }
inline Var operator/(const Var& a, double b) { return a * (1.0 / b); }
inline Var operator/(double a, const Var& b) {
  const double v = a / b.value();
  return detail::record_unary(v, b, -v / b.value());
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }
inline bool operator==(const Var& a, const Var& b) { return a.value() == b.value(); }
inline bool operator!=(const Var& a, const Var& b) { return a.value() != b.value(); }

inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return detail::record_unary(t, a, 1.0 - t * t);
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::record_unary(e, a, e);
}
inline Var log(const Var& a) { return detail::record_unary(std::log(a.value()), a, 1.0 / a.value()); }
inline Var sin(const Var& a) { return detail::record_unary(std::sin(a.value()), a, std::cos(a.value())); }
inline Var cos(const Var& a) { return detail::record_unary(std::cos(a.value()), a, -std::sin(a.value())); }
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  return detail::record_unary(s, a, s > 0.0 ? 0.5 / s : 0.0);
}
inline Var pow(const Var& a, double p) {
  return detail::record_unary(std::pow(a.value(), p), a, p * std::pow(a.value(), p - 1.0));
}
inline Var abs(const Var& a) {
  const double s = a.value() > 0.0 ? 1.0 : (a.value() < 0.0 ? -1.0 : 0.0);
  return detail::record_unary(std::abs(a.value()), a, s);
}

inline bool isfinite(const Var& a) { return std::isfinite(a.value()); }

/// Value and gradient of f at x by reverse accumulation over one recording of
/// the full evaluation of f.
struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

ValueAndGradient gradient(const std::function<Var(std::span<const Var>)>& f, std::span<const double> x);

}  // namespace fvk::ad
