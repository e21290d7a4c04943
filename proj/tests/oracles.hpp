#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.
// Nothing here uses the jet engine or the tape.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace fvk::testing {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Central difference of order a in x and b in y with step h (error O(h^2)).
inline double central_partial(const std::function<double(double, double)>& f, double x, double y, int a, int b,
                              double h) {
  double acc = 0.0;
  for (int i = 0; i <= a; ++i) {
    const double wx = ((i % 2) ? -1.0 : 1.0) * binomial(a, i);
    const double dx = (0.5 * a - i) * h;
    for (int j = 0; j <= b; ++j) {
      const double wy = ((j % 2) ? -1.0 : 1.0) * binomial(b, j);
      const double dy = (0.5 * b - j) * h;
      acc += wx * wy * f(x + dx, y + dy);
    }
  }
  return acc / std::pow(h, a + b);
}

/// Nested central differences with one Richardson step (error O(h^4)).
inline double fd_partial(const std::function<double(double, double)>& f, double x, double y, int a, int b,
                         double h = 0.02) {
  if (a + b == 0) return f(x, y);
  const double coarse = central_partial(f, x, y, a, b, h);
  const double fine = central_partial(f, x, y, a, b, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

/// Central difference of a scalar function of a parameter vector in one
/// coordinate, with one Richardson step.
inline double fd_gradient(const std::function<double(const std::vector<double>&)>& f, std::vector<double> p,
                          std::size_t index, double h) {
  const double p0 = p[index];
  auto at = [&](double step) {
    p[index] = p0 + step;
    const double plus = f(p);
    p[index] = p0 - step;
    const double minus = f(p);
    p[index] = p0;
    return (plus - minus) / (2.0 * step);
  };
  const double coarse = at(h);
  const double fine = at(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

/// |a - b| <= rel * |b| or |a - b| <= abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
  const double d = std::fabs(a - b);
  return d <= rel * std::fabs(b) || d <= abs_floor;
}

}  // namespace fvk::testing
