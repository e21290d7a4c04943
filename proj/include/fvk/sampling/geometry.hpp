#pragma once

/// @file geometry.hpp
/// @brief Rectangular plates with elliptical holes, their boundary pieces
/// and exact region areas.
///
/// Holes may be clipped by the rectangle: a quarter model of a plate with a
/// central hole is a rectangle whose corner sits at the hole centre.

#include <string>
#include <vector>

#include "fvk/plate/mechanics.hpp"

namespace fvk::sampling {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }
  [[nodiscard]] bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

/// Axis-aligned ellipse with semi-axes ax (along x) and ay (along y).
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double ax = 1.0;
  double ay = 1.0;

  /// ((x-cx)/ax)^2 + ((y-cy)/ay)^2; < 1 strictly inside.
  [[nodiscard]] double level(double x, double y) const {
    const double u = (x - cx) / ax, v = (y - cy) / ay;
    return u * u + v * v;
  }
  [[nodiscard]] Point at(double theta) const;
  [[nodiscard]] Ellipse scaled(double factor) const { return {cx, cy, ax * factor, ay * factor}; }
};

/// One connected piece of a named boundary segment: a straight line or an
/// elliptical arc. Arc-length positions s run over [0, length].
class BoundaryPiece {
 public:
  static BoundaryPiece line(std::string segment, Point a, Point b, Point outward);
  /// Arc of a hole over parameter range [t0, t1]; the solid is outside the
  /// ellipse, so the normal points into the hole.
  static BoundaryPiece arc(std::string segment, int hole, const Ellipse& e, double t0, double t1);

  [[nodiscard]] const std::string& segment() const { return segment_; }
  [[nodiscard]] double length() const { return length_; }
  [[nodiscard]] bool is_arc() const { return hole_ >= 0; }
  [[nodiscard]] int hole() const { return hole_; }

  /// Point and frame at arc-length position s. The tangent of the frame
  /// points in the direction of increasing s for lines; for arcs the frame
  /// tangent is (-n_y, n_x), and dn/ds is taken along that tangent.
  void eval(double s, Point& p, plate::BoundaryFrame& frame) const;

  /// Ellipse parameter at arc-length position s (arcs only).
  [[nodiscard]] double theta_at(double s) const;

 private:
  std::string segment_;
  int hole_ = -1;
  Point a_, b_, normal_;
  Ellipse ellipse_;
  double t0_ = 0.0, t1_ = 0.0;
  double length_ = 0.0;
  std::vector<double> cumulative_;  // arc length at uniform theta steps
};

struct Geometry {
  Rect outer;
  std::vector<Ellipse> holes;

  /// Inside the closed rectangle and not strictly inside any hole.
  [[nodiscard]] bool contains(double x, double y) const;
  [[nodiscard]] bool in_hole(double x, double y) const;

  /// Solid area: rectangle minus clipped hole areas (exact up to quadrature
  /// round-off).
  [[nodiscard]] double area() const;

  /// Throws std::invalid_argument for degenerate rectangles, holes whose
  /// centre lies outside the rectangle, overlapping holes, or a vanishing
  /// solid area.
  void validate() const;

  /// Boundary pieces: rectangle edges named left/right/bottom/top with hole
  /// intersections removed, and visible hole arcs named hole0, hole1, ...
  [[nodiscard]] std::vector<BoundaryPiece> boundary() const;

  /// Names of the boundary segments that have positive length.
  [[nodiscard]] std::vector<std::string> segment_names() const;
};

/// Area of { p in solid : p inside any of `regions` } when `inside` is true,
/// or of the solid outside all `regions` when false. Integrates exact
/// vertical chord lengths with endpoint-clustered Gauss-Legendre rules.
double region_area(const Geometry& g, const std::vector<Ellipse>& regions, bool inside);

}  // namespace fvk::sampling
