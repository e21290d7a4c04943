#pragma once

/// @file bending.hpp
/// @brief Finite differences for linear Kirchhoff bending on rectangles:
/// static deflection under pressure and the uniaxial buckling eigenproblem.

#include <map>
#include <string>
#include <vector>

#include "fvk/plate/field.hpp"
#include "fvk/plate/mechanics.hpp"
#include "fvk/sampling/geometry.hpp"
#include "fvk/util/expression.hpp"

namespace fvk::ref {

enum class Support { simply_supported, clamped };

Support parse_support(const std::string& s);  // "simply_supported" | "ss" | "clamped"
const char* to_string(Support s);

struct EdgeSupports {
  Support left = Support::simply_supported;
  Support right = Support::simply_supported;
  Support bottom = Support::simply_supported;
  Support top = Support::simply_supported;

  static EdgeSupports all(Support s) { return {s, s, s, s}; }
};

/// Deflection on a uniform node grid including the boundary nodes (w = 0
/// there); ghost nodes outside are reflections, odd for simple supports
/// and even for clamped edges.
class FdPlate {
 public:
  FdPlate(const sampling::Rect& box, int nx, int ny, std::vector<double> w, EdgeSupports supports,
          const plate::PlateMaterial& material);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] double hx() const { return hx_; }
  [[nodiscard]] double hy() const { return hy_; }
  [[nodiscard]] const sampling::Rect& box() const { return box_; }

  /// Nodal deflection; indices may reach one node past the boundary.
  [[nodiscard]] double w(int i, int j) const;
  [[nodiscard]] double x(int i) const { return box_.x_min + hx_ * i; }
  [[nodiscard]] double y(int j) const { return box_.y_min + hy_ * j; }

  /// Deflection and central-difference moments at a node.
  [[nodiscard]] plate::FieldValues nodal(int i, int j) const;
  /// Bilinear interpolation of the nodal values; (x, y) must lie in the box.
  [[nodiscard]] plate::FieldValues evaluate(double x, double y) const;

  [[nodiscard]] double max_abs_deflection() const;
  /// Scales w so that max |w| = 1 with a positive extreme value.
  void normalize();

 private:
  sampling::Rect box_;
  int nx_, ny_;
  double hx_, hy_;
  std::vector<double> w_;
  EdgeSupports supports_;
  plate::PlateMaterial material_;
};

/// D lap^2 w = q on a rectangle; `n` nodes along the longer side, the
/// shorter side gets the count that keeps the spacing closest to square.
/// Throws std::invalid_argument for n < 9.
FdPlate fd_bending(const sampling::Rect& box, int n, const plate::PlateMaterial& material,
                   const util::Expression& pressure, const std::map<std::string, double>& vars, EdgeSupports supports);

/// Square plate of side `side`, all edges clamped, uniform pressure q.
FdPlate fd_biharmonic_clamped(double side, int n, const plate::PlateMaterial& material, double q);

struct BucklingSolution {
  double load = 0.0;          // critical compressive N_xx, N/mm
  double k = 0.0;             // load * b^2 / (pi^2 D), b the loaded edge length
  std::vector<double> loads;  // one per returned mode, ascending
  std::vector<FdPlate> modes;
  int iterations = 0;
};

/// Smallest eigenvalues of D lap^2 w = -N w_,xx (compression along x) by
/// subspace iteration with Rayleigh-Ritz projection. Modes are normalized
/// to max |w| = 1. Throws std::runtime_error without convergence.
BucklingSolution critical_buckling_load(const plate::PlateMaterial& material, const sampling::Rect& box,
                                        EdgeSupports supports, int n = 61, int modes = 1);

}  // namespace fvk::ref
