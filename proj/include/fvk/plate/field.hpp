#pragma once

/// @file field.hpp
/// @brief Displacement and resultant fields sampled on a masked grid.

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fvk/sampling/geometry.hpp"

namespace fvk::plate {

enum class Field : int { ux = 0, uy, w, nxx, nyy, nxy, mxx, myy, mxy };
inline constexpr int kFieldCount = 9;

/// Column names in export order: u_x, u_y, w, N_xx, N_yy, N_xy, M_xx, M_yy, M_xy.
const std::array<std::string, kFieldCount>& field_names();
/// Units in the same order (mm, N/mm, N mm/mm).
const std::array<std::string, kFieldCount>& field_units();
Field parse_field(const std::string& name);

struct FieldValues {
  std::array<double, kFieldCount> v{};

  double& operator[](Field f) { return v[static_cast<int>(f)]; }
  double operator[](Field f) const { return v[static_cast<int>(f)]; }
};

/// Row-major (y outer, x inner) uniform grid over a rectangle; points
/// outside the solid are masked out and carry no values.
class FieldGrid {
 public:
  FieldGrid() = default;
  FieldGrid(const sampling::Rect& box, int nx, int ny);

  /// nx x ny grid over the bounding rectangle, masked by `g.contains`.
  static FieldGrid over(const sampling::Geometry& g, int nx = 101, int ny = 101);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  [[nodiscard]] const sampling::Rect& box() const { return box_; }

  [[nodiscard]] double x(int i) const;
  [[nodiscard]] double y(int j) const;
  [[nodiscard]] std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  [[nodiscard]] bool active(std::size_t k) const { return mask_[k] != 0; }
  void set_active(std::size_t k, bool on) { mask_[k] = on ? 1 : 0; }
  [[nodiscard]] std::size_t active_count() const;

  FieldValues& at(std::size_t k) { return values_[k]; }
  [[nodiscard]] const FieldValues& at(std::size_t k) const { return values_[k]; }

  /// Values of one field at the active points, in grid order.
  [[nodiscard]] std::vector<double> column(Field f) const;

  /// Fills every active point from a pointwise evaluator.
  void fill(const std::function<FieldValues(double, double)>& eval);

 private:
  sampling::Rect box_{};
  int nx_ = 0;
  int ny_ = 0;
  std::vector<char> mask_;
  std::vector<FieldValues> values_;
};

}  // namespace fvk::plate
