#include "fvk/plate/field.hpp"

#include <stdexcept>

namespace fvk::plate {

const std::array<std::string, kFieldCount>& field_names() {
  static const std::array<std::string, kFieldCount> names{"u_x",  "u_y",  "w",    "N_xx", "N_yy",
                                                          "N_xy", "M_xx", "M_yy", "M_xy"};
  return names;
}

const std::array<std::string, kFieldCount>& field_units() {
  static const std::array<std::string, kFieldCount> units{"mm",   "mm",   "mm",   "N/mm", "N/mm",
                                                          "N/mm", "N",    "N",    "N"};
  return units;
}

Field parse_field(const std::string& name) {
  const auto& names = field_names();
  for (int i = 0; i < kFieldCount; ++i) {
    if (names[i] == name) return static_cast<Field>(i);
  }
  throw std::invalid_argument("unknown field '" + name + "'");
}

FieldGrid::FieldGrid(const sampling::Rect& box, int nx, int ny)
    : box_(box), nx_(nx), ny_(ny), mask_(size(), 1), values_(size()) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("field grid needs at least 2 x 2 points");
}

FieldGrid FieldGrid::over(const sampling::Geometry& g, int nx, int ny) {
  FieldGrid grid(g.outer, nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) grid.set_active(grid.index(i, j), g.contains(grid.x(i), grid.y(j)));
  }
  return grid;
}

double FieldGrid::x(int i) const {
  // exact end points
  if (i == nx_ - 1) return box_.x_max;
  return box_.x_min + box_.width() * i / (nx_ - 1);
}

double FieldGrid::y(int j) const {
  if (j == ny_ - 1) return box_.y_max;
  return box_.y_min + box_.height() * j / (ny_ - 1);
}

std::size_t FieldGrid::active_count() const {
  std::size_t n = 0;
  for (char m : mask_) n += m != 0 ? 1 : 0;
  return n;
}

std::vector<double> FieldGrid::column(Field f) const {
  std::vector<double> out;
  out.reserve(active_count());
  for (std::size_t k = 0; k < size(); ++k) {
    if (active(k)) out.push_back(values_[k][f]);
  }
  return out;
}

void FieldGrid::fill(const std::function<FieldValues(double, double)>& eval) {
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const std::size_t k = index(i, j);
      if (active(k)) values_[k] = eval(x(i), y(j));
    }
  }
}

}  // namespace fvk::plate
