#include "fvk/reference/dataset.hpp"

#include <ostream>
#include <stdexcept>

#include "fvk/sampling/sampling.hpp"
#include "fvk/util/random.hpp"

namespace fvk::ref {

loss::DataPoint to_data_point(double x, double y, const plate::FieldValues& f) {
  using plate::Field;
  return {x, y, f[Field::ux], f[Field::uy], f[Field::w], f[Field::nxx], f[Field::nyy], f[Field::nxy]};
}

loss::Dataset make_dataset(const FieldSampler& field, const sampling::Geometry& g, int count, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("make_dataset: count must be positive");
  util::Rng rng(seed);
  loss::Dataset out;
  out.reserve(count);
  int misses = 0;
  while (static_cast<int>(out.size()) < count) {
    const auto pts = sampling::sample_domain(g, count - static_cast<int>(out.size()), rng);
    for (const sampling::Point& p : pts) {
      const auto v = field(p.x, p.y);
      if (v) {
        out.push_back(to_data_point(p.x, p.y, *v));
      } else if (++misses > count) {
        throw std::runtime_error("make_dataset: the field does not cover the geometry");
      }
    }
  }
  return out;
}

loss::Dataset make_dataset(const PlaneStressSolution& s, const sampling::Geometry& g, int count,
                           std::uint64_t seed, std::ostream* warn) {
  if (warn != nullptr && static_cast<std::size_t>(count) > 4 * s.mesh().nodes.size()) {
    *warn << "warning: " << count << " samples from a mesh of " << s.mesh().nodes.size()
          << " nodes exceed its resolution\n";
  }
  return make_dataset([&s](double x, double y) { return s.evaluate(x, y); }, g, count, seed);
}

}  // namespace fvk::ref
