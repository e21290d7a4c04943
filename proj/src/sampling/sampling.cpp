#include "fvk/sampling/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fvk::sampling {

namespace {

// stream ids: domain regions 0.., boundary segments 1000..
constexpr std::uint64_t kBoundaryStream = 1000;

}  // namespace

double SampleSet::total_area() const {
  double a = 0.0;
  for (const DomainRegion& r : regions) a += r.area;
  return a;
}

double SampleSet::total_length() const {
  double l = 0.0;
  for (const SegmentSamples& s : segments) l += s.length;
  return l;
}

std::size_t SampleSet::domain_count() const {
  std::size_t n = 0;
  for (const DomainRegion& r : regions) n += r.points.size();
  return n;
}

std::size_t SampleSet::boundary_count() const {
  std::size_t n = 0;
  for (const SegmentSamples& s : segments) n += s.points.size();
  return n;
}

const SegmentSamples* SampleSet::segment(const std::string& name) const {
  for (const SegmentSamples& s : segments) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void SamplingPlan::validate() const {
  geometry.validate();
  if (domain_count < 1) throw std::invalid_argument("sampling: domain sample count must be >= 1");
  if (boundary_count < 1) throw std::invalid_argument("sampling: boundary sample count must be >= 1");
  if (refinement.enabled) {
    if (geometry.holes.empty()) throw std::invalid_argument("sampling: refinement needs at least one hole");
    if (!(refinement.scale > 1.0)) throw std::invalid_argument("sampling: refinement scale must exceed 1");
    if (!(refinement.density > 0.0)) throw std::invalid_argument("sampling: refinement density must be positive");
  }
}

std::vector<Point> sample_domain(const Geometry& g, int count, util::Rng& rng, const std::vector<Ellipse>& regions,
                                 bool inside) {
  if (count < 1) throw std::invalid_argument("sample_domain: count must be >= 1");
  Rect box = g.outer;
  if (inside && !regions.empty()) {
    Rect b{1e300, -1e300, 1e300, -1e300};
    for (const Ellipse& e : regions) {
      b.x_min = std::min(b.x_min, e.cx - e.ax);
      b.x_max = std::max(b.x_max, e.cx + e.ax);
      b.y_min = std::min(b.y_min, e.cy - e.ay);
      b.y_max = std::max(b.y_max, e.cy + e.ay);
    }
    box = {std::max(b.x_min, g.outer.x_min), std::min(b.x_max, g.outer.x_max), std::max(b.y_min, g.outer.y_min),
           std::min(b.y_max, g.outer.y_max)};
  }
  auto accept = [&](double x, double y) {
    if (!g.contains(x, y)) return false;
    if (regions.empty()) return true;
    bool in_any = false;
    for (const Ellipse& e : regions) in_any = in_any || e.level(x, y) < 1.0;
    return inside ? in_any : !in_any;
  };
  std::vector<Point> pts;
  pts.reserve(count);
  std::size_t tries = 0;
  while (static_cast<int>(pts.size()) < count) {
    const double x = rng.uniform(box.x_min, box.x_max);
    const double y = rng.uniform(box.y_min, box.y_max);
    ++tries;
    if (accept(x, y)) pts.push_back({x, y});
    if (tries >= 10000 && pts.size() * 100 < tries) {
      throw std::runtime_error("sample_domain: rejection acceptance below 1% (degenerate geometry)");
    }
  }
  return pts;
}

std::vector<BoundarySample> sample_boundary(const std::vector<BoundaryPiece>& pieces, int count, util::Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_boundary: count must be >= 1");
  double total = 0.0;
  for (const BoundaryPiece& p : pieces) total += p.length();
  if (!(total > 0.0)) throw std::invalid_argument("sample_boundary: segment has zero length");
  // largest-remainder split of the count by piece length
  std::vector<int> n(pieces.size(), 0);
  std::vector<std::pair<double, std::size_t>> rem;
  int assigned = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double exact = count * pieces[i].length() / total;
    n[i] = static_cast<int>(std::floor(exact));
    assigned += n[i];
    rem.emplace_back(exact - n[i], i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (int k = 0; k < count - assigned; ++k) ++n[rem[k % rem.size()].second];

  std::vector<BoundarySample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (int k = 0; k < n[i]; ++k) {
      Point p;
      BoundarySample b;
      pieces[i].eval(rng.uniform() * pieces[i].length(), p, b.frame);
      b.x = p.x;
      b.y = p.y;
      out.push_back(b);
    }
  }
  return out;
}

std::vector<Ellipse> refinement_regions(const Geometry& g, const Refinement& r) {
  std::vector<Ellipse> out;
  if (!r.enabled) return out;
  for (const Ellipse& e : g.holes) out.push_back(e.scaled(r.scale));
  return out;
}

std::pair<int, int> split_counts(int total, double area_inner, double area_outer, double density) {
  const double w_in = density * area_inner;
  const double w_out = area_outer;
  int inner = static_cast<int>(std::lround(total * w_in / (w_in + w_out)));
  inner = std::clamp(inner, 1, total - 1);
  return {inner, total - inner};
}

SampleSet resample_epoch(const SamplingPlan& plan, int epoch) {
  const int e = plan.frozen ? 0 : epoch;
  const Geometry& g = plan.geometry;
  SampleSet set;

  const std::vector<Ellipse> regions = refinement_regions(g, plan.refinement);
  if (regions.empty()) {
    util::Rng rng(util::derive_seed(plan.seed, e, 0));
    set.regions.push_back({g.area(), sample_domain(g, plan.domain_count, rng)});
  } else {
    const double a_in = region_area(g, regions, true);
    const double a_out = region_area(g, regions, false);
    auto [n_in, n_out] = split_counts(plan.domain_count, a_in, a_out, plan.refinement.density);
    util::Rng rng_in(util::derive_seed(plan.seed, e, 0));
    util::Rng rng_out(util::derive_seed(plan.seed, e, 1));
    set.regions.push_back({a_in, sample_domain(g, n_in, rng_in, regions, true)});
    set.regions.push_back({a_out, sample_domain(g, n_out, rng_out, regions, false)});
  }

  const std::vector<BoundaryPiece> pieces = g.boundary();
  std::vector<std::string> names;
  for (const BoundaryPiece& p : pieces) {
    if (std::find(names.begin(), names.end(), p.segment()) == names.end()) names.push_back(p.segment());
  }
  for (std::size_t s = 0; s < names.size(); ++s) {
    std::vector<BoundaryPiece> mine;
    double length = 0.0;
    for (const BoundaryPiece& p : pieces) {
      if (p.segment() == names[s]) {
        mine.push_back(p);
        length += p.length();
      }
    }
    util::Rng rng(util::derive_seed(plan.seed, e, kBoundaryStream + s));
    set.segments.push_back({names[s], length, sample_boundary(mine, plan.boundary_count, rng)});
  }
  return set;
}

double mc_integrate_domain(const std::vector<double>& values, double area) {
  if (values.empty()) throw std::invalid_argument("mc_integrate_domain: empty sample set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size()) * area;
}

double mc_integrate_boundary(const std::vector<double>& values, double length) {
  if (values.empty()) throw std::invalid_argument("mc_integrate_boundary: empty sample set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size()) * length;
}

}  // namespace fvk::sampling
