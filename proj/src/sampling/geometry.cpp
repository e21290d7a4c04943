#include "fvk/sampling/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fvk/util/quadrature.hpp"

namespace fvk::sampling {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kArcSteps = 4096;

struct Interval {
  double lo, hi;
};

// Open interval of y covered by the ellipse at abscissa x, if any.
bool chord(const Ellipse& e, double x, Interval& out) {
  const double u = (x - e.cx) / e.ax;
  if (std::fabs(u) >= 1.0) return false;
  const double dy = e.ay * std::sqrt(1.0 - u * u);
  out = {e.cy - dy, e.cy + dy};
  return true;
}

std::vector<Interval> subtract(const std::vector<Interval>& base, const Interval& cut) {
  std::vector<Interval> out;
  for (const Interval& b : base) {
    if (cut.hi <= b.lo || cut.lo >= b.hi) {
      out.push_back(b);
      continue;
    }
    if (cut.lo > b.lo) out.push_back({b.lo, cut.lo});
    if (cut.hi < b.hi) out.push_back({cut.hi, b.hi});
  }
  return out;
}

double total_length(const std::vector<Interval>& v) {
  double s = 0.0;
  for (const Interval& i : v) s += i.hi - i.lo;
  return s;
}

}  // namespace

Point Ellipse::at(double theta) const { return {cx + ax * std::cos(theta), cy + ay * std::sin(theta)}; }

// ---------------------------------------------------------------------------

BoundaryPiece BoundaryPiece::line(std::string segment, Point a, Point b, Point outward) {
  BoundaryPiece p;
  p.segment_ = std::move(segment);
  p.a_ = a;
  p.b_ = b;
  p.normal_ = outward;
  p.length_ = std::hypot(b.x - a.x, b.y - a.y);
  return p;
}

BoundaryPiece BoundaryPiece::arc(std::string segment, int hole, const Ellipse& e, double t0, double t1) {
  BoundaryPiece p;
  p.segment_ = std::move(segment);
  p.hole_ = hole;
  p.ellipse_ = e;
  p.t0_ = t0;
  p.t1_ = t1;
  p.cumulative_.resize(kArcSteps + 1, 0.0);
  const double dt = (t1 - t0) / kArcSteps;
  const auto& rule = util::gauss_legendre(4);
  for (int k = 0; k < kArcSteps; ++k) {
    double seg = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = t0 + dt * (k + rule.nodes[q]);
      seg += rule.weights[q] * std::hypot(e.ax * std::sin(t), e.ay * std::cos(t));
    }
    p.cumulative_[k + 1] = p.cumulative_[k] + seg * dt;
  }
  p.length_ = p.cumulative_.back();
  return p;
}

double BoundaryPiece::theta_at(double s) const {
  if (!is_arc()) throw std::logic_error("theta_at on a straight piece");
  s = std::clamp(s, 0.0, length_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  int k = static_cast<int>(it - cumulative_.begin()) - 1;
  k = std::clamp(k, 0, kArcSteps - 1);
  const double span = cumulative_[k + 1] - cumulative_[k];
  const double frac = span > 0.0 ? (s - cumulative_[k]) / span : 0.0;
  return t0_ + (t1_ - t0_) * (k + frac) / kArcSteps;
}

void BoundaryPiece::eval(double s, Point& p, plate::BoundaryFrame& frame) const {
  if (!is_arc()) {
    const double f = length_ > 0.0 ? s / length_ : 0.0;
    p = {a_.x + (b_.x - a_.x) * f, a_.y + (b_.y - a_.y) * f};
    frame = {normal_.x, normal_.y, 0.0, 0.0};
    return;
  }
  const Ellipse& e = ellipse_;
  const double t = theta_at(s);
  const double c = std::cos(t), sn = std::sin(t);
  p = {e.cx + e.ax * c, e.cy + e.ay * sn};
  // gradient direction of the level function, g = (cos t / ax, sin t / ay)
  const double gx = c / e.ax, gy = sn / e.ay;
  const double gn = std::hypot(gx, gy);
  const double nx = -gx / gn, ny = -gy / gn;
  const double dgx = -sn / e.ax, dgy = c / e.ay;
  const double gdg = (gx * dgx + gy * dgy) / gn;
  const double dnx = -(dgx * gn - gx * gdg) / (gn * gn);
  const double dny = -(dgy * gn - gy * gdg) / (gn * gn);
  // the frame tangent (-ny, nx) against dr/dt = (-ax sin t, ay cos t)
  const double rx = -e.ax * sn, ry = e.ay * c;
  const double speed = std::hypot(rx, ry);
  const double sigma = (-ny * rx + nx * ry) >= 0.0 ? 1.0 : -1.0;
  frame = {nx, ny, dnx * sigma / speed, dny * sigma / speed};
}

// ---------------------------------------------------------------------------

bool Geometry::in_hole(double x, double y) const {
  for (const Ellipse& e : holes) {
    if (e.level(x, y) < 1.0) return true;
  }
  return false;
}

bool Geometry::contains(double x, double y) const { return outer.contains(x, y) && !in_hole(x, y); }

double Geometry::area() const { return region_area(*this, {}, false); }

void Geometry::validate() const {
  if (!(outer.width() > 0.0) || !(outer.height() > 0.0)) {
    throw std::invalid_argument("geometry: rectangle must have positive width and height");
  }
  for (std::size_t i = 0; i < holes.size(); ++i) {
    const Ellipse& e = holes[i];
    const std::string tag = "geometry: hole " + std::to_string(i);
    if (!(e.ax > 0.0) || !(e.ay > 0.0)) throw std::invalid_argument(tag + " needs positive semi-axes");
    if (!outer.contains(e.cx, e.cy)) throw std::invalid_argument(tag + " centre lies outside the rectangle");
    for (std::size_t j = 0; j < i; ++j) {
      for (int k = 0; k < 720; ++k) {
        const Point p = e.at(kTwoPi * k / 720.0);
        const Point q = holes[j].at(kTwoPi * k / 720.0);
        if (holes[j].level(p.x, p.y) < 1.0 || e.level(q.x, q.y) < 1.0) {
          throw std::invalid_argument(tag + " overlaps hole " + std::to_string(j));
        }
      }
    }
  }
  if (!(area() > 0.0)) throw std::invalid_argument("geometry: solid area vanishes");
}

std::vector<BoundaryPiece> Geometry::boundary() const {
  std::vector<BoundaryPiece> pieces;
  const Rect& r = outer;
  struct Edge {
    const char* name;
    bool vertical;
    double fixed, lo, hi;
    Point normal;
  };
  const std::array<Edge, 4> edges{{{"left", true, r.x_min, r.y_min, r.y_max, {-1.0, 0.0}},
                                   {"right", true, r.x_max, r.y_min, r.y_max, {1.0, 0.0}},
                                   {"bottom", false, r.y_min, r.x_min, r.x_max, {0.0, -1.0}},
                                   {"top", false, r.y_max, r.x_min, r.x_max, {0.0, 1.0}}}};
  for (const Edge& edge : edges) {
    std::vector<Interval> free{{edge.lo, edge.hi}};
    for (const Ellipse& e : holes) {
      Interval cut{};
      // chord of the ellipse along the edge line
      const Ellipse swapped = edge.vertical ? e : Ellipse{e.cy, e.cx, e.ay, e.ax};
      if (chord(swapped, edge.fixed, cut)) free = subtract(free, cut);
    }
    for (const Interval& iv : free) {
      if (iv.hi - iv.lo <= 1e-12) continue;
      const Point a = edge.vertical ? Point{edge.fixed, iv.lo} : Point{iv.lo, edge.fixed};
      const Point b = edge.vertical ? Point{edge.fixed, iv.hi} : Point{iv.hi, edge.fixed};
      pieces.push_back(BoundaryPiece::line(edge.name, a, b, edge.normal));
    }
  }

  for (std::size_t i = 0; i < holes.size(); ++i) {
    const Ellipse& e = holes[i];
    std::vector<double> cuts{0.0, kTwoPi};
    auto add = [&](double t) {
      t = std::fmod(t, kTwoPi);
      if (t < 0.0) t += kTwoPi;
      cuts.push_back(t);
    };
    for (double X : {r.x_min, r.x_max}) {
      const double c = (X - e.cx) / e.ax;
      if (std::fabs(c) <= 1.0) {
        add(std::acos(c));
        add(-std::acos(c));
      }
    }
    for (double Y : {r.y_min, r.y_max}) {
      const double s = (Y - e.cy) / e.ay;
      if (std::fabs(s) <= 1.0) {
        add(std::asin(s));
        add(std::numbers::pi - std::asin(s));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Interval> visible;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1];
      if (hi - lo < 1e-12) continue;
      const Point mid = e.at(0.5 * (lo + hi));
      if (!r.contains(mid.x, mid.y)) continue;
      if (!visible.empty() && std::fabs(visible.back().hi - lo) < 1e-12) {
        visible.back().hi = hi;
      } else {
        visible.push_back({lo, hi});
      }
    }
    if (visible.size() >= 2 && visible.front().lo < 1e-12 && visible.back().hi > kTwoPi - 1e-12) {
      visible.front().lo = visible.back().lo - kTwoPi;
      visible.pop_back();
    }
    for (const Interval& iv : visible) {
      pieces.push_back(BoundaryPiece::arc("hole" + std::to_string(i), static_cast<int>(i), e, iv.lo, iv.hi));
    }
  }
  return pieces;
}

std::vector<std::string> Geometry::segment_names() const {
  std::vector<std::string> names;
  for (const BoundaryPiece& p : boundary()) {
    if (std::find(names.begin(), names.end(), p.segment()) == names.end()) names.push_back(p.segment());
  }
  return names;
}

double region_area(const Geometry& g, const std::vector<Ellipse>& regions, bool inside) {
  const Rect& r = g.outer;
  std::vector<double> breaks{r.x_min, r.x_max};
  auto add_ellipse_breaks = [&](const Ellipse& e) {
    breaks.push_back(e.cx - e.ax);
    breaks.push_back(e.cx + e.ax);
    breaks.push_back(e.cx);
    for (double Y : {r.y_min, r.y_max}) {
      const double v = (Y - e.cy) / e.ay;
      if (std::fabs(v) < 1.0) {
        const double dx = e.ax * std::sqrt(1.0 - v * v);
        breaks.push_back(e.cx - dx);
        breaks.push_back(e.cx + dx);
      }
    }
  };
  for (const Ellipse& e : g.holes) add_ellipse_breaks(e);
  for (const Ellipse& e : regions) add_ellipse_breaks(e);
  std::vector<double> xs;
  for (double b : breaks) {
    if (b >= r.x_min && b <= r.x_max) xs.push_back(b);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  auto chord_length = [&](double x) {
    std::vector<Interval> solid{{r.y_min, r.y_max}};
    Interval cut{};
    for (const Ellipse& e : g.holes) {
      if (chord(e, x, cut)) solid = subtract(solid, cut);
    }
    if (!inside) {
      for (const Ellipse& e : regions) {
        if (chord(e, x, cut)) solid = subtract(solid, cut);
      }
      return total_length(solid);
    }
    // solid minus (solid outside every region)
    std::vector<Interval> outside = solid;
    for (const Ellipse& e : regions) {
      if (chord(e, x, cut)) outside = subtract(outside, cut);
    }
    return total_length(solid) - total_length(outside);
  };

  const auto& rule = util::gauss_legendre(48);
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double a = xs[k], b = xs[k + 1];
    if (b - a <= 0.0) continue;
    // x = a + (b-a)(1 - cos(pi u))/2 clusters nodes at both ends, which
    // removes the square-root behaviour of chords at ellipse extremes.
    double piece = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = rule.nodes[q];
      const double x = a + 0.5 * (b - a) * (1.0 - std::cos(std::numbers::pi * u));
      const double jac = 0.5 * (b - a) * std::numbers::pi * std::sin(std::numbers::pi * u);
      piece += rule.weights[q] * chord_length(x) * jac;
    }
    area += piece;
  }
  return area;
}

}  // namespace fvk::sampling
