#include "fvk/reference/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fvk::ref {

namespace {

using sampling::Point;

double signed_area(const std::vector<Point>& nodes, const std::array<int, 4>& e) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Point& p = nodes[e[k]];
    const Point& q = nodes[e[(k + 1) % 4]];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

void add_element(Mesh& m, std::array<int, 4> e) {
  if (signed_area(m.nodes, e) < 0.0) std::swap(e[1], e[3]);
  m.elements.push_back(e);
}

// Geometric spacing on [0, 1] with last/first interval ratio `grading`.
std::vector<double> graded(int n, double grading) {
  std::vector<double> s(n + 1);
  if (n == 1 || std::fabs(grading - 1.0) < 1e-12) {
    for (int j = 0; j <= n; ++j) s[j] = static_cast<double>(j) / n;
    return s;
  }
  const double q = std::pow(grading, 1.0 / (n - 1));
  const double total = (std::pow(q, n) - 1.0) / (q - 1.0);
  double acc = 0.0, step = 1.0;
  for (int j = 0; j <= n; ++j) {
    s[j] = acc / total;
    acc += step;
    step *= q;
  }
  s[n] = 1.0;
  return s;
}

}  // namespace

std::vector<int> Mesh::segment_nodes(const std::string& segment) const {
  std::vector<int> out;
  for (const Edge& e : boundary) {
    if (e.segment != segment) continue;
    out.push_back(e.a);
    out.push_back(e.b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Mesh::min_jacobian() const {
  const double g = 1.0 / std::sqrt(3.0);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : elements) {
    for (double xi : {-g, g}) {
      for (double eta : {-g, g}) {
        const double dn_dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
        const double dn_deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
        double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
        for (int a = 0; a < 4; ++a) {
          const Point& p = nodes[e[a]];
          j11 += dn_dxi[a] * p.x;
          j12 += dn_dxi[a] * p.y;
          j21 += dn_deta[a] * p.x;
          j22 += dn_deta[a] * p.y;
        }
        worst = std::min(worst, j11 * j22 - j12 * j21);
      }
    }
  }
  return worst;
}

void Mesh::check() const {
  const int n = static_cast<int>(nodes.size());
  for (const auto& e : elements) {
    for (int a : e) {
      if (a < 0 || a >= n) throw std::runtime_error("mesh: element references a missing node");
    }
  }
  if (!elements.empty() && !(min_jacobian() > 0.0)) throw std::runtime_error("mesh: inverted element");
}

Mesh rectangle_mesh(const sampling::Rect& r, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle_mesh: need at least one element per side");
  Mesh m;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? r.y_max : r.y_min + r.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? r.x_max : r.x_min + r.width() * i / nx;
      m.nodes.push_back({x, y});
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  }
  for (int i = 0; i < nx; ++i) {
    m.boundary.push_back({id(i, 0), id(i + 1, 0), i, "bottom"});
    m.boundary.push_back({id(i, ny), id(i + 1, ny), (ny - 1) * nx + i, "top"});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary.push_back({id(0, j), id(0, j + 1), j * nx, "left"});
    m.boundary.push_back({id(nx, j), id(nx, j + 1), j * nx + nx - 1, "right"});
  }
  return m;
}

Mesh holed_corner_mesh(const sampling::Rect& r, const sampling::Ellipse& hole, int n_arc, int n_radial,
                       double grading) {
  if (n_arc < 1 || n_radial < 1) throw std::invalid_argument("holed_corner_mesh: need at least one element");
  if (hole.cx != r.x_min || hole.cy != r.y_min) {
    throw std::invalid_argument("holed_corner_mesh: hole must be centred at the lower-left corner");
  }
  if (!(hole.ax < r.width() && hole.ay < r.height())) {
    throw std::invalid_argument("holed_corner_mesh: hole reaches the outer edges");
  }
  const double quarter = std::numbers::pi / 2.0;
  const std::vector<double> s = graded(n_radial, grading);

  Mesh m;
  // Patch A: arc theta in [0, pi/4] against the right edge; patch B: arc
  // theta in [pi/4, pi/2] against the top edge. Column i of a patch runs
  // from the arc (j = 0) to the outer edge (j = n_radial).
  auto inner = [&](int patch, int i) {
    const double t = quarter * (0.5 * patch + 0.5 * i / n_arc);
    if (patch == 1 && i == n_arc) return Point{hole.cx, hole.cy + hole.ay};  // exact end points
    if (patch == 0 && i == 0) return Point{hole.cx + hole.ax, hole.cy};
    return hole.at(t);
  };
  auto outer = [&](int patch, int i) {
    const double f = static_cast<double>(i) / n_arc;
    if (patch == 0) return Point{r.x_max, i == n_arc ? r.y_max : r.y_min + f * r.height()};
    return Point{i == n_arc ? r.x_min : r.x_max - f * r.width(), r.y_max};
  };

  std::vector<std::vector<int>> ids(2 * n_arc + 1, std::vector<int>(n_radial + 1));
  for (int c = 0; c <= 2 * n_arc; ++c) {
    const int patch = c < n_arc ? 0 : 1;
    const int i = c - patch * n_arc;
    const Point a = inner(patch, i);
    const Point b = outer(patch, i);
    for (int j = 0; j <= n_radial; ++j) {
      ids[c][j] = static_cast<int>(m.nodes.size());
      if (j == n_radial) {
        m.nodes.push_back(b);
      } else {
        m.nodes.push_back({(1.0 - s[j]) * a.x + s[j] * b.x, (1.0 - s[j]) * a.y + s[j] * b.y});
      }
    }
  }
  // snap straight-edge nodes exactly onto their lines
  for (int j = 0; j <= n_radial; ++j) {
    m.nodes[ids[0][j]].y = r.y_min;
    m.nodes[ids[2 * n_arc][j]].x = r.x_min;
  }

  for (int c = 0; c < 2 * n_arc; ++c) {
    for (int j = 0; j < n_radial; ++j) {
      add_element(m, {ids[c][j], ids[c + 1][j], ids[c + 1][j + 1], ids[c][j + 1]});
    }
  }
  auto element_of = [&](int c, int j) { return c * n_radial + j; };
  for (int c = 0; c < 2 * n_arc; ++c) {
    m.boundary.push_back({ids[c][0], ids[c + 1][0], element_of(c, 0), "hole0"});
    m.boundary.push_back({ids[c][n_radial], ids[c + 1][n_radial], element_of(c, n_radial - 1),
                          c < n_arc ? "right" : "top"});
  }
  for (int j = 0; j < n_radial; ++j) {
    m.boundary.push_back({ids[0][j], ids[0][j + 1], element_of(0, j), "bottom"});
    m.boundary.push_back({ids[2 * n_arc][j], ids[2 * n_arc][j + 1], element_of(2 * n_arc - 1, j), "left"});
  }
  return m;
}

Mesh build_mesh(const sampling::Geometry& g, const MeshOptions& opt) {
  g.validate();
  if (opt.resolution < 2) throw std::invalid_argument("mesh resolution must be at least 2");
  Mesh m;
  if (g.holes.empty()) {
    const double side = std::max(g.outer.width(), g.outer.height());
    const int nx = std::max(1, static_cast<int>(std::lround(opt.resolution * g.outer.width() / side)));
    const int ny = std::max(1, static_cast<int>(std::lround(opt.resolution * g.outer.height() / side)));
    m = rectangle_mesh(g.outer, nx, ny);
  } else if (g.holes.size() == 1 && g.holes[0].cx == g.outer.x_min && g.holes[0].cy == g.outer.y_min) {
    const int half = std::max(1, opt.resolution / 2);
    m = holed_corner_mesh(g.outer, g.holes[0], half, opt.resolution, opt.grading);
  } else {
    throw std::invalid_argument("no structured mesher for this geometry (one hole at the lower-left corner at most)");
  }
  m.check();
  return m;
}

}  // namespace fvk::ref
