#include "fvk/reference/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fvk::ref {

namespace {

using sampling::Point;
using Tensor = plate::Tensor2<double>;

constexpr std::array<double, 4> kCornerXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kCornerEta{-1.0, -1.0, 1.0, 1.0};

struct Shape {
  std::array<double, 4> n{};
  std::array<double, 4> dxi{};
  std::array<double, 4> deta{};
};

Shape shape(double xi, double eta) {
  Shape s;
  for (int a = 0; a < 4; ++a) {
    s.n[a] = 0.25 * (1 + kCornerXi[a] * xi) * (1 + kCornerEta[a] * eta);
    s.dxi[a] = 0.25 * kCornerXi[a] * (1 + kCornerEta[a] * eta);
    s.deta[a] = 0.25 * kCornerEta[a] * (1 + kCornerXi[a] * xi);
  }
  return s;
}

// Cartesian shape-function gradients; returns det J.
double gradients(const Mesh& m, const std::array<int, 4>& e, const Shape& s, std::array<double, 4>& dx,
                 std::array<double, 4>& dy) {
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  for (int a = 0; a < 4; ++a) {
    const Point& p = m.nodes[e[a]];
    j11 += s.dxi[a] * p.x;
    j12 += s.dxi[a] * p.y;
    j21 += s.deta[a] * p.x;
    j22 += s.deta[a] * p.y;
  }
  const double det = j11 * j22 - j12 * j21;
  if (!(det > 0.0)) throw std::runtime_error("fem: inverted element");
  for (int a = 0; a < 4; ++a) {
    dx[a] = (j22 * s.dxi[a] - j12 * s.deta[a]) / det;
    dy[a] = (-j21 * s.dxi[a] + j11 * s.deta[a]) / det;
  }
  return det;
}

// 3x3 map from (eps_xx, eps_yy, gamma_xy) to (N_xx, N_yy, N_xy), built
// from the plate constitutive law.
std::array<std::array<double, 3>, 3> membrane_matrix(const plate::PlateMaterial& mat) {
  const std::array<Tensor, 3> unit{Tensor{1.0, 0.0, 0.0}, Tensor{0.0, 1.0, 0.0}, Tensor{0.0, 0.0, 0.5}};
  std::array<std::array<double, 3>, 3> d{};
  for (int c = 0; c < 3; ++c) {
    const Tensor s = plate::isotropic(mat.C(), mat.nu, unit[c]);
    d[0][c] = s.xx;
    d[1][c] = s.yy;
    d[2][c] = s.xy;
  }
  return d;
}

Point segment_normal(const std::string& segment) {
  if (segment == "left") return {-1.0, 0.0};
  if (segment == "right") return {1.0, 0.0};
  if (segment == "bottom") return {0.0, -1.0};
  if (segment == "top") return {0.0, 1.0};
  throw std::invalid_argument("fem: kinematic in-plane conditions are only supported on straight outer edges, not '" +
                              segment + "'");
}

// Newton inversion of the bilinear map.
bool inverse_map(const Mesh& m, const std::array<int, 4>& e, double x, double y, double& xi, double& eta) {
  xi = 0.0;
  eta = 0.0;
  for (int it = 0; it < 30; ++it) {
    const Shape s = shape(xi, eta);
    double fx = -x, fy = -y, j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (int a = 0; a < 4; ++a) {
      const Point& p = m.nodes[e[a]];
      fx += s.n[a] * p.x;
      fy += s.n[a] * p.y;
      j11 += s.dxi[a] * p.x;
      j12 += s.deta[a] * p.x;
      j21 += s.dxi[a] * p.y;
      j22 += s.deta[a] * p.y;
    }
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) return false;
    const double dxi = (j22 * fx - j12 * fy) / det;
    const double deta = (-j21 * fx + j11 * fy) / det;
    xi -= dxi;
    eta -= deta;
    if (std::fabs(dxi) + std::fabs(deta) < 1e-14) return true;
  }
  return std::isfinite(xi) && std::isfinite(eta);
}


// Superconvergent patch recovery: around every interior node a bilinear
// least-squares fit to the Gauss values of the adjacent elements gives the
// nodal value; boundary nodes average the fits of the patches that contain
// them. Nodes reached by no patch keep the extrapolated element average.
std::vector<Tensor> recover_nodal(const Mesh& m, const std::vector<std::array<Tensor, 4>>& gp,
                                  const std::vector<std::array<Point, 4>>& gpos) {
  const std::size_t nn = m.nodes.size();
  std::vector<std::vector<int>> around(nn);
  for (std::size_t k = 0; k < m.elements.size(); ++k) {
    for (int a : m.elements[k]) around[a].push_back(static_cast<int>(k));
  }
  std::vector<char> boundary(nn, 0);
  for (const Mesh::Edge& e : m.boundary) boundary[e.a] = boundary[e.b] = 1;

  std::vector<Tensor> out(nn);
  std::vector<int> hits(nn, 0);
  auto add = [&](int node, const Tensor& t, bool own) {
    if (own) {
      out[node] = t;
      hits[node] = -1;  // final
    } else if (hits[node] >= 0) {
      out[node].xx += t.xx;
      out[node].yy += t.yy;
      out[node].xy += t.xy;
      ++hits[node];
    }
  };
  for (std::size_t v = 0; v < nn; ++v) {
    if (boundary[v] || around[v].size() < 2) continue;
    const Point c = m.nodes[v];
    double scale = 0.0;
    for (int k : around[v]) {
      for (const Point& p : gpos[k]) scale = std::max(scale, std::hypot(p.x - c.x, p.y - c.y));
    }
    const int rows = static_cast<int>(4 * around[v].size());
    Eigen::MatrixXd a(rows, 4);
    Eigen::MatrixXd b(rows, 3);
    int r = 0;
    for (int k : around[v]) {
      for (int q = 0; q < 4; ++q, ++r) {
        const double xi = (gpos[k][q].x - c.x) / scale, eta = (gpos[k][q].y - c.y) / scale;
        a.row(r) << 1.0, xi, eta, xi * eta;
        b.row(r) << gp[k][q].xx, gp[k][q].yy, gp[k][q].xy;
      }
    }
    const Eigen::MatrixXd coef = a.colPivHouseholderQr().solve(b);
    auto fit = [&](const Point& p) {
      const double xi = (p.x - c.x) / scale, eta = (p.y - c.y) / scale;
      const Eigen::RowVector4d basis(1.0, xi, eta, xi * eta);
      const Eigen::RowVector3d t = basis * coef;
      return Tensor{t[0], t[1], t[2]};
    };
    add(static_cast<int>(v), fit(c), true);
    std::vector<int> patch_nodes;
    for (int k : around[v]) {
      for (int n : m.elements[k]) {
        if (boundary[n]) patch_nodes.push_back(n);
      }
    }
    std::sort(patch_nodes.begin(), patch_nodes.end());
    patch_nodes.erase(std::unique(patch_nodes.begin(), patch_nodes.end()), patch_nodes.end());
    for (int n : patch_nodes) add(n, fit(m.nodes[n]), false);
  }

  // fallback: Gauss values extrapolated to the corners, averaged
  const double r3 = std::sqrt(3.0);
  std::vector<Tensor> ext(nn);
  std::vector<int> count(nn, 0);
  for (std::size_t k = 0; k < m.elements.size(); ++k) {
    for (int a = 0; a < 4; ++a) {
      const Shape s = shape(r3 * kCornerXi[a], r3 * kCornerEta[a]);
      Tensor& t = ext[m.elements[k][a]];
      for (int q = 0; q < 4; ++q) {
        t.xx += s.n[q] * gp[k][q].xx;
        t.yy += s.n[q] * gp[k][q].yy;
        t.xy += s.n[q] * gp[k][q].xy;
      }
      ++count[m.elements[k][a]];
    }
  }
  for (std::size_t v = 0; v < nn; ++v) {
    if (hits[v] > 0) {
      out[v].xx /= hits[v];
      out[v].yy /= hits[v];
      out[v].xy /= hits[v];
    } else if (hits[v] == 0 && count[v] > 0) {
      out[v] = {ext[v].xx / count[v], ext[v].yy / count[v], ext[v].xy / count[v]};
    }
  }
  return out;
}

}  // namespace

PlaneStressSolution::PlaneStressSolution(Mesh mesh, std::vector<double> u, std::vector<Tensor> nodal_n,
                                         double strain_energy)
    : mesh_(std::move(mesh)), u_(std::move(u)), n_(std::move(nodal_n)), energy_(strain_energy) {
  build_locator();
}

void PlaneStressSolution::build_locator() {
  box_ = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : mesh_.nodes) {
    box_.x_min = std::min(box_.x_min, p.x);
    box_.x_max = std::max(box_.x_max, p.x);
    box_.y_min = std::min(box_.y_min, p.y);
    box_.y_max = std::max(box_.y_max, p.y);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh_.elements.size()))));
  bx_ = by_ = side;
  buckets_.assign(static_cast<std::size_t>(bx_) * by_, {});
  const double cw = box_.width() / bx_, ch = box_.height() / by_;
  for (std::size_t k = 0; k < mesh_.elements.size(); ++k) {
    double x0 = box_.x_max, x1 = box_.x_min, y0 = box_.y_max, y1 = box_.y_min;
    for (int a : mesh_.elements[k]) {
      x0 = std::min(x0, mesh_.nodes[a].x);
      x1 = std::max(x1, mesh_.nodes[a].x);
      y0 = std::min(y0, mesh_.nodes[a].y);
      y1 = std::max(y1, mesh_.nodes[a].y);
    }
    // margin covers the gap between a curved edge and its chords
    const double mx = 0.1 * (x1 - x0) + 1e-12, my = 0.1 * (y1 - y0) + 1e-12;
    const int i0 = std::clamp(static_cast<int>((x0 - mx - box_.x_min) / cw), 0, bx_ - 1);
    const int i1 = std::clamp(static_cast<int>((x1 + mx - box_.x_min) / cw), 0, bx_ - 1);
    const int j0 = std::clamp(static_cast<int>((y0 - my - box_.y_min) / ch), 0, by_ - 1);
    const int j1 = std::clamp(static_cast<int>((y1 + my - box_.y_min) / ch), 0, by_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * bx_ + i].push_back(static_cast<int>(k));
    }
  }
}

plate::FieldValues PlaneStressSolution::nodal(int node) const {
  plate::FieldValues f;
  f[plate::Field::ux] = u_[2 * node];
  f[plate::Field::uy] = u_[2 * node + 1];
  f[plate::Field::nxx] = n_[node].xx;
  f[plate::Field::nyy] = n_[node].yy;
  f[plate::Field::nxy] = n_[node].xy;
  return f;
}

std::optional<plate::FieldValues> PlaneStressSolution::evaluate(double x, double y) const {
  const double cw = box_.width() / bx_, ch = box_.height() / by_;
  const double fi = (x - box_.x_min) / cw, fj = (y - box_.y_min) / ch;
  if (fi < -0.5 || fj < -0.5 || fi > bx_ + 0.5 || fj > by_ + 0.5) return std::nullopt;
  const int i = std::clamp(static_cast<int>(fi), 0, bx_ - 1);
  const int j = std::clamp(static_cast<int>(fj), 0, by_ - 1);

  int best = -1;
  double best_violation = std::numeric_limits<double>::infinity();
  double bxi = 0, beta = 0;
  for (int k : buckets_[static_cast<std::size_t>(j) * bx_ + i]) {
    double xi = 0, eta = 0;
    if (!inverse_map(mesh_, mesh_.elements[k], x, y, xi, eta)) continue;
    const double v = std::max({std::fabs(xi) - 1.0, std::fabs(eta) - 1.0, 0.0});
    if (v < best_violation) {
      best_violation = v;
      best = k;
      bxi = xi;
      beta = eta;
    }
    if (v <= 1e-12) break;
  }
  if (best < 0 || best_violation > 0.25) return std::nullopt;
  const Shape s = shape(std::clamp(bxi, -1.0, 1.0), std::clamp(beta, -1.0, 1.0));
  plate::FieldValues out;
  for (int a = 0; a < 4; ++a) {
    const plate::FieldValues f = nodal(mesh_.elements[best][a]);
    for (int c = 0; c < plate::kFieldCount; ++c) out.v[c] += s.n[a] * f.v[c];
  }
  return out;
}

PlaneStressSolution fem_plane_stress(const loss::Problem& problem, const MeshOptions& opt) {
  problem.validate();
  if (problem.bending()) throw std::invalid_argument("fem_plane_stress: plane-stress problems only");
  Mesh mesh = build_mesh(problem.geometry, opt);
  const auto vars = problem.expression_variables();
  const auto dmat = membrane_matrix(problem.material);
  const std::size_t nn = mesh.nodes.size();
  const std::size_t ndof = 2 * nn;
  const double g = 1.0 / std::sqrt(3.0);

  // element stiffness matrices
  std::vector<std::array<std::array<double, 8>, 8>> ke(mesh.elements.size());
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    auto& K = ke[k];
    K = {};
    for (int q = 0; q < 4; ++q) {
      const Shape s = shape(g * kCornerXi[q], g * kCornerEta[q]);
      std::array<double, 4> dx{}, dy{};
      const double det = gradients(mesh, mesh.elements[k], s, dx, dy);
      // B rows: eps_xx, eps_yy, gamma_xy
      std::array<std::array<double, 8>, 3> b{};
      for (int a = 0; a < 4; ++a) {
        b[0][2 * a] = dx[a];
        b[1][2 * a + 1] = dy[a];
        b[2][2 * a] = dy[a];
        b[2][2 * a + 1] = dx[a];
      }
      std::array<std::array<double, 8>, 3> db{};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 8; ++c) db[r][c] = dmat[r][0] * b[0][c] + dmat[r][1] * b[1][c] + dmat[r][2] * b[2][c];
      }
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) K[r][c] += det * (b[0][r] * db[0][c] + b[1][r] * db[1][c] + b[2][r] * db[2][c]);
      }
    }
  }

  // consistent edge loads
  std::vector<double> f(ndof, 0.0);
  const std::array<double, 3> gx{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const std::array<double, 3> gw{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (const Mesh::Edge& e : mesh.boundary) {
    const loss::SegmentCondition& cond = problem.condition(e.segment);
    const loss::PairCondition& nc = cond[loss::Pair::normal];
    const loss::PairCondition& tc = cond[loss::Pair::tangential];
    const bool has_n = !nc.kinematic && !nc.value.is_constant_zero();
    const bool has_t = !tc.kinematic && !tc.value.is_constant_zero();
    if (!has_n && !has_t) continue;
    const Point& a = mesh.nodes[e.a];
    const Point& b = mesh.nodes[e.b];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    double nx = (b.y - a.y) / len, ny = -(b.x - a.x) / len;
    Point c{0.0, 0.0};
    for (int v : mesh.elements[e.element]) {
      c.x += 0.25 * mesh.nodes[v].x;
      c.y += 0.25 * mesh.nodes[v].y;
    }
    if (nx * (a.x - c.x) + ny * (a.y - c.y) < 0.0) {
      nx = -nx;
      ny = -ny;
    }
    const double tx = -ny, ty = nx;
    for (int q = 0; q < 3; ++q) {
      const double s = gx[q];
      const double x = (1 - s) * a.x + s * b.x, y = (1 - s) * a.y + s * b.y;
      const double tn = has_n ? nc.value(x, y, vars) : 0.0;
      const double ts = has_t ? tc.value(x, y, vars) : 0.0;
      const double fx = tn * nx + ts * tx, fy = tn * ny + ts * ty;
      const double wq = gw[q] * len;
      f[2 * e.a] += wq * (1 - s) * fx;
      f[2 * e.a + 1] += wq * (1 - s) * fy;
      f[2 * e.b] += wq * s * fx;
      f[2 * e.b + 1] += wq * s * fy;
    }
  }

  // prescribed displacements
  std::vector<char> fixed(ndof, 0);
  std::vector<double> u(ndof, 0.0);
  for (const loss::SegmentCondition& cond : problem.conditions) {
    for (loss::Pair pair : {loss::Pair::normal, loss::Pair::tangential}) {
      const loss::PairCondition& pc = cond[pair];
      if (!pc.kinematic) continue;
      const Point n = segment_normal(cond.segment);
      const Point dir = pair == loss::Pair::normal ? n : Point{-n.y, n.x};
      const int comp = std::fabs(dir.x) > 0.5 ? 0 : 1;
      const double sign = comp == 0 ? dir.x : dir.y;
      for (int node : mesh.segment_nodes(cond.segment)) {
        const Point& p = mesh.nodes[node];
        fixed[2 * node + comp] = 1;
        u[2 * node + comp] = pc.value(p.x, p.y, vars) / sign;
      }
    }
  }

  std::vector<int> index(ndof, -1);
  int nfree = 0;
  for (std::size_t d = 0; d < ndof; ++d) {
    if (!fixed[d]) index[d] = nfree++;
  }
  if (nfree == 0) throw std::runtime_error("fem: every degree of freedom is prescribed");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.elements.size() * 64);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (std::size_t d = 0; d < ndof; ++d) {
    if (index[d] >= 0) rhs[index[d]] += f[d];
  }
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    const auto& e = mesh.elements[k];
    for (int r = 0; r < 8; ++r) {
      const int gr = 2 * e[r / 2] + r % 2;
      if (index[gr] < 0) continue;
      for (int c = 0; c < 8; ++c) {
        const int gc = 2 * e[c / 2] + c % 2;
        if (index[gc] >= 0) {
          trip.emplace_back(index[gr], index[gc], ke[k][r][c]);
        } else {
          rhs[index[gr]] -= ke[k][r][c] * u[gc];
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(nfree, nfree);
  K.setFromTriplets(trip.begin(), trip.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(K);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fem: factorization failed");
  const Eigen::VectorXd piv = solver.vectorD();
  const double dmax = piv.cwiseAbs().maxCoeff();
  if (!(piv.minCoeff() > 1e-10 * dmax)) {
    throw std::runtime_error("fem: singular system, the constraints do not prevent rigid-body motion");
  }
  const Eigen::VectorXd sol = solver.solve(rhs);
  for (std::size_t d = 0; d < ndof; ++d) {
    if (index[d] >= 0) u[d] = sol[index[d]];
  }

  // energy and the resultants at the Gauss points
  double energy = 0.0;
  std::vector<std::array<Tensor, 4>> gp(mesh.elements.size());
  std::vector<std::array<Point, 4>> gpos(mesh.elements.size());
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    const auto& e = mesh.elements[k];
    std::array<double, 8> ue{};
    for (int r = 0; r < 8; ++r) ue[r] = u[2 * e[r / 2] + r % 2];
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) energy += 0.5 * ue[r] * ke[k][r][c] * ue[c];
    }
    for (int q = 0; q < 4; ++q) {
      const Shape s = shape(g * kCornerXi[q], g * kCornerEta[q]);
      std::array<double, 4> dx{}, dy{};
      gradients(mesh, e, s, dx, dy);
      Tensor eps;
      Point at{0.0, 0.0};
      for (int a = 0; a < 4; ++a) {
        eps.xx += dx[a] * ue[2 * a];
        eps.yy += dy[a] * ue[2 * a + 1];
        eps.xy += 0.5 * (dy[a] * ue[2 * a] + dx[a] * ue[2 * a + 1]);
        at.x += s.n[a] * mesh.nodes[e[a]].x;
        at.y += s.n[a] * mesh.nodes[e[a]].y;
      }
      gp[k][q] = plate::isotropic(problem.material.C(), problem.material.nu, eps);
      gpos[k][q] = at;
    }
  }
  std::vector<Tensor> nodal = recover_nodal(mesh, gp, gpos);
  return PlaneStressSolution(std::move(mesh), std::move(u), std::move(nodal), energy);
}

plate::FieldGrid sample_grid(const PlaneStressSolution& s, const sampling::Geometry& g, int nx, int ny) {
  plate::FieldGrid grid = plate::FieldGrid::over(g, nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (!grid.active(k)) continue;
      const auto v = s.evaluate(grid.x(i), grid.y(j));
      if (!v) throw std::runtime_error("fem: grid point outside the mesh");
      grid.at(k) = *v;
    }
  }
  return grid;
}

}  // namespace fvk::ref
