#include "fvk/reference/bending.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fvk/util/random.hpp"

namespace fvk::ref {

Support parse_support(const std::string& s) {
  if (s == "simply_supported" || s == "ss") return Support::simply_supported;
  if (s == "clamped") return Support::clamped;
  throw std::invalid_argument("unknown support '" + s + "' (expected simply_supported or clamped)");
}

const char* to_string(Support s) { return s == Support::clamped ? "clamped" : "simply_supported"; }

namespace {

double reflection(Support s) { return s == Support::clamped ? 1.0 : -1.0; }

// Node grid with the interior nodes numbered as unknowns.
struct Grid {
  sampling::Rect box;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  EdgeSupports sup;

  [[nodiscard]] int unknowns() const { return (nx - 2) * (ny - 2); }
  [[nodiscard]] int id(int i, int j) const { return (j - 1) * (nx - 2) + (i - 1); }

  // Maps a node, possibly a ghost, to (unknown id or -1, reflection sign).
  [[nodiscard]] std::pair<int, double> resolve(int i, int j) const {
    double sign = 1.0;
    if (i < 0) {
      i = -i;
      sign *= reflection(sup.left);
    } else if (i > nx - 1) {
      i = 2 * (nx - 1) - i;
      sign *= reflection(sup.right);
    }
    if (j < 0) {
      j = -j;
      sign *= reflection(sup.bottom);
    } else if (j > ny - 1) {
      j = 2 * (ny - 1) - j;
      sign *= reflection(sup.top);
    }
    if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) return {-1, 0.0};
    return {id(i, j), sign};
  }
};

Grid make_grid(const sampling::Rect& box, int n, EdgeSupports sup) {
  if (n < 9) throw std::invalid_argument("finite-difference grid too coarse: need n >= 9");
  if (!(box.width() > 0.0 && box.height() > 0.0)) throw std::invalid_argument("degenerate plate rectangle");
  Grid g;
  g.box = box;
  g.sup = sup;
  const double side = std::max(box.width(), box.height());
  const double h = side / (n - 1);
  g.nx = box.width() >= box.height() ? n : std::max(5, static_cast<int>(std::lround(box.width() / h)) + 1);
  g.ny = box.height() >= box.width() ? n : std::max(5, static_cast<int>(std::lround(box.height() / h)) + 1);
  g.hx = box.width() / (g.nx - 1);
  g.hy = box.height() / (g.ny - 1);
  return g;
}

using Sparse = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct Entry {
  int di, dj;
  double c;
};

std::vector<Entry> biharmonic_stencil(double hx, double hy) {
  std::vector<Entry> s;
  const double d4x[5] = {1, -4, 6, -4, 1};
  const double d2[3] = {1, -2, 1};
  const double hx4 = std::pow(hx, 4), hy4 = std::pow(hy, 4), hxy = hx * hx * hy * hy;
  for (int k = 0; k < 5; ++k) {
    s.push_back({k - 2, 0, d4x[k] / hx4});
    s.push_back({0, k - 2, d4x[k] / hy4});
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) s.push_back({a - 1, b - 1, 2.0 * d2[a] * d2[b] / hxy});
  }
  return s;
}

Sparse assemble(const Grid& g, const std::vector<Entry>& stencil, double scale) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(g.unknowns()) * stencil.size());
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      const int row = g.id(i, j);
      for (const Entry& e : stencil) {
        const auto [col, sign] = g.resolve(i + e.di, j + e.dj);
        if (col >= 0) t.emplace_back(row, col, scale * sign * e.c);
      }
    }
  }
  Sparse m(g.unknowns(), g.unknowns());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::vector<double> full_field(const Grid& g, const Eigen::VectorXd& interior) {
  std::vector<double> w(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) w[static_cast<std::size_t>(j) * g.nx + i] = interior[g.id(i, j)];
  }
  return w;
}

}  // namespace

FdPlate::FdPlate(const sampling::Rect& box, int nx, int ny, std::vector<double> w, EdgeSupports supports,
                 const plate::PlateMaterial& material)
    : box_(box),
      nx_(nx),
      ny_(ny),
      hx_(box.width() / (nx - 1)),
      hy_(box.height() / (ny - 1)),
      w_(std::move(w)),
      supports_(supports),
      material_(material) {
  if (w_.size() != static_cast<std::size_t>(nx) * ny) throw std::invalid_argument("FdPlate: field size mismatch");
}

double FdPlate::w(int i, int j) const {
  Grid g;
  g.nx = nx_;
  g.ny = ny_;
  g.sup = supports_;
  const auto [k, sign] = g.resolve(i, j);
  if (k < 0) return 0.0;
  int ii = i < 0 ? -i : (i > nx_ - 1 ? 2 * (nx_ - 1) - i : i);
  int jj = j < 0 ? -j : (j > ny_ - 1 ? 2 * (ny_ - 1) - j : j);
  return sign * w_[static_cast<std::size_t>(jj) * nx_ + ii];
}

plate::FieldValues FdPlate::nodal(int i, int j) const {
  const double wxx = (w(i + 1, j) - 2.0 * w(i, j) + w(i - 1, j)) / (hx_ * hx_);
  const double wyy = (w(i, j + 1) - 2.0 * w(i, j) + w(i, j - 1)) / (hy_ * hy_);
  const double wxy = (w(i + 1, j + 1) - w(i + 1, j - 1) - w(i - 1, j + 1) + w(i - 1, j - 1)) / (4.0 * hx_ * hy_);
  const plate::Tensor2<double> m = plate::isotropic(material_.D(), material_.nu, plate::Tensor2<double>{-wxx, -wyy, -wxy});
  plate::FieldValues f;
  f[plate::Field::w] = w(i, j);
  f[plate::Field::mxx] = m.xx;
  f[plate::Field::myy] = m.yy;
  f[plate::Field::mxy] = m.xy;
  return f;
}

plate::FieldValues FdPlate::evaluate(double x, double y) const {
  const double fx = std::clamp((x - box_.x_min) / hx_, 0.0, static_cast<double>(nx_ - 1));
  const double fy = std::clamp((y - box_.y_min) / hy_, 0.0, static_cast<double>(ny_ - 1));
  const int i = std::min(static_cast<int>(fx), nx_ - 2);
  const int j = std::min(static_cast<int>(fy), ny_ - 2);
  const double s = fx - i, t = fy - j;
  const plate::FieldValues a = nodal(i, j), b = nodal(i + 1, j), c = nodal(i + 1, j + 1), d = nodal(i, j + 1);
  plate::FieldValues out;
  for (int k = 0; k < plate::kFieldCount; ++k) {
    out.v[k] = (1 - s) * (1 - t) * a.v[k] + s * (1 - t) * b.v[k] + s * t * c.v[k] + (1 - s) * t * d.v[k];
  }
  return out;
}

double FdPlate::max_abs_deflection() const {
  double m = 0.0;
  for (double v : w_) m = std::max(m, std::fabs(v));
  return m;
}

void FdPlate::normalize() {
  double peak = 0.0;
  for (double v : w_) {
    if (std::fabs(v) > std::fabs(peak)) peak = v;
  }
  if (peak == 0.0) return;
  for (double& v : w_) v /= peak;
}

FdPlate fd_bending(const sampling::Rect& box, int n, const plate::PlateMaterial& material,
                   const util::Expression& pressure, const std::map<std::string, double>& vars,
                   EdgeSupports supports) {
  material.validate();
  const Grid g = make_grid(box, n, supports);
  const Sparse a = assemble(g, biharmonic_stencil(g.hx, g.hy), 1.0);
  Eigen::VectorXd rhs(g.unknowns());
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 1; i < g.nx - 1; ++i) {
      rhs[g.id(i, j)] = pressure(box.x_min + g.hx * i, box.y_min + g.hy * j, vars) / material.D();
    }
  }
  Eigen::SimplicialLDLT<Sparse> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fd_bending: factorization failed");
  const Eigen::VectorXd w = solver.solve(rhs);
  return {box, g.nx, g.ny, full_field(g, w), supports, material};
}

FdPlate fd_biharmonic_clamped(double side, int n, const plate::PlateMaterial& material, double q) {
  return fd_bending({0.0, side, 0.0, side}, n, material, util::Expression::constant(q), {},
                    EdgeSupports::all(Support::clamped));
}

BucklingSolution critical_buckling_load(const plate::PlateMaterial& material, const sampling::Rect& box,
                                        EdgeSupports supports, int n, int modes) {
  material.validate();
  if (modes < 1) throw std::invalid_argument("critical_buckling_load: need at least one mode");
  const Grid g = make_grid(box, n, supports);
  const Sparse a = assemble(g, biharmonic_stencil(g.hx, g.hy), material.D());
  const double h2 = g.hx * g.hx;
  const Sparse geo = assemble(g, {{-1, 0, -1.0 / h2}, {0, 0, 2.0 / h2}, {1, 0, -1.0 / h2}}, 1.0);

  const int size = g.unknowns();
  const int p = std::min(size, modes + 4);
  Eigen::SimplicialLLT<Sparse> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("critical_buckling_load: bending operator is singular");

  util::Rng rng(12345);
  Eigen::MatrixXd x(size, p);
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < size; ++r) x(r, c) = rng.uniform(-1.0, 1.0);
  }
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(modes, std::numeric_limits<double>::infinity());
  BucklingSolution out;
  Eigen::VectorXd lambda;
  bool converged = false;
  for (int it = 1; it <= 500 && !converged; ++it) {
    const Eigen::MatrixXd y = solver.solve(geo * x);
    const Eigen::MatrixXd ar = y.transpose() * (a * y);
    const Eigen::MatrixXd gr = y.transpose() * (geo * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ar + ar.transpose()),
                                                                 0.5 * (gr + gr.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("critical_buckling_load: Ritz problem failed");
    x = y * es.eigenvectors();
    lambda = es.eigenvalues();
    const Eigen::VectorXd head = lambda.head(modes);
    converged = ((head - prev).cwiseAbs().array() <= 1e-11 * head.cwiseAbs().array()).all();
    prev = head;
    out.iterations = it;
  }
  if (!converged) throw std::runtime_error("critical_buckling_load: subspace iteration did not converge");

  const double b = box.height();
  out.load = lambda[0];
  out.k = out.load * b * b / (std::numbers::pi * std::numbers::pi * material.D());
  for (int m = 0; m < modes; ++m) {
    out.loads.push_back(lambda[m]);
    FdPlate mode(box, g.nx, g.ny, full_field(g, x.col(m)), supports, material);
    mode.normalize();
    out.modes.push_back(std::move(mode));
  }
  return out;
}

}  // namespace fvk::ref
