#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fvk/autodiff/jet2.hpp"
#include "fvk/plate/mechanics.hpp"
#include "fvk/util/random.hpp"
#include "oracles.hpp"

namespace ad = fvk::ad;
using namespace fvk::plate;
using ad::Jet2;

namespace {

const PlateMaterial kMat{70.0, 0.3, 1.0};

ad::DerivativeBundle<double> bundle_from(auto ux, auto uy, auto w, double x, double y, int order) {
  auto [jx, jy] = ad::jet_seed(x, y, order);
  return {ux(jx, jy), uy(jx, jy), w(jx, jy)};
}

}  // namespace

TEST_CASE("material stiffnesses") {
  CHECK(kMat.C() == doctest::Approx(70.0 / 0.91));
  CHECK(kMat.D() == doctest::Approx(70.0 / (12.0 * 0.91)));
  CHECK_THROWS(PlateMaterial{70.0, 0.5, 1.0}.validate());
  CHECK_THROWS(PlateMaterial{0.0, 0.3, 1.0}.validate());
  CHECK_THROWS(PlateMaterial{70.0, 0.3, -1.0}.validate());
  CHECK_NOTHROW(kMat.validate());
}

TEST_CASE("membrane strains and curvatures") {
  auto zero = [](const Jet2<double>& x, const Jet2<double>&) { return x * 0.0; };
  {
    auto d = bundle_from([](auto x, auto) { return x * 0.01; }, zero, zero, 1.0, 2.0, 2);
    auto e = membrane_strains(d);
    CHECK(e.xx == doctest::Approx(0.01));
    CHECK(e.yy == 0.0);
    CHECK(e.xy == 0.0);
  }
  {
    auto d = bundle_from(zero, zero, [](auto x, auto) { return x * 0.1; }, 1.0, 2.0, 2);
    CHECK(membrane_strains(d).xx == doctest::Approx(0.005));
  }
  {
    const double c = 0.003;
    auto d = bundle_from([c](auto, auto y) { return y * c; }, [c](auto x, auto) { return x * c; }, zero, 1.0, 2.0, 2);
    auto e = membrane_strains(d);
    CHECK(e.xy == doctest::Approx(c));
    CHECK(e.xx == 0.0);
    CHECK(e.yy == 0.0);
  }
  {
    auto d = bundle_from(zero, zero, [](auto x, auto) { return x * x * -0.5; }, 1.0, 2.0, 2);
    auto k = curvatures(d);
    CHECK(k.xx == doctest::Approx(1.0));
    CHECK(k.yy == 0.0);
    CHECK(k.xy == 0.0);
  }
  {
    auto d = bundle_from(zero, zero, [](auto x, auto y) { return x * y; }, 1.0, 2.0, 2);
    CHECK(curvatures(d).xy == doctest::Approx(-1.0));
  }
  {
    auto d = bundle_from(zero, zero, [](auto x, auto y) { return x * 3.0 - y + 2.0; }, 1.0, 2.0, 2);
    auto k = curvatures(d);
    CHECK(k.xx == 0.0);
    CHECK(k.yy == 0.0);
    CHECK(k.xy == 0.0);
  }
}

TEST_CASE("stress resultants and energy density") {
  const double e = 1e-3;
  auto [N, M] = stress_resultants(kMat, Tensor2<double>{e, 0.0, 0.0}, Tensor2<double>{});
  CHECK(N.xx == doctest::Approx(kMat.C() * e));
  CHECK(N.yy == doctest::Approx(kMat.C() * kMat.nu * e));
  CHECK(M.xx == 0.0);
  CHECK(strain_energy_density(N, M, Tensor2<double>{e, 0.0, 0.0}, Tensor2<double>{}) ==
        doctest::Approx(0.5 * kMat.C() * e * e));

  auto [N2, M2] = stress_resultants(kMat, Tensor2<double>{}, Tensor2<double>{1.0, 0.0, 0.0});
  CHECK(M2.xx == doctest::Approx(kMat.D()));
  CHECK(M2.yy == doctest::Approx(kMat.nu * kMat.D()));
  CHECK(strain_energy_density(N2, M2, Tensor2<double>{}, Tensor2<double>{1.0, 0.0, 0.0}) ==
        doctest::Approx(0.5 * kMat.D()));

  auto [N3, M3] = stress_resultants(kMat, Tensor2<double>{e, e, 0.0}, Tensor2<double>{});
  CHECK(N3.xx == doctest::Approx(kMat.C() * (1 + kMat.nu) * e));
  CHECK(N3.yy == doctest::Approx(N3.xx));

  auto [N0, M0] = stress_resultants(kMat, Tensor2<double>{}, Tensor2<double>{});
  CHECK(strain_energy_density(N0, M0, Tensor2<double>{}, Tensor2<double>{}) == 0.0);
}

TEST_CASE("energy density is frame invariant and positive (property)") {
  fvk::util::Rng rng(17);
  auto rotate = [](const Tensor2<double>& s, double th) {
    const double c = std::cos(th), si = std::sin(th);
    // R^T S R
    Tensor2<double> r;
    r.xx = c * c * s.xx + si * si * s.yy + 2 * c * si * s.xy;
    r.yy = si * si * s.xx + c * c * s.yy - 2 * c * si * s.xy;
    r.xy = (s.yy - s.xx) * c * si + s.xy * (c * c - si * si);
    return r;
  };
  for (int trial = 0; trial < 500; ++trial) {
    Tensor2<double> e{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Tensor2<double> k{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto [N, M] = stress_resultants(kMat, e, k);
    const double u = strain_energy_density(N, M, e, k);
    CHECK(u > 0.0);
    const double th = rng.uniform(0, 2 * std::numbers::pi);
    const double ur =
        strain_energy_density(rotate(N, th), rotate(M, th), rotate(e, th), rotate(k, th));
    CHECK(ur == doctest::Approx(u).epsilon(1e-13));
    // rotating resultants equals resultants of rotated strains (isotropy)
    auto [Nr, Mr] = stress_resultants(kMat, rotate(e, th), rotate(k, th));
    CHECK(Nr.xy == doctest::Approx(rotate(N, th).xy).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("PDE residuals: trivial cases") {
  // uniform uniaxial stress state u_x = a x, u_y = -nu a y
  const double a = 0.002;
  auto d = bundle_from([a](auto x, auto) { return x * a; }, [a](auto, auto y) { return y * (-kMat.nu * a); },
                       [](auto x, auto) { return x * 0.0; }, 3.0, 4.0, 4);
  auto r = pde_residuals(kMat, d, 0.0);
  CHECK(r.px == doctest::Approx(0.0));
  CHECK(r.py == doctest::Approx(0.0));
  CHECK(r.pz == doctest::Approx(0.0));
  CHECK(r.has_pz);

  auto zero = [](auto x, auto) { return x * 0.0; };
  auto z = bundle_from(zero, zero, zero, 0.0, 0.0, 4);
  const double q = 1e-5;
  // pressure along +w: the residual of the zero field is +q_t
  CHECK(pde_residuals(kMat, z, q).pz == doctest::Approx(q));

  auto d2 = bundle_from(zero, zero, zero, 0.0, 0.0, 2);
  CHECK_FALSE(pde_residuals(kMat, d2, q).has_pz);
}

namespace {

// Manufactured fields with hand-written first and second derivatives.
struct Manufactured {
  double a = 0.01, b = 0.02, c = 0.5;
  template <class T>
  T ux(const T& x, const T& y) const {
    using std::sin;
    return a * sin(0.3 * x + 0.2 * y);
  }
  template <class T>
  T uy(const T& x, const T& y) const {
    using std::cos;
    return b * cos(0.1 * x - 0.4 * y);
  }
  template <class T>
  T w(const T& x, const T& y) const {
    using std::cos;
    using std::sin;
    return c * sin(0.2 * x) * cos(0.3 * y);
  }
  double ux_x(double x, double y) const { return 0.3 * a * std::cos(0.3 * x + 0.2 * y); }
  double ux_y(double x, double y) const { return 0.2 * a * std::cos(0.3 * x + 0.2 * y); }
  double uy_x(double x, double y) const { return -0.1 * b * std::sin(0.1 * x - 0.4 * y); }
  double uy_y(double x, double y) const { return 0.4 * b * std::sin(0.1 * x - 0.4 * y); }
  double w_x(double x, double y) const { return 0.2 * c * std::cos(0.2 * x) * std::cos(0.3 * y); }
  double w_y(double x, double y) const { return -0.3 * c * std::sin(0.2 * x) * std::sin(0.3 * y); }
  double w_xx(double x, double y) const { return -0.04 * c * std::sin(0.2 * x) * std::cos(0.3 * y); }
  double w_yy(double x, double y) const { return -0.09 * c * std::sin(0.2 * x) * std::cos(0.3 * y); }
  double w_xy(double x, double y) const { return -0.06 * c * std::cos(0.2 * x) * std::sin(0.3 * y); }

  Tensor2<double> N(double x, double y) const {
    const double wx = w_x(x, y), wy = w_y(x, y);
    Tensor2<double> e{ux_x(x, y) + 0.5 * wx * wx, uy_y(x, y) + 0.5 * wy * wy,
                      0.5 * (ux_y(x, y) + uy_x(x, y) + wx * wy)};
    return isotropic(kMat.C(), kMat.nu, e);
  }
  Tensor2<double> M(double x, double y) const {
    return isotropic(kMat.D(), kMat.nu, Tensor2<double>{-w_xx(x, y), -w_yy(x, y), -w_xy(x, y)});
  }
  ad::DerivativeBundle<double> bundle(double x, double y, int order) const {
    auto [jx, jy] = ad::jet_seed(x, y, order);
    return {ux(jx, jy), uy(jx, jy), w(jx, jy)};
  }
};

}  // namespace

TEST_CASE("PDE residuals match a manufactured-solution expansion") {
  using fvk::testing::fd_partial;
  const Manufactured m;
  const double q = 0.003;
  fvk::util::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const double x = rng.uniform(-5, 5), y = rng.uniform(-5, 5);
    auto r = pde_residuals(kMat, m.bundle(x, y, 4), q);
    auto nxx = [&](double px, double py) { return m.N(px, py).xx; };
    auto nyy = [&](double px, double py) { return m.N(px, py).yy; };
    auto nxy = [&](double px, double py) { return m.N(px, py).xy; };
    const double px = fd_partial(nxx, x, y, 1, 0) + fd_partial(nxy, x, y, 0, 1);
    const double py = fd_partial(nxy, x, y, 1, 0) + fd_partial(nyy, x, y, 0, 1);
    auto qx = [&](double a, double b) {
      auto n = m.N(a, b);
      return n.xx * m.w_x(a, b) + n.xy * m.w_y(a, b);
    };
    auto qy = [&](double a, double b) {
      auto n = m.N(a, b);
      return n.xy * m.w_x(a, b) + n.yy * m.w_y(a, b);
    };
    auto mxx = [&](double a, double b) { return m.M(a, b).xx; };
    auto myy = [&](double a, double b) { return m.M(a, b).yy; };
    auto mxy = [&](double a, double b) { return m.M(a, b).xy; };
    const double pz = fd_partial(qx, x, y, 1, 0) + fd_partial(qy, x, y, 0, 1) + fd_partial(mxx, x, y, 2, 0) +
                      2.0 * fd_partial(mxy, x, y, 1, 1) + fd_partial(myy, x, y, 0, 2) + q;
    CHECK(r.px == doctest::Approx(px).epsilon(1e-7));
    CHECK(r.py == doctest::Approx(py).epsilon(1e-7));
    CHECK(r.pz == doctest::Approx(pz).epsilon(1e-6));
  }
}

TEST_CASE("in-plane residuals reduce to the plane-stress Navier operators when w = 0") {
  Manufactured m;
  m.c = 0.0;
  fvk::util::Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = rng.uniform(-5, 5), y = rng.uniform(-5, 5);
    const auto d = m.bundle(x, y, 2);
    auto r = pde_residuals(kMat, d, 0.0);
    const double nu = kMat.nu, k = kMat.E * kMat.h / (1 - nu * nu);
    const double navier_x = k * (d.ux.partial(2, 0) + 0.5 * (1 - nu) * d.ux.partial(0, 2) +
                                 0.5 * (1 + nu) * d.uy.partial(1, 1));
    const double navier_y = k * (d.uy.partial(0, 2) + 0.5 * (1 - nu) * d.uy.partial(2, 0) +
                                 0.5 * (1 + nu) * d.ux.partial(1, 1));
    CHECK(r.px == doctest::Approx(navier_x).epsilon(1e-10));
    CHECK(r.py == doctest::Approx(navier_y).epsilon(1e-10));
  }
}

TEST_CASE("frame rotation of resultants") {
  Tensor2<double> n{2.5, 0.0, 0.0};
  auto [nn, ns] = rotate_to_frame(n, BoundaryFrame::from_angle(0.0));
  CHECK(nn == doctest::Approx(2.5));
  CHECK(ns == doctest::Approx(0.0));
  const double s = 1.7;
  auto [nn2, ns2] = rotate_to_frame(Tensor2<double>{0.0, 0.0, s}, BoundaryFrame::from_angle(std::numbers::pi / 4));
  CHECK(nn2 == doctest::Approx(s));
  CHECK(ns2 == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS(rotate_to_frame(n, BoundaryFrame{1.0, 1.0}));
}

TEST_CASE("local displacements") {
  auto f0 = BoundaryFrame::from_angle(0.0);
  auto [un, us] = rotate_displacement(0.3, -0.2, f0);
  CHECK(un == doctest::Approx(0.3));
  CHECK(us == doctest::Approx(-0.2));
  auto f90 = BoundaryFrame::from_angle(std::numbers::pi / 2);
  auto [un2, us2] = rotate_displacement(0.3, -0.2, f90);
  CHECK(un2 == doctest::Approx(-0.2));
  CHECK(us2 == doctest::Approx(-0.3));

  fvk::util::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double th = rng.uniform(-4, 4), ux = rng.uniform(-1, 1), uy = rng.uniform(-1, 1);
    auto [a, b] = rotate_displacement(ux, uy, BoundaryFrame::from_angle(th));
    // inverse rotation by -theta of (u_n, u_s) expressed as a vector
    const double bx = a * std::cos(th) - b * std::sin(th);
    const double by = a * std::sin(th) + b * std::cos(th);
    CHECK(bx == doctest::Approx(ux).scale(1.0));
    CHECK(by == doctest::Approx(uy).scale(1.0));
  }

  const Manufactured m;
  const auto d = m.bundle(1.0, 2.0, 1);
  const auto f = BoundaryFrame::from_angle(0.4);
  auto loc = local_displacements(d, f);
  CHECK(loc.w_n == doctest::Approx(m.w_x(1, 2) * f.nx + m.w_y(1, 2) * f.ny));
  CHECK(loc.w_s == doctest::Approx(-m.w_x(1, 2) * f.ny + m.w_y(1, 2) * f.nx));
}

TEST_CASE("effective shear on a curved edge matches an arc-length oracle") {
  // pure bending field (u = 0), hole of radius r centred at the origin; the
  // solid lies outside, so the normal points towards the centre.
  Manufactured m;
  m.a = 0.0;
  m.b = 0.0;
  const double r = 2.5;
  fvk::util::Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const double phi = rng.uniform(0.1, 1.4);
    auto frame_at = [&](double p) {
      BoundaryFrame f{-std::cos(p), -std::sin(p), 0.0, 0.0};
      // moving along t = (sin p, -cos p) decreases phi: dphi/ds = -1/r
      f.dnx_ds = -std::sin(p) / r;
      f.dny_ds = std::cos(p) / r;
      return f;
    };
    const BoundaryFrame f = frame_at(phi);
    const double x = r * std::cos(phi), y = r * std::sin(phi);
    auto res = boundary_resultants_local(kMat, m.bundle(x, y, 3), f);
    REQUIRE(res.has_shear);

    auto mns = [&](double s, double) {
      const double p = phi - s / r;
      auto [nn, ns] = rotate_to_frame(m.M(r * std::cos(p), r * std::sin(p)), frame_at(p));
      return ns;
    };
    auto mxx = [&](double a, double b) { return m.M(a, b).xx; };
    auto myy = [&](double a, double b) { return m.M(a, b).yy; };
    auto mxy = [&](double a, double b) { return m.M(a, b).xy; };
    using fvk::testing::fd_partial;
    const double qn = (fd_partial(mxx, x, y, 1, 0) + fd_partial(mxy, x, y, 0, 1)) * f.nx +
                      (fd_partial(mxy, x, y, 1, 0) + fd_partial(myy, x, y, 0, 1)) * f.ny;
    auto n = m.N(x, y);
    const double membrane = (n.xx * m.w_x(x, y) + n.xy * m.w_y(x, y)) * f.nx +
                            (n.xy * m.w_x(x, y) + n.yy * m.w_y(x, y)) * f.ny;
    const double expect = membrane + qn + fd_partial(mns, 0.0, 0.0, 1, 0);
    CHECK(res.v_n == doctest::Approx(expect).epsilon(1e-7));
    auto [mnn, mns0] = rotate_to_frame(m.M(x, y), f);
    CHECK(res.m_nn == doctest::Approx(mnn));
    CHECK(res.m_ns == doctest::Approx(mns0));
  }
}
