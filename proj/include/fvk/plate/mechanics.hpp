#pragma once

/// @file mechanics.hpp
/// @brief Kirchhoff plate kinematics, isotropic constitutive law, energy
/// density, governing-equation residuals and boundary resultants.
///
/// Sign conventions: the transverse pressure q_t acts along +w. The
/// equilibrium residuals are
///   P_a = N_ab,b
///   P_z = (N_ab w_,b),a + M_ab,ab + q_t
/// so that for any admissible variation with compact support
///   dU[u; du] = -int (P_x du_x + P_y du_y + (P_z - q_t) dw) dA.
/// Boundary conjugates are (N_nn, u_0n), (N_ns, u_0s), (V_n, w) and
/// (M_nn, -w_,n).
///
/// Everything is templated on the scalar type so the same code runs on
/// double, on ad::Var (parameter gradients) and on jets.

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "fvk/autodiff/bundle.hpp"
#include "fvk/autodiff/jet2.hpp"

namespace fvk::plate {

struct PlateMaterial {
  double E = 70.0;   // MPa
  double nu = 0.3;   // -
  double h = 1.0;    // mm

  /// Stretching stiffness Eh/(1-nu^2), N/mm.
  [[nodiscard]] double C() const { return E * h / (1.0 - nu * nu); }
  /// Flexural rigidity Eh^3/(12(1-nu^2)), N mm.
  [[nodiscard]] double D() const { return E * h * h * h / (12.0 * (1.0 - nu * nu)); }

  void validate() const {
    if (!(E > 0.0)) throw std::invalid_argument("material: E must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("material: h must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("material: nu must lie in [0, 0.5)");
  }
};

/// Symmetric 2x2 tensor.
template <class T>
struct Tensor2 {
  T xx{};
  T yy{};
  T xy{};

  [[nodiscard]] T trace() const { return xx + yy; }
};

template <class T>
struct PlateState {
  Tensor2<T> eps0;
  Tensor2<T> kappa;
  Tensor2<T> N;
  Tensor2<T> M;
};

// ---------------------------------------------------------------------------
// Kinematics at a point

/// eps0_ab = 1/2 (u_a,b + u_b,a + w_,a w_,b). Needs order >= 1.
template <class T>
Tensor2<T> membrane_strains(const ad::DerivativeBundle<T>& d) {
  if (d.order() < 1) throw std::invalid_argument("membrane_strains: derivative order >= 1 required");
  const T wx = d.w.taylor(1, 0);
  const T wy = d.w.taylor(0, 1);
  Tensor2<T> e;
  e.xx = d.ux.taylor(1, 0) + 0.5 * (wx * wx);
  e.yy = d.uy.taylor(0, 1) + 0.5 * (wy * wy);
  e.xy = 0.5 * (d.ux.taylor(0, 1) + d.uy.taylor(1, 0) + wx * wy);
  return e;
}

/// kappa_ab = -w_,ab. Needs order >= 2.
template <class T>
Tensor2<T> curvatures(const ad::DerivativeBundle<T>& d) {
  if (d.order() < 2) throw std::invalid_argument("curvatures: derivative order >= 2 required");
  Tensor2<T> k;
  k.xx = -2.0 * d.w.taylor(2, 0);
  k.yy = -2.0 * d.w.taylor(0, 2);
  k.xy = -d.w.taylor(1, 1);
  return k;
}

/// N = C[(1-nu) eps + nu tr(eps) I], M = D[(1-nu) kappa + nu tr(kappa) I].
template <class T>
Tensor2<T> isotropic(double stiffness, double nu, const Tensor2<T>& e) {
  const T tr = e.xx + e.yy;
  Tensor2<T> s;
  s.xx = stiffness * ((1.0 - nu) * e.xx + nu * tr);
  s.yy = stiffness * ((1.0 - nu) * e.yy + nu * tr);
  s.xy = stiffness * (1.0 - nu) * e.xy;
  return s;
}

template <class T>
std::pair<Tensor2<T>, Tensor2<T>> stress_resultants(const PlateMaterial& m, const Tensor2<T>& eps0,
                                                    const Tensor2<T>& kappa) {
  return {isotropic(m.C(), m.nu, eps0), isotropic(m.D(), m.nu, kappa)};
}

/// 1/2 (N_ab eps_ab + M_ab kappa_ab), shear components counted twice.
template <class T>
T strain_energy_density(const Tensor2<T>& N, const Tensor2<T>& M, const Tensor2<T>& eps0, const Tensor2<T>& kappa) {
  return 0.5 * (N.xx * eps0.xx + N.yy * eps0.yy + 2.0 * (N.xy * eps0.xy) + M.xx * kappa.xx + M.yy * kappa.yy +
                2.0 * (M.xy * kappa.xy));
}

/// Full state at a point. With order 1 the curvature part is zero.
template <class T>
PlateState<T> plate_state(const PlateMaterial& m, const ad::DerivativeBundle<T>& d) {
  PlateState<T> s;
  s.eps0 = membrane_strains(d);
  if (d.order() >= 2) s.kappa = curvatures(d);
  auto [N, M] = stress_resultants(m, s.eps0, s.kappa);
  s.N = N;
  s.M = M;
  return s;
}

/// Energy density directly from a bundle. Bending is skipped when
/// `with_bending` is false (plane-stress cases need only order 1).
template <class T>
T energy_density(const PlateMaterial& m, const ad::DerivativeBundle<T>& d, bool with_bending) {
  const Tensor2<T> e = membrane_strains(d);
  const double C = m.C();
  const double nu = m.nu;
  // 1/2 C [exx^2 + eyy^2 + 2 nu exx eyy + 2 (1-nu) exy^2]
  T u = 0.5 * C * (e.xx * e.xx + e.yy * e.yy + 2.0 * nu * (e.xx * e.yy) + 2.0 * (1.0 - nu) * (e.xy * e.xy));
  if (with_bending) {
    const Tensor2<T> k = curvatures(d);
    u = u + 0.5 * m.D() * (k.xx * k.xx + k.yy * k.yy + 2.0 * nu * (k.xx * k.yy) + 2.0 * (1.0 - nu) * (k.xy * k.xy));
  }
  return u;
}

// ---------------------------------------------------------------------------
// Field-level quantities (jets one or two orders below the bundle)

template <class T>
struct ResultantFields {
  Tensor2<ad::Jet2<T>> N;  // order K-1
  Tensor2<ad::Jet2<T>> M;  // order K-2, only when K >= 2
  ad::Jet2<T> wx;          // order K-1
  ad::Jet2<T> wy;
  bool has_moments = false;
};

template <class T>
ResultantFields<T> resultant_fields(const PlateMaterial& m, const ad::DerivativeBundle<T>& d) {
  if (d.order() < 1) throw std::invalid_argument("resultant_fields: derivative order >= 1 required");
  ResultantFields<T> f;
  f.wx = ad::d_dx(d.w);
  f.wy = ad::d_dy(d.w);
  Tensor2<ad::Jet2<T>> e;
  e.xx = ad::d_dx(d.ux) + 0.5 * (f.wx * f.wx);
  e.yy = ad::d_dy(d.uy) + 0.5 * (f.wy * f.wy);
  e.xy = 0.5 * (ad::d_dy(d.ux) + ad::d_dx(d.uy) + f.wx * f.wy);
  f.N = isotropic(m.C(), m.nu, e);
  if (d.order() >= 2) {
    Tensor2<ad::Jet2<T>> k;
    k.xx = -ad::d_dx(f.wx);
    k.yy = -ad::d_dy(f.wy);
    k.xy = -ad::d_dy(f.wx);
    f.M = isotropic(m.D(), m.nu, k);
    f.has_moments = true;
  }
  return f;
}

template <class T>
struct Residuals {
  T px{};
  T py{};
  T pz{};
  bool has_pz = false;
};

/// Equilibrium residuals at the bundle's point. Needs order >= 2 for the
/// in-plane pair and order >= 4 for P_z (computed only then).
template <class T>
Residuals<T> pde_residuals(const PlateMaterial& m, const ad::DerivativeBundle<T>& d, double q_t) {
  if (d.order() < 2) throw std::invalid_argument("pde_residuals: derivative order >= 2 required");
  const ResultantFields<T> f = resultant_fields(m, d);
  Residuals<T> r;
  r.px = ad::d_dx(f.N.xx).value() + ad::d_dy(f.N.xy).value();
  r.py = ad::d_dx(f.N.xy).value() + ad::d_dy(f.N.yy).value();
  if (d.order() >= 4) {
    const ad::Jet2<T> qx = f.N.xx * f.wx + f.N.xy * f.wy;
    const ad::Jet2<T> qy = f.N.xy * f.wx + f.N.yy * f.wy;
    const ad::Jet2<T> mxx_x = ad::d_dx(f.M.xx);
    const ad::Jet2<T> mxy_x = ad::d_dx(f.M.xy);
    const ad::Jet2<T> myy_y = ad::d_dy(f.M.yy);
    r.pz = ad::d_dx(qx).value() + ad::d_dy(qy).value() + ad::d_dx(mxx_x).value() +
           2.0 * ad::d_dy(mxy_x).value() + ad::d_dy(myy_y).value() + q_t;
    r.has_pz = true;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary frames

/// Outward unit normal n, tangent t = (-n_y, n_x), and the rate dn/ds of the
/// normal along t (zero on straight edges).
struct BoundaryFrame {
  double nx = 1.0;
  double ny = 0.0;
  double dnx_ds = 0.0;
  double dny_ds = 0.0;

  [[nodiscard]] double tx() const { return -ny; }
  [[nodiscard]] double ty() const { return nx; }
  [[nodiscard]] double theta() const { return std::atan2(ny, nx); }

  static BoundaryFrame from_angle(double theta) { return {std::cos(theta), std::sin(theta), 0.0, 0.0}; }

  void validate() const {
    if (std::fabs(nx * nx + ny * ny - 1.0) > 1e-9) throw std::invalid_argument("boundary frame: normal is not unit");
  }
};

/// (n.T.n, n.T.t) for a symmetric tensor.
template <class T>
std::pair<T, T> rotate_to_frame(const Tensor2<T>& s, const BoundaryFrame& f) {
  f.validate();
  const double nx = f.nx, ny = f.ny;
  T nn = s.xx * (nx * nx) + s.yy * (ny * ny) + 2.0 * (s.xy * (nx * ny));
  T ns = (s.yy - s.xx) * (nx * ny) + s.xy * (nx * nx - ny * ny);
  return {nn, ns};
}

template <class T>
struct LocalResultants {
  T n_nn{};
  T n_ns{};
  T m_nn{};
  T m_ns{};
  T v_n{};
  bool has_moments = false;  // order >= 2
  bool has_shear = false;    // order >= 3
};

/// Boundary resultants in the local frame. V_n (order >= 3) is
///   (N_ab w_,a) n_b + M_ab,a n_b + M_ns,s
/// with M_ns,s including the turning of the frame along curved edges.
template <class T>
LocalResultants<T> boundary_resultants_local(const PlateMaterial& m, const ad::DerivativeBundle<T>& d,
                                             const BoundaryFrame& frame) {
  frame.validate();
  const ResultantFields<T> f = resultant_fields(m, d);
  Tensor2<T> N{f.N.xx.value(), f.N.yy.value(), f.N.xy.value()};
  LocalResultants<T> r;
  std::tie(r.n_nn, r.n_ns) = rotate_to_frame(N, frame);
  if (!f.has_moments) return r;
  Tensor2<T> M{f.M.xx.value(), f.M.yy.value(), f.M.xy.value()};
  std::tie(r.m_nn, r.m_ns) = rotate_to_frame(M, frame);
  r.has_moments = true;
  if (d.order() < 3) return r;

  const double nx = frame.nx, ny = frame.ny, tx = frame.tx(), ty = frame.ty();
  const T wx = f.wx.value();
  const T wy = f.wy.value();
  const T mxx_x = ad::d_dx(f.M.xx).value(), mxx_y = ad::d_dy(f.M.xx).value();
  const T myy_x = ad::d_dx(f.M.yy).value(), myy_y = ad::d_dy(f.M.yy).value();
  const T mxy_x = ad::d_dx(f.M.xy).value(), mxy_y = ad::d_dy(f.M.xy).value();

  const T membrane = (N.xx * wx + N.xy * wy) * nx + (N.xy * wx + N.yy * wy) * ny;
  const T shear = (mxx_x + mxy_y) * nx + (mxy_x + myy_y) * ny;
  // d/ds of (M_yy - M_xx) nx ny + M_xy (nx^2 - ny^2) along t, frame fixed ...
  const T dmxx = mxx_x * tx + mxx_y * ty;
  const T dmyy = myy_x * tx + myy_y * ty;
  const T dmxy = mxy_x * tx + mxy_y * ty;
  T mns_s = (dmyy - dmxx) * (nx * ny) + dmxy * (nx * nx - ny * ny);
  // ... plus the rotation of the frame itself.
  if (frame.dnx_ds != 0.0 || frame.dny_ds != 0.0) {
    const T d_dnx = (M.yy - M.xx) * ny + 2.0 * (M.xy * nx);
    const T d_dny = (M.yy - M.xx) * nx - 2.0 * (M.xy * ny);
    mns_s = mns_s + d_dnx * frame.dnx_ds + d_dny * frame.dny_ds;
  }
  r.v_n = membrane + shear + mns_s;
  r.has_shear = true;
  return r;
}

template <class T>
struct LocalDisplacements {
  T u_n{};
  T u_s{};
  T w{};
  T w_n{};
  T w_s{};
};

/// u_0n = n.u, u_0s = t.u, w, w_,n = n.grad w, w_,s = t.grad w. Order >= 1.
template <class T>
LocalDisplacements<T> local_displacements(const ad::DerivativeBundle<T>& d, const BoundaryFrame& frame) {
  frame.validate();
  const T ux = d.ux.value(), uy = d.uy.value();
  LocalDisplacements<T> r;
  r.u_n = ux * frame.nx + uy * frame.ny;
  r.u_s = ux * frame.tx() + uy * frame.ty();
  r.w = d.w.value();
  if (d.order() >= 1) {
    const T wx = d.w.taylor(1, 0), wy = d.w.taylor(0, 1);
    r.w_n = wx * frame.nx + wy * frame.ny;
    r.w_s = wx * frame.tx() + wy * frame.ty();
  }
  return r;
}

/// Value-level displacement rotation used by tests and tools.
inline std::pair<double, double> rotate_displacement(double ux, double uy, const BoundaryFrame& f) {
  return {ux * f.nx + uy * f.ny, ux * f.tx() + uy * f.ty()};
}

}  // namespace fvk::plate
