#pragma once

// Moebius normalization: find Phi = Phi_{a,0} such that v = u o Phi + log|Phi'|
// has its center of mass (measured through psi_R) at the origin.

#include <algorithm>
#include <cmath>
#include <string>

#include "pcflow/conformal.hpp"
#include "pcflow/error.hpp"
#include "pcflow/grid.hpp"
#include "pcflow/model.hpp"

namespace pcflow {

struct Normalization {
  MobiusMap phi;
  DiscField v;
  Vec2 residual = Vec2::Zero();
  double R_used = 1.0;
  int iterations = 0;
  bool near_degenerate = false;  // Newton pushed a against the unit circle
};

// psi_R(z) = 2Rz / (1 + R^2|z|^2) as a plane vector
inline Vec2 psi_R(double R, Complex z) {
  const Complex w = stereographic(R, z);
  return Vec2(w.real(), w.imag());
}

// 1/2 int psi_R e^{2v} dz + int psi_R e^v ds0
inline Vec2 center_of_mass_residual(const DiscField& v, double R) {
  (void)CapGeometry(R);
  const auto& g = v.grid();
  DiscField px(g), py(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Vec2 p = psi_R(R, g->node(i, k));
      px(i, k) = p(0);
      py(i, k) = p(1);
    }
  }
  DiscField e2 = v.exp(2);
  BoundaryField e1 = v.boundary().exp();
  return Vec2(0.5 * integrate_disc(px * e2) + integrate_boundary(px.boundary() * e1),
              0.5 * integrate_disc(py * e2) + integrate_boundary(py.boundary() * e1));
}

// The same residual for v = pullback of u by phi, evaluated on u's own grid by
// the change of variables w = phi(z): no interpolation of u is needed.
inline Vec2 transported_residual(const DiscField& u, double R, const MobiusMap& phi) {
  const auto& g = u.grid();
  const MobiusMap inv = phi.inverse();
  Eigen::MatrixXd wx(g->n_r(), g->n_theta()), wy(g->n_r(), g->n_theta());
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Vec2 p = psi_R(R, inv.raw(g->node(i, k)));
      wx(i, k) = p(0);
      wy(i, k) = p(1);
    }
  }
  DiscField e2 = u.exp(2);
  BoundaryField e1 = u.boundary().exp();
  DiscField px(g, wx), py(g, wy);
  return Vec2(0.5 * integrate_disc(px * e2) + integrate_boundary(px.boundary() * e1),
              0.5 * integrate_disc(py * e2) + integrate_boundary(py.boundary() * e1));
}

struct NormalizeOptions {
  double tol = 1e-9;
  int max_iter = 50;
  int max_halvings = 20;
  double a_max = 1.0 - 1e-9;
};

namespace detail {

// damped Newton in (Re a, Im a) with a central-difference Jacobian
template <class Residual>
Complex newton_on_a(Residual&& res, Complex a, const NormalizeOptions& opt, double stop, int& iters, bool& degenerate,
                    Vec2& last) {
  auto clamp = [&](Complex z) {
    const double m = std::abs(z);
    if (m > opt.a_max) {
      degenerate = true;
      return z * (opt.a_max / m);
    }
    return z;
  };
  last = res(a);
  for (iters = 0; iters < opt.max_iter && last.norm() >= stop; ++iters) {
    const double h = 1e-6 * std::max(1e-3, 1.0 - std::abs(a));
    Eigen::Matrix2d J;
    for (int c = 0; c < 2; ++c) {
      const Complex e = c == 0 ? Complex(h, 0.0) : Complex(0.0, h);
      J.col(c) = (res(clamp(a + e)) - res(clamp(a - e))) / (2.0 * h);
    }
    const Eigen::Vector2d d = J.fullPivLu().solve(-last);
    if (!d.allFinite()) break;
    double lam = 1.0;
    bool improved = false;
    for (int k = 0; k <= opt.max_halvings; ++k, lam *= 0.5) {
      const Complex cand = clamp(a + lam * Complex(d(0), d(1)));
      const Vec2 r = res(cand);
      if (r.allFinite() && r.norm() < last.norm()) {
        a = cand;
        last = r;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return a;
}

}  // namespace detail

// Thrown when Newton stalls; carries the best iterate.
class NormalizationError : public ConvergenceError {
 public:
  NormalizationError(const std::string& msg, Normalization best) : ConvergenceError(msg), best_(std::move(best)) {}
  const Normalization& best() const { return best_; }

 private:
  Normalization best_;
};

inline Normalization normalize(const DiscField& u, double R, const MobiusMap& guess = MobiusMap(),
                               const NormalizeOptions& opt = {}) {
  (void)CapGeometry(R);
  require_finite(u);
  // rotations are not part of the unknowns: start from the translation part of the guess
  Complex a = guess.a() * std::polar(1.0, guess.theta());
  Normalization out;
  out.R_used = R;
  int it1 = 0, it2 = 0;
  Vec2 last;
  const double scale = std::max(1.0, mass(u));
  a = detail::newton_on_a([&](Complex z) { return transported_residual(u, R, MobiusMap(z)); }, a, opt, 1e-3 * opt.tol * scale,
                          it1, out.near_degenerate, last);
  out.phi = MobiusMap(a);
  out.v = pullback_conformal_factor(u, out.phi);
  out.residual = center_of_mass_residual(out.v, R);
  if (out.residual.norm() >= opt.tol) {
    // polish on the pulled-back field itself (quadrature of v differs from that of u)
    a = detail::newton_on_a(
        [&](Complex z) { return center_of_mass_residual(pullback_conformal_factor(u, MobiusMap(z)), R); }, a, opt,
        0.1 * opt.tol, it2, out.near_degenerate, last);
    out.phi = MobiusMap(a);
    out.v = pullback_conformal_factor(u, out.phi);
    out.residual = center_of_mass_residual(out.v, R);
  }
  out.iterations = it1 + it2;
  if (!(out.residual.norm() < opt.tol)) {
    throw NormalizationError("normalization did not converge (|residual| = " + std::to_string(out.residual.norm()) + ")", out);
  }
  return out;
}

// Midpoint of [min R(z), max R(z)] over boundary points.
inline double default_normalization_radius(const ProblemData& d) {
  const auto& f = d.f();
  const auto& j = d.j();
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < f.grid()->n_theta(); ++k) {
    const double R = scaling_radius(f(0, k), j(k));
    lo = std::min(lo, R);
    hi = std::max(hi, R);
  }
  return 0.5 * (lo + hi);
}

// (int_B u_t^2 e^{2u} + int_dB u_t^2 e^u)^{1/2}, bounding the speed of the normalizing map
inline double drift_speed_bound(const FlowState& s, const ProblemData& d) {
  auto [a, b] = multipliers(s, d);
  DiscField it = a * d.f() + s.u.exp(-2) * laplacian(s.u);
  BoundaryField bt = b * d.j() - geodesic_curvature(s.u);
  return std::sqrt(integrate_disc(it * it * s.u.exp(2)) + integrate_boundary(bt * bt * s.u.boundary().exp()));
}

}  // namespace pcflow
