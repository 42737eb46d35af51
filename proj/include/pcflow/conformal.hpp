#pragma once

// Moebius maps of the disc, conformal pullbacks, the scaled stereographic
// projection, the scaling radius and the driving function J = j + sqrt(j^2 + f).

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include "pcflow/error.hpp"
#include "pcflow/grid.hpp"

namespace pcflow {

// z -> e^{i theta} (z + a) / (1 + conj(a) z)
class MobiusMap {
 public:
  MobiusMap() = default;
  explicit MobiusMap(Complex a, double theta = 0.0) : a_(a), theta_(theta) {
    if (!(std::abs(a) < 1.0 - 1e-12)) {
      throw DomainError("Moebius parameter must satisfy |a| < 1 (got |a| = " + std::to_string(std::abs(a)) + ")");
    }
    if (!std::isfinite(theta)) throw DomainError("Moebius rotation must be finite");
  }

  static MobiusMap identity() { return MobiusMap(); }

  Complex a() const { return a_; }
  double theta() const { return theta_; }

  Complex operator()(Complex z) const {
    if (std::abs(z) > 1.0 + 1e-12) throw DomainError("Moebius maps act on the closed disc only");
    return raw(z);
  }
  // same as operator() without the domain check (internal sampling)
  Complex raw(Complex z) const { return std::polar(1.0, theta_) * (z + a_) / (1.0 + std::conj(a_) * z); }

  Complex derivative(Complex z) const {
    const Complex d = 1.0 + std::conj(a_) * z;
    return std::polar(1.0, theta_) * (1.0 - std::norm(a_)) / (d * d);
  }
  double log_abs_derivative(Complex z) const {
    return std::log(1.0 - std::norm(a_)) - 2.0 * std::log(std::abs(1.0 + std::conj(a_) * z));
  }

  MobiusMap inverse() const { return MobiusMap(-a_ * std::polar(1.0, theta_), -theta_); }

 private:
  Complex a_{0.0, 0.0};
  double theta_ = 0.0;
};

// outer o inner, via the 2x2 matrix representation
inline MobiusMap compose(const MobiusMap& outer, const MobiusMap& inner) {
  auto mat = [](const MobiusMap& m) {
    const Complex e = std::polar(1.0, m.theta());
    return std::array<Complex, 4>{e, e * m.a(), std::conj(m.a()), Complex(1.0, 0.0)};
  };
  const auto p = mat(outer), q = mat(inner);
  const Complex A = p[0] * q[0] + p[1] * q[2];
  const Complex B = p[0] * q[1] + p[1] * q[3];
  const Complex D = p[2] * q[1] + p[3] * q[3];
  const Complex rot = A / D;
  return MobiusMap(B / A, std::arg(rot));
}

// u o phi sampled on the grid (no conformal factor)
inline DiscField compose_field(const DiscField& u, const MobiusMap& phi) {
  const auto& g = *u.grid();
  FieldInterpolant it(u);
  DiscField out(u.grid());
  for (int i = 0; i < g.n_r(); ++i) {
    for (int k = 0; k < g.n_theta(); ++k) out(i, k) = it(phi.raw(g.node(i, k)));
  }
  return out;
}

inline BoundaryField compose_boundary(const BoundaryField& b, const MobiusMap& phi) {
  const auto& g = *b.grid();
  BoundaryInterpolant it(b);
  BoundaryField out(b.grid());
  for (int k = 0; k < g.n_theta(); ++k) out(k) = it(std::arg(phi.raw(g.node(0, k))));
  return out;
}

// log|phi'| on the grid
inline DiscField log_abs_derivative_field(GridPtr g, const MobiusMap& phi) {
  DiscField out(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) out(i, k) = phi.log_abs_derivative(g->node(i, k));
  }
  return out;
}

// v = u o phi + log|phi'|
inline DiscField pullback_conformal_factor(const DiscField& u, const MobiusMap& phi) {
  return compose_field(u, phi) + log_abs_derivative_field(u.grid(), phi);
}

struct CapGeometry {
  double R = 1.0;
  double r = 1.0;
  double sigma = 0.0;
  double k_R = 0.0;

  CapGeometry() = default;
  explicit CapGeometry(double R_) : R(R_) {
    if (!(R > 0.0 && R <= 1.0)) throw DomainError("cap radius R must lie in (0, 1] (got " + std::to_string(R) + ")");
    const double q = 1.0 + R * R;
    r = 2.0 * R / q;
    sigma = (1.0 - R * R) / q;
    k_R = (1.0 - R * R) / (2.0 * R);
  }
  // rho at which the cap metric is a rest point of the flow
  double rest_rho() const { return 2.0 * std::numbers::pi * R * R / (1.0 + R * R); }
};

inline Complex stereographic(double R, Complex z) { return 2.0 * R * z / (1.0 + R * R * std::norm(z)); }

// e^{w_R} = 2R / (1 + R^2 |z|^2)
inline DiscField cap_metric_factor(GridPtr g, double R) {
  (void)CapGeometry(R);
  return DiscField::from_polar(g, [R](double r, double) { return 2.0 * R / (1.0 + R * R * r * r); });
}

inline double scaling_radius(double f0, double j0) {
  if (!(f0 > 0.0)) throw DomainError("scaling radius needs f0 > 0");
  if (!(j0 >= 0.0)) throw DomainError("scaling radius needs j0 >= 0");
  return std::sqrt(1.0 + j0 * j0 / f0) - j0 / std::sqrt(f0);
}

inline DiscField big_J(const DiscField& f, const DiscField& j_harm) {
  f.check(j_harm);
  if (!(f.min() > 0.0)) throw DomainError("J needs f > 0 everywhere");
  DiscField out(f.grid());
  out.values() = j_harm.values().array() + (j_harm.values().array().square() + f.values().array()).sqrt();
  return out;
}

// Cartesian gradient of J at an arbitrary point of the closed disc.
inline Vec2 grad_J_at(const DiscField& f, const DiscField& j_harm, Complex z) {
  auto [gx, gy] = gradient(big_J(f, j_harm));
  return Vec2(FieldInterpolant(gx)(z), FieldInterpolant(gy)(z));
}

inline BoundaryField normal_derivative_J(const DiscField& f, const DiscField& j_harm) {
  return normal_derivative(big_J(f, j_harm));
}

}  // namespace pcflow
