#pragma once

// Curvature operators, the multipliers alpha and beta, the energy and its
// rho-derivative, the conserved mass and the classical identities.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "pcflow/conformal.hpp"
#include "pcflow/error.hpp"
#include "pcflow/grid.hpp"

namespace pcflow {

// Prescribed data: f > 0 on the disc, j > 0 on the boundary. Closed forms are
// kept when available so that pulled-back data are sampled exactly.
class ProblemData {
 public:
  using XYFunction = std::function<double(double, double)>;

  ProblemData() = default;
  ProblemData(DiscField f, BoundaryField j) : f_(std::move(f)), j_(std::move(j)) {
    if (!f_.grid()->same_shape(*j_.grid())) throw DimensionError("f and j live on different grids");
    validate();
    j_harm_ = harmonic_extension(j_);
  }

  static ProblemData from_functions(GridPtr g, XYFunction f, XYFunction j) {
    ProblemData d(DiscField::from_xy(g, f), BoundaryField::from_theta(g, [&](double t) { return j(std::cos(t), std::sin(t)); }));
    d.f_fn_ = std::move(f);
    d.j_fn_ = std::move(j);
    return d;
  }
  static ProblemData constant(GridPtr g, double f0, double j0) {
    return from_functions(g, [f0](double, double) { return f0; }, [j0](double, double) { return j0; });
  }

  const GridPtr& grid() const { return f_.grid(); }
  const DiscField& f() const { return f_; }
  const BoundaryField& j() const { return j_; }
  const DiscField& j_harm() const { return j_harm_; }
  bool has_closed_form() const { return bool(f_fn_) && bool(j_fn_); }
  const XYFunction& f_function() const { return f_fn_; }
  const XYFunction& j_function() const { return j_fn_; }

  double f_at(Complex z) const { return f_fn_ ? f_fn_(z.real(), z.imag()) : FieldInterpolant(f_)(z); }
  // j(z) for boundary z; harmonic extension for interior z
  double j_at(Complex z) const {
    if (j_fn_ && std::abs(std::abs(z) - 1.0) < 1e-14) return j_fn_(z.real(), z.imag());
    return FieldInterpolant(j_harm_)(z);
  }

  // (f o phi, j o phi)
  ProblemData pulled_back(const MobiusMap& phi) const {
    if (has_closed_form()) {
      auto f = f_fn_;
      auto j = j_fn_;
      return from_functions(
          grid(), [f, phi](double x, double y) { const Complex w = phi.raw(Complex(x, y)); return f(w.real(), w.imag()); },
          [j, phi](double x, double y) {
            const Complex w = phi.raw(Complex(x, y));
            const double s = std::abs(w);
            return j(w.real() / s, w.imag() / s);
          });
    }
    return ProblemData(compose_field(f_, phi), compose_boundary(j_, phi));
  }

  // same data sampled on another grid
  ProblemData resampled(GridPtr g) const {
    if (has_closed_form()) return from_functions(g, f_fn_, j_fn_);
    FieldInterpolant fi(f_);
    BoundaryInterpolant ji(j_);
    return ProblemData(DiscField::from_polar(g, [&](double r, double t) { return fi(std::polar(r, t)); }),
                       BoundaryField::from_theta(g, [&](double t) { return ji(t); }));
  }

 private:
  void validate() const {
    if (!f_.all_finite() || !j_.values().allFinite()) throw StateError("problem data must be finite");
    if (!(f_.min() > 0.0)) throw DomainError("f must be strictly positive");
    if (!(j_.min() > 0.0)) throw DomainError("j must be strictly positive");
  }

  DiscField f_;
  BoundaryField j_;
  DiscField j_harm_;
  XYFunction f_fn_;
  XYFunction j_fn_;
};

struct FlowState {
  DiscField u;
  double rho = std::numbers::pi / 2;
  double t = 0.0;
};

struct CurvatureData {
  DiscField K;
  BoundaryField k;
  double alpha = 0.0;
  double beta = 0.0;
};

inline void require_rho(double rho) {
  if (!(rho > 0.0 && rho < std::numbers::pi)) {
    throw StateError("rho must lie in (0, pi) (got " + std::to_string(rho) + ")");
  }
}

inline void require_finite(const DiscField& u) {
  if (!u.all_finite()) throw StateError("field has non-finite entries");
}

inline DiscField gauss_curvature(const DiscField& u) {
  DiscField lap = laplacian(u);
  return DiscField(u.grid(), -(lap.values().array() * (-2.0 * u.values().array()).exp()).matrix());
}

inline BoundaryField geodesic_curvature(const DiscField& u) {
  BoundaryField un = normal_derivative(u);
  BoundaryField ub = u.boundary();
  return BoundaryField(u.grid(), ((un.values().array() + 1.0) * (-ub.values().array()).exp()).matrix());
}

inline double area_integral(const DiscField& u, const ProblemData& d) { return integrate_disc(d.f() * u.exp(2)); }
inline double length_integral(const DiscField& u, const ProblemData& d) { return integrate_boundary(d.j() * u.boundary().exp()); }

inline std::pair<double, double> multipliers(const FlowState& s, const ProblemData& d) {
  require_rho(s.rho);
  const double alpha = 2.0 * s.rho / area_integral(s.u, d);
  const double beta = 2.0 * (std::numbers::pi - s.rho) / length_integral(s.u, d);
  return {alpha, beta};
}

inline CurvatureData curvature_data(const FlowState& s, const ProblemData& d) {
  auto [a, b] = multipliers(s, d);
  return {gauss_curvature(s.u), geodesic_curvature(s.u), a, b};
}

inline double energy(const FlowState& s, const ProblemData& d) {
  require_rho(s.rho);
  constexpr double pi = std::numbers::pi;
  const double rho = s.rho;
  return 0.5 * dirichlet_integral(s.u) + integrate_boundary(s.u.boundary()) - rho * std::log(area_integral(s.u, d)) -
         2.0 * (pi - rho) * std::log(length_integral(s.u, d)) + 2.0 * (pi - rho) * std::log(2.0 * (pi - rho)) + rho +
         rho * std::log(2.0 * rho);
}

inline double denergy_drho(const FlowState& s, const ProblemData& d) {
  auto [a, b] = multipliers(s, d);
  return std::log(a) - 2.0 * std::log(b);
}

// <d_u E(u, rho), phi> as a quadrature formula
inline double energy_directional_derivative(const FlowState& s, const ProblemData& d, const DiscField& phi) {
  auto [a, b] = multipliers(s, d);
  auto [ux, uy] = gradient(s.u);
  auto [px, py] = gradient(phi);
  const double dirichlet = integrate_disc(ux * px + uy * py);
  return dirichlet + integrate_boundary(phi.boundary()) - a * integrate_disc(d.f() * s.u.exp(2) * phi) -
         b * integrate_boundary(d.j() * s.u.boundary().exp() * phi.boundary());
}

inline double mass(const DiscField& u) { return 0.5 * integrate_disc(u.exp(2)) + integrate_boundary(u.boundary().exp()); }

inline double gauss_bonnet_residual(const DiscField& u) {
  DiscField K = gauss_curvature(u);
  BoundaryField k = geodesic_curvature(u);
  return integrate_disc(K * u.exp(2)) + integrate_boundary(k * u.boundary().exp()) - 2.0 * std::numbers::pi;
}

inline double lebedev_milin_deficit(const DiscField& u) {
  constexpr double pi = std::numbers::pi;
  const BoundaryField ub = u.boundary();
  return dirichlet_integral(u) / (4.0 * pi) + integrate_boundary(ub) / (2.0 * pi) -
         std::log(integrate_boundary(ub.exp()) / (2.0 * pi));
}

inline double problem_residual(const DiscField& u, const ProblemData& d) {
  DiscField interior = -laplacian(u) - d.f() * u.exp(2);
  BoundaryField bnd = normal_derivative(u) + 1.0 - d.j() * u.boundary().exp();
  return std::sqrt(integrate_disc(interior * interior)) + std::sqrt(integrate_boundary(bnd * bnd));
}

}  // namespace pcflow
