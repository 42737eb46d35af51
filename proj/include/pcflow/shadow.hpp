#pragma once

// Concentration tracking: center of mass P = Phi(0), epsilon = (1-|a|)/(1+|a|),
// the moment vector Xi and its leading-order asymptotic, and the reduced ODE
// for (a, phi) driven by grad J at the concentration target.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "pcflow/conformal.hpp"
#include "pcflow/flow.hpp"
#include "pcflow/normalize.hpp"
#include "pcflow/run.hpp"

namespace pcflow {

inline double epsilon_of(Complex a) {
  const double m = std::abs(a);
  return (1.0 - m) / (1.0 + m);
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v(0) - s * v(1), s * v(0) + c * v(1));
}

// Xi_i = int psi_i (alpha f o Phi - K_v) e^{2v} dz + int psi_i (beta j o Phi - k_v) e^v ds0,
// in the coordinates of nz.v; K_v e^{2v} = -Lap v and k_v e^v = v_r + 1.
inline Vec2 xi_moment(const FlowState& s, const ProblemData& d, const Normalization& nz) {
  auto [alpha, beta] = multipliers(s, d);
  const auto& v = nz.v;
  const auto& g = v.grid();
  ProblemData pd = d.pulled_back(nz.phi);
  DiscField inner = alpha * pd.f() * v.exp(2) + laplacian(v);
  BoundaryField outer = beta * pd.j() * v.boundary().exp() - normal_derivative(v) + (-1.0);
  DiscField px(g), py(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Vec2 p = psi_R(nz.R_used, g->node(i, k));
      px(i, k) = p(0);
      py(i, k) = p(1);
    }
  }
  return Vec2(integrate_disc(px * inner) + integrate_boundary(px.boundary() * outer),
              integrate_disc(py * inner) + integrate_boundary(py.boundary() * outer));
}

inline Vec2 grad_J(const ProblemData& d, Complex z) { return grad_J_at(d.f(), d.j_harm(), z); }

// 16 pi eps R^3 sqrt(f + j^2) / ((1 + R^2)^2 f) grad J(z0), R = R(z0)
inline Vec2 xi_asymptotic(const ProblemData& d, Complex z0, double eps) {
  const double f0 = d.f_at(z0);
  if (!(f0 > 0.0)) throw DomainError("xi_asymptotic needs f(z0) > 0");
  const double j0 = d.j_at(z0);
  const double R = scaling_radius(f0, j0);
  const double coef = 16.0 * std::numbers::pi * eps * R * R * R * std::sqrt(f0 + j0 * j0) / (std::pow(1.0 + R * R, 2) * f0);
  return coef * grad_J(d, z0);
}

// grad J at the boundary point e^{i phi}, in the frame rotated so that the point sits at 1:
// (normal derivative, tangential derivative)
inline Vec2 grad_J_rotated(const ProblemData& d, double phi) { return rotate(grad_J(d, std::polar(1.0, phi)), -phi); }

struct ShadowPoint {
  double t = 0.0;
  double a = 0.0;  // |a|
  double phi = 0.0;
};

// explicit Euler for (a, phi)' = -eps^2 (C1 dJ/dx, C2 dJ/dy) in the rotated frame.
// No sign requirement on the constants; see shadow_ode_step.
inline ShadowPoint shadow_euler(const ShadowPoint& p, double eps, const Vec2& gradJ_rot, double C1, double C2, double dt,
                                bool* clamped = nullptr) {
  ShadowPoint q{p.t + dt, p.a - dt * eps * eps * C1 * gradJ_rot(0), p.phi - dt * eps * eps * C2 * gradJ_rot(1)};
  const double top = std::nextafter(1.0, 0.0);
  if (q.a < 0.0 || q.a > top) {
    q.a = std::clamp(q.a, 0.0, top);
    if (clamped) *clamped = true;
  }
  return q;
}

inline ShadowPoint shadow_ode_step(const ShadowPoint& p, double eps, const Vec2& gradJ_rot, double C1, double C2, double dt,
                                   bool* clamped = nullptr) {
  if (!(C1 > 0.0 && C2 > 0.0)) throw DomainError("shadow constants must be positive");
  return shadow_euler(p, eps, gradJ_rot, C1, C2, dt, clamped);
}

// Integrates the shadow ODE with grad J re-evaluated at e^{i phi} every step.
// signed_constants: accept calibrated constants of either sign.
inline std::vector<ShadowPoint> integrate_shadow(const ProblemData& d, ShadowPoint start, double t_end, double dt, double C1,
                                                 double C2, bool signed_constants = false) {
  if (!signed_constants && !(C1 > 0.0 && C2 > 0.0)) throw DomainError("shadow constants must be positive");
  if (!(dt > 0.0)) throw DomainError("shadow time step must be positive");
  std::vector<ShadowPoint> out{start};
  ShadowPoint p = start;
  while (p.t < t_end - 1e-12 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - p.t);
    p = shadow_euler(p, epsilon_of(p.a), grad_J_rotated(d, p.phi), C1, C2, h);
    out.push_back(p);
  }
  return out;
}

struct CenterSample {
  double t = 0.0;
  Complex a;        // center of mass Phi(0)
  double phi = 0.0;  // arg a
  double epsilon = 1.0;
  Vec2 Xi = Vec2::Zero();
  Vec2 gradJ = Vec2::Zero();  // at the projected target a/|a|
  double F = 0.0;
};

struct CenterTrack {
  std::vector<CenterSample> samples;
  int gaps = 0;                    // snapshots where normalization failed
  bool hit_resolution_floor = false;
};

inline double resolution_floor(const DiscGrid& g) { return 4.0 / g.n_theta(); }

// frame/frame_data: coordinates in which the snapshots live (identity for plain runs);
// data: the problem in original coordinates.
inline CenterTrack track_centers(const std::vector<Snapshot>& snaps, const ProblemData& data, double R,
                                 const MobiusMap& frame = MobiusMap(), const ProblemData* frame_data = nullptr) {
  const ProblemData& fd = frame_data ? *frame_data : data;
  CenterTrack track;
  MobiusMap guess;
  for (const auto& sn : snaps) {
    Normalization nz;
    try {
      nz = normalize(sn.state.u, R, guess);
    } catch (const ConvergenceError&) {
      ++track.gaps;
      continue;
    }
    guess = nz.phi;
    const MobiusMap total = compose(frame, nz.phi);
    CenterSample c;
    c.t = sn.state.t;
    c.a = total.raw(Complex(0.0, 0.0));
    c.phi = std::arg(c.a);
    c.epsilon = epsilon_of(c.a);
    c.Xi = rotate(xi_moment(sn.state, fd, nz), total.theta());
    c.gradJ = std::abs(c.a) > 0.0 ? grad_J(data, c.a / std::abs(c.a)) : Vec2::Zero();
    c.F = deviation_F(sn.state, fd);
    if (c.epsilon < resolution_floor(*sn.state.u.grid())) {
      track.hit_resolution_floor = true;
      break;
    }
    track.samples.push_back(c);
  }
  return track;
}

struct ShadowConstants {
  double C1 = 1.0;
  double C2 = 1.0;
  bool C2_identified = false;  // false when the tangential gradient vanished along the track
};

// Least squares for (d|a|/dt, dphi/dt) / eps^2 = -(C1 J_nu, C2 J_tau), using
// centered differences of the tracked samples.
inline ShadowConstants calibrate_shadow(const std::vector<CenterTrack>& tracks) {
  double n1 = 0, d1 = 0, n2 = 0, d2 = 0;
  for (const auto& tr : tracks) {
    const auto& s = tr.samples;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      const double dt = s[i + 1].t - s[i - 1].t;
      if (!(dt > 0.0)) continue;
      const double da = (std::abs(s[i + 1].a) - std::abs(s[i - 1].a)) / dt;
      double dphi = std::remainder(s[i + 1].phi - s[i - 1].phi, 2.0 * std::numbers::pi) / dt;
      const Vec2 g = rotate(s[i].gradJ, -s[i].phi);
      const double e2 = s[i].epsilon * s[i].epsilon;
      n1 += -da * e2 * g(0);
      d1 += e2 * e2 * g(0) * g(0);
      n2 += -dphi * e2 * g(1);
      d2 += e2 * e2 * g(1) * g(1);
    }
  }
  ShadowConstants c;
  if (!(d1 > 0.0)) throw PreconditionError("calibration needs tracks with a nonzero normal gradient of J");
  c.C1 = n1 / d1;
  if (d2 > 1e-12 * d1) {
    c.C2 = n2 / d2;
    c.C2_identified = true;
  } else {
    c.C2 = c.C1;
  }
  return c;
}

// max over samples of eps(t) - eps0 / (1 + c eps0 (t - t0))
inline double epsilon_decay_violation(const std::vector<ShadowPoint>& path, double c) {
  if (path.empty()) return 0.0;
  const double e0 = (1.0 - path.front().a) / (1.0 + path.front().a);
  const double t0 = path.front().t;
  double worst = -1e300;
  for (const auto& p : path) {
    const double e = (1.0 - p.a) / (1.0 + p.a);
    worst = std::max(worst, e - e0 / (1.0 + c * e0 * (p.t - t0)));
  }
  return worst;
}

// F = F0 + F1 + F2 with F0 = rho_t^2, F1 the part along Z_1, Z_2 and F2 the rest,
// after orthonormalizing {1, Z_1, Z_2} in e^{2v}dz + e^v ds0. kappa0_sq is the
// squared component along constants, which belongs to none of the three parts.
struct FSplit {
  double F = 0.0, F0 = 0.0, F1 = 0.0, F2 = 0.0, kappa0_sq = 0.0;
};

inline FSplit f_split(const FlowState& s, const ProblemData& d, const Normalization& nz) {
  auto [alpha, beta] = multipliers(s, d);
  const auto& v = nz.v;
  const auto& g = v.grid();
  ProblemData pd = d.pulled_back(nz.phi);
  // the deviation has separate interior and boundary values
  DiscField hi = alpha * pd.f() + v.exp(-2) * laplacian(v);
  BoundaryField hb = beta * pd.j() - geodesic_curvature(v);
  DiscField wi = v.exp(2);
  BoundaryField wb = v.boundary().exp();
  auto ip = [&](const DiscField& ai, const BoundaryField& ab, const DiscField& b) {
    return integrate_disc(ai * b * wi) + integrate_boundary(ab * b.boundary() * wb);
  };
  std::vector<DiscField> basis;
  basis.push_back(DiscField::constant(g, 1.0));
  DiscField z1(g), z2(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Vec2 p = psi_R(nz.R_used, g->node(i, k));
      z1(i, k) = p(0);
      z2(i, k) = p(1);
    }
  }
  basis.push_back(z1);
  basis.push_back(z2);
  for (size_t i = 0; i < basis.size(); ++i) {
    for (size_t j = 0; j < i; ++j) basis[i] -= ip(basis[i], basis[i].boundary(), basis[j]) * basis[j];
    basis[i] *= 1.0 / std::sqrt(ip(basis[i], basis[i].boundary(), basis[i]));
  }
  FSplit out;
  const double rt = std::log(beta * beta / alpha);
  out.F0 = rt * rt;
  const double hh = integrate_disc(hi * hi * wi) + integrate_boundary(hb * hb * wb);
  out.F = hh + out.F0;
  const double k0 = ip(hi, hb, basis[0]), k1 = ip(hi, hb, basis[1]), k2 = ip(hi, hb, basis[2]);
  out.kappa0_sq = k0 * k0;
  out.F1 = k1 * k1 + k2 * k2;
  out.F2 = hh - out.kappa0_sq - out.F1;
  return out;
}

}  // namespace pcflow
