#pragma once

// Time stepping for the coupled flow
//   u_t = alpha f - K in B,  u_t = beta j - k on the boundary,  rho_t = log(beta^2 / alpha).
// The boundary nodes carry their own evolution law; the boundary row of the
// interior rate is overwritten by it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "pcflow/error.hpp"
#include "pcflow/grid.hpp"
#include "pcflow/model.hpp"

namespace pcflow {

enum class Scheme { semi_implicit, explicit_rk4 };

inline std::string to_string(Scheme s) { return s == Scheme::semi_implicit ? "semi_implicit" : "explicit_rk4"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "semi_implicit" || s == "imex" || s == "sbdf2") return Scheme::semi_implicit;
  if (s == "explicit_rk4" || s == "rk4") return Scheme::explicit_rk4;
  throw ConfigError("unknown scheme '" + s + "' (expected semi_implicit or explicit_rk4)");
}

struct FlowConfig {
  double dt_init = 1e-4;
  double dt_max = 5e-3;
  double dt_growth = 1.1;  // geometric ramp from dt_init to dt_max
  double cfl_safety = 0.5;
  double t_end = 1.0;
  Scheme scheme = Scheme::semi_implicit;
  double steady_tol = 1e-6;
  bool stop_when_steady = false;
  double stop_tol = 0.0;   // F threshold for stop_when_steady; 0 means steady_tol
  int record_every = 10;
  int snapshot_every = 0;  // 0: no snapshots except the final state
  // monitor brackets
  double rho_margin = 0.02;
  double multiplier_min = 1e-3;
  double multiplier_max = 1e3;

  void validate() const {
    if (!(dt_init > 0.0) || !(dt_max > 0.0)) throw ConfigError("time steps must be positive");
    if (!(dt_growth >= 1.0)) throw ConfigError("dt_growth must be >= 1");
    if (!(cfl_safety > 0.0 && cfl_safety < 1.0)) throw ConfigError("cfl_safety must lie in (0, 1)");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
    if (!(steady_tol > 0.0)) throw ConfigError("steady_tol must be positive");
    if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be non-negative");
    if (record_every < 1) throw ConfigError("record_every must be >= 1");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
  }

  double stop_threshold() const { return stop_tol > 0.0 ? stop_tol : steady_tol; }
};

struct Rates {
  DiscField du_dt;         // alpha f - K inside, beta j - k on the boundary row
  double drho_dt = 0.0;
  DiscField interior;      // alpha f - K on every node
  BoundaryField boundary;  // beta j - k
  double alpha = 0.0;
  double beta = 0.0;
};

inline Rates rhs(const FlowState& s, const ProblemData& d) {
  require_rho(s.rho);
  require_finite(s.u);
  auto [a, b] = multipliers(s, d);
  DiscField lap = laplacian(s.u);
  DiscField interior(s.u.grid(), (a * d.f().values().array() + (-2.0 * s.u.values().array()).exp() * lap.values().array()).matrix());
  BoundaryField bnd = b * d.j() - geodesic_curvature(s.u);
  DiscField du = interior;
  du.values().row(0) = bnd.values().transpose();
  return {std::move(du), std::log(b * b / a), std::move(interior), std::move(bnd), a, b};
}

// The last accepted state travels with the error.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& msg, FlowState last) : Error(msg), last_(std::move(last)) {}
  const FlowState& last_state() const { return last_; }

 private:
  FlowState last_;
};

// Everything the multistep scheme and the monitors need beyond the current
// state. Stored in snapshots so a restart continues bit for bit.
struct StepperHistory {
  long steps = 0;
  double dt_prev = 0.0;     // last step actually taken
  double dt_nominal = 0.0;  // ramp value before clamping to t_end
  bool has_prev = false;
  DiscField u_prev;
  DiscField rate_prev;
  double rho_prev = 0.0;
  double rho_rate_prev = 0.0;
  // blow-up guard: max u <= u0_sup + (t - t0) * growth_rate + 5
  bool guard_set = false;
  double t0 = 0.0;
  double u0_sup = 0.0;
  double growth_rate = 0.0;
};

class Integrator {
 public:
  Integrator(ProblemData data, FlowConfig cfg) : data_(std::move(data)), cfg_(cfg) { cfg_.validate(); }
  Integrator(ProblemData data, FlowConfig cfg, StepperHistory h) : Integrator(std::move(data), cfg) { hist_ = std::move(h); }

  const StepperHistory& history() const { return hist_; }
  const FlowConfig& config() const { return cfg_; }
  const ProblemData& data() const { return data_; }

  double explicit_dt(const FlowState& s) const {
    const double lim = cfg_.cfl_safety * s.u.exp(2).min() * std::pow(s.u.grid()->h_min(), 2);
    return std::min(cfg_.dt_max, lim);
  }

  FlowState step(const FlowState& s) { return step(s, rhs(s, data_)); }

  // One step from s, whose rates r = rhs(s, data) the caller has already evaluated.
  FlowState step(const FlowState& s, const Rates& r) {
    update_guard(s, r);
    const double remaining = cfg_.t_end - s.t;
    if (!(remaining > 0.0)) throw PreconditionError("step called at or beyond t_end");
    FlowState next;
    double dt = 0.0;
    if (cfg_.scheme == Scheme::explicit_rk4) {
      dt = explicit_dt(s);
      if (!(dt >= 1e-10)) throw BlowUpError("explicit time step fell below 1e-10", s);
      hist_.dt_nominal = dt;
      dt = clamp_to_end(s.t, dt);
      next = rk4(s, r, dt);
    } else {
      double nominal = hist_.steps == 0 ? cfg_.dt_init : std::min(cfg_.dt_max, hist_.dt_nominal * cfg_.dt_growth);
      hist_.dt_nominal = nominal;
      dt = clamp_to_end(s.t, nominal);
      next = sbdf2(s, r, dt);
    }
    next.t = (dt == remaining) ? cfg_.t_end : s.t + dt;
    check(s, next);
    hist_.steps += 1;
    hist_.dt_prev = dt;
    return next;
  }

 private:
  double clamp_to_end(double t, double dt) const {
    const double remaining = cfg_.t_end - t;
    // avoid a sliver step at the end
    return (dt >= remaining || remaining - dt < 1e-12 * std::max(1.0, cfg_.t_end)) ? remaining : dt;
  }

  void update_guard(const FlowState& s, const Rates& r) {
    if (!hist_.guard_set) {
      hist_.guard_set = true;
      hist_.t0 = s.t;
      hist_.u0_sup = s.u.max();
    }
    const double g = std::max(r.alpha * data_.f().max(), r.beta * data_.j().max());
    hist_.growth_rate = std::max(hist_.growth_rate, g);
  }

  void check(const FlowState& prev, const FlowState& next) const {
    if (!next.u.all_finite() || !std::isfinite(next.rho)) throw BlowUpError("non-finite values after step", prev);
    if (!(next.rho > 0.0 && next.rho < std::numbers::pi)) {
      throw MonitorError("rho left (0, pi): " + std::to_string(next.rho) + " at t = " + std::to_string(next.t));
    }
    const double bound = hist_.u0_sup + (next.t - hist_.t0) * hist_.growth_rate + 5.0;
    if (next.u.max() > bound) {
      throw BlowUpError("max u = " + std::to_string(next.u.max()) + " exceeds the growth bound " + std::to_string(bound), prev);
    }
  }

  FlowState rk4(const FlowState& s, const Rates& k1, double dt) {
    auto stage = [&](const Rates& k, double h) {
      FlowState x{s.u + h * k.du_dt, s.rho + h * k.drho_dt, s.t + h};
      if (!x.u.all_finite() || !(x.rho > 0.0 && x.rho < std::numbers::pi)) throw BlowUpError("RK4 stage left the state space", s);
      return rhs(x, data_);
    };
    Rates k2 = stage(k1, 0.5 * dt);
    Rates k3 = stage(k2, 0.5 * dt);
    Rates k4 = stage(k3, dt);
    FlowState out;
    out.u = s.u + (dt / 6.0) * (k1.du_dt + 2.0 * k2.du_dt + 2.0 * k3.du_dt + k4.du_dt);
    out.rho = s.rho + dt / 6.0 * (k1.drho_dt + 2.0 * k2.drho_dt + 2.0 * k3.drho_dt + k4.drho_dt);
    hist_.has_prev = false;
    return out;
  }

  // L u: lam * Laplacian inside, -mu * u_r on the boundary row
  static DiscField apply_linear(const DiscField& u, double lam, double mu) {
    DiscField out = lam * laplacian(u);
    out.values().row(0) = -mu * radial_derivative(u).values().row(0);
    return out;
  }

  // Variable-step IMEX BDF2. The stiff parts lam*Laplacian (lam = max e^{-2u})
  // and -mu*u_r (mu = max e^{-u} on the boundary) are implicit, the
  // remainder explicit. The first step is IMEX Euler.
  FlowState sbdf2(const FlowState& s, const Rates& r, double dt) {
    const double lam = s.u.exp(-2).max();
    const double mu = s.u.boundary().exp(-1.0).max();
    DiscField N = r.du_dt - apply_linear(s.u, lam, mu);
    double gamma = 1.0;
    DiscField b;
    double rho_num = 0.0;
    if (hist_.has_prev) {
      const double w = dt / hist_.dt_prev;
      gamma = (1.0 + 2.0 * w) / (1.0 + w);
      const double c_prev = w * w / (1.0 + w);
      DiscField Np = hist_.rate_prev - apply_linear(hist_.u_prev, lam, mu);
      b = (1.0 + w) * s.u - c_prev * hist_.u_prev + dt * ((1.0 + w) * N - w * Np);
      rho_num = (1.0 + w) * s.rho - c_prev * hist_.rho_prev + dt * ((1.0 + w) * r.drho_dt - w * hist_.rho_rate_prev);
    } else {
      b = s.u + dt * N;
      rho_num = s.rho + dt * r.drho_dt;
    }
    // gamma u - dt lam Lap u = b inside, gamma u + dt mu u_r = b on the boundary
    const double scale = 1.0 / (dt * lam);
    FlowState out;
    out.u = helmholtz_solve(gamma * scale, scale * b, {gamma, dt * mu}, b.boundary());
    out.rho = rho_num / gamma;
    hist_.has_prev = true;
    hist_.u_prev = s.u;
    hist_.rate_prev = r.du_dt;
    hist_.rho_prev = s.rho;
    hist_.rho_rate_prev = r.drho_dt;
    return out;
  }

  ProblemData data_;
  FlowConfig cfg_;
  StepperHistory hist_;
};

// A single step from a fresh integrator (no multistep history).
inline FlowState step(const FlowState& s, const ProblemData& d, const FlowConfig& cfg) {
  Integrator it(d, cfg);
  return it.step(s);
}

}  // namespace pcflow
