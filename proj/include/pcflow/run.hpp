#pragma once

// Trajectory driver: integrates, records diagnostics, keeps snapshots,
// tracks the normalized center of mass, and builds concentrated initial data.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pcflow/cap.hpp"
#include "pcflow/diagnostics.hpp"
#include "pcflow/flow.hpp"
#include "pcflow/normalize.hpp"

namespace pcflow {

struct Snapshot {
  FlowState state;
  StepperHistory history;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  std::vector<Snapshot> snapshots;
  FlowState final_state;
  StepperHistory final_history;
  std::string stop_reason;
  double dissipation_integral = 0.0;  // trapezoid accumulation of int F dt
  long steps = 0;
  double max_mass_drift = 0.0;        // relative to the start, over every accepted step
  double max_step_mass_drift = 0.0;   // relative change in a single step
  double max_energy_increase = 0.0;   // over every accepted step
  double rho_min = std::numbers::pi, rho_max = 0.0;
  double mult_min = 1e300, mult_max = 0.0;
};

// A step error together with everything recorded before it.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& msg, std::string kind, Trajectory partial)
      : Error(msg), kind_(std::move(kind)), partial_(std::move(partial)) {}
  const std::string& kind() const { return kind_; }
  const Trajectory& partial() const { return partial_; }

 private:
  std::string kind_;
  Trajectory partial_;
};

struct RunOptions {
  // The state lives in the coordinates of this map: v = u o frame + log|frame'|,
  // and the data passed to run() are already pulled back by it.
  MobiusMap frame;
  bool track_center = false;
  double normalization_R = 0.0;  // 0: default radius of the data
  double neighborhood_factor = 16.0;
  const StepperHistory* resume = nullptr;
  bool record_initial = true;
  bool check_floor = true;
  std::function<void(const DiagnosticsRecord&)> on_record;
};

// fraction of m0 carried by the physical ball |z - z_P| < radius, z_P on the boundary
inline double boundary_mass_fraction(const DiscField& v, const MobiusMap& frame, Complex zP, double radius) {
  const auto& g = v.grid();
  DiscField ind(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) ind(i, k) = std::abs(frame.raw(g->node(i, k)) - zP) < radius ? 1.0 : 0.0;
  }
  const double part = 0.5 * integrate_disc(ind * v.exp(2)) + integrate_boundary(ind.boundary() * v.boundary().exp());
  return part / mass(v);
}

inline Trajectory run(const FlowState& initial, const ProblemData& d, const FlowConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  Integrator it = opt.resume ? Integrator(d, cfg, *opt.resume) : Integrator(d, cfg);
  Trajectory traj;
  FlowState s = initial;
  Rates r = rhs(s, d);
  double F = deviation_F(s, r);
  double E = energy(s, d);
  const double m_start = mass(s.u);
  double m_prev = m_start;
  const double kappa = curvature_floor_kappa(s, d);
  const double R_norm = opt.normalization_R > 0.0 ? opt.normalization_R : default_normalization_radius(d);
  MobiusMap guess;
  const double pi = std::numbers::pi;

  auto observe_brackets = [&](const FlowState& x, const Rates& rr) {
    traj.rho_min = std::min(traj.rho_min, x.rho);
    traj.rho_max = std::max(traj.rho_max, x.rho);
    traj.mult_min = std::min({traj.mult_min, rr.alpha, rr.beta});
    traj.mult_max = std::max({traj.mult_max, rr.alpha, rr.beta});
    if (!(x.rho > cfg.rho_margin && x.rho < pi - cfg.rho_margin)) {
      throw MonitorError("rho = " + std::to_string(x.rho) + " left the bracket at t = " + std::to_string(x.t));
    }
    for (double m : {rr.alpha, rr.beta}) {
      if (!(m > cfg.multiplier_min && m < cfg.multiplier_max)) {
        throw MonitorError("multiplier " + std::to_string(m) + " left its bracket at t = " + std::to_string(x.t));
      }
    }
    if (opt.check_floor && -rr.interior.max() < kappa) {
      throw MonitorError("inf(K - alpha f) fell below kappa = " + std::to_string(kappa));
    }
  };

  auto record = [&](const FlowState& x, const Rates& rr) {
    DiagnosticsRecord rec = make_record(x, d, rr);
    if (opt.track_center) {
      try {
        Normalization nz = normalize(x.u, R_norm, guess);
        guess = nz.phi;
        const MobiusMap total = compose(opt.frame, nz.phi);
        const Complex a = total.raw(Complex(0.0, 0.0));
        rec.a = a;
        rec.epsilon = (1.0 - std::abs(a)) / (1.0 + std::abs(a));
        if (std::abs(a) > 0.0) {
          rec.boundary_mass_fraction = boundary_mass_fraction(x.u, opt.frame, a / std::abs(a), opt.neighborhood_factor * *rec.epsilon);
        }
      } catch (const ConvergenceError&) {
        // gap in the track
      }
    }
    traj.records.push_back(rec);
    traj.records.back().classifier = classify(traj.records, {cfg.steady_tol});
    if (opt.on_record) opt.on_record(traj.records.back());
  };

  auto fail = [&](const std::string& kind, const std::string& msg) {
    traj.final_state = s;
    traj.final_history = it.history();
    traj.stop_reason = kind;
    throw RunAborted(kind + ": " + msg, kind, std::move(traj));
  };

  try {
    observe_brackets(s, r);
    if (opt.record_initial) record(s, r);
    long step_count = 0;
    traj.stop_reason = "t_end";
    while (s.t < cfg.t_end) {
      if (cfg.stop_when_steady && F < cfg.stop_threshold()) {
        traj.stop_reason = "steady";
        break;
      }
      FlowState n = it.step(s, r);
      Rates rn = rhs(n, d);
      const double Fn = deviation_F(n, rn);
      const double En = energy(n, d);
      traj.dissipation_integral += 0.5 * (F + Fn) * (n.t - s.t);
      const double m_new = mass(n.u);
      traj.max_mass_drift = std::max(traj.max_mass_drift, std::abs(m_new - m_start) / m_start);
      traj.max_step_mass_drift = std::max(traj.max_step_mass_drift, std::abs(m_new - m_prev) / m_start);
      m_prev = m_new;
      traj.max_energy_increase = std::max(traj.max_energy_increase, En - E);
      s = std::move(n);
      r = std::move(rn);
      F = Fn;
      E = En;
      ++step_count;
      observe_brackets(s, r);
      const bool last = !(s.t < cfg.t_end) || (cfg.stop_when_steady && F < cfg.stop_threshold());
      if (step_count % cfg.record_every == 0 || last) record(s, r);
      if (cfg.snapshot_every > 0 && step_count % cfg.snapshot_every == 0) traj.snapshots.push_back({s, it.history()});
    }
    traj.steps = step_count;
  } catch (const BlowUpError& e) {
    fail("blow-up", e.what());
  } catch (const MonitorError& e) {
    fail("monitor", e.what());
  } catch (const StateError& e) {
    fail("state", e.what());
  }
  traj.final_state = s;
  traj.final_history = it.history();
  if (traj.snapshots.empty() || traj.snapshots.back().state.t != s.t) traj.snapshots.push_back({s, it.history()});
  return traj;
}

// u + log(beta): a solution of K = f, k = j once the flow is at rest
inline DiscField extract_solution(const FlowState& s, const ProblemData& d, double steady_tol = 1e-6) {
  const double F = deviation_F(s, d);
  if (!(F < steady_tol)) {
    throw PreconditionError("state is not steady (F = " + std::to_string(F) + " >= " + std::to_string(steady_tol) + ")");
  }
  auto [a, b] = multipliers(s, d);
  (void)a;
  return s.u + std::log(b);
}

// rho with alpha = beta^2, given I_f = int f e^{2w}, I_j = int j e^{w} at unit scale
inline double rho_for_balance(double I_f, double I_j) {
  if (!(I_f > 0.0 && I_j > 0.0) || !std::isfinite(I_f) || !std::isfinite(I_j)) {
    throw ConfigError("cannot balance alpha = beta^2: degenerate integrals");
  }
  const double pi = std::numbers::pi;
  auto h = [&](double rho) { return rho * I_j * I_j - 2.0 * (pi - rho) * (pi - rho) * I_f; };
  double lo = 0.0, hi = pi;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  const double rho = 0.5 * (lo + hi);
  if (!(rho > 0.0 && rho < pi)) throw ConfigError("alpha = beta^2 has no root in (0, pi)");
  return rho;
}

// Concentrated data in the fixed frame Phi_a: the state is the centered cap
// profile and the data are pulled back. Equivalent, by conformal covariance of
// the flow, to the original-coordinate data of concentrated_initial_data.
struct FrameSetup {
  MobiusMap frame;
  ProblemData data;  // pulled back by frame
  FlowState state;   // centered cap profile, rho balanced
  double R = 1.0;
  double scale = 1.0;
  Complex target;    // a / |a| (or 0)
};

inline FrameSetup concentrated_frame(Complex a, const ProblemData& d) {
  if (!(std::abs(a) < 1.0)) throw DomainError("concentration parameter must satisfy |a| < 1");
  FrameSetup out;
  out.target = std::abs(a) > 0.0 ? a / std::abs(a) : Complex(0.0, 0.0);
  const double f0 = d.f_at(out.target);
  const double j0 = d.j_at(out.target);
  out.R = std::min(1.0, scaling_radius(f0, j0));
  out.scale = f0;
  out.frame = MobiusMap(a);
  out.data = d.pulled_back(out.frame);
  DiscField w = cap_profile(d.grid(), out.R, 1.0);
  const double I_f = integrate_disc(out.data.f() * w.exp(2));
  const double I_j = integrate_boundary(out.data.j() * w.boundary().exp());
  out.state.u = w - 0.5 * std::log(out.scale);
  out.state.rho = rho_for_balance(I_f, I_j);
  out.state.t = 0.0;
  return out;
}

// The same data in original coordinates: u = w_R o Phi_{-a} + log|Phi_{-a}'| - log(scale)/2.
inline FlowState concentrated_initial_data(Complex a, const ProblemData& d) {
  FrameSetup fs = concentrated_frame(a, d);
  const MobiusMap inv = fs.frame.inverse();
  const double R = fs.R;
  const auto& g = d.grid();
  DiscField u(g);
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Complex z = g->node(i, k);
      const Complex w = inv.raw(z);
      u(i, k) = std::log(2.0 * R / (1.0 + R * R * std::norm(w))) + inv.log_abs_derivative(z) - 0.5 * std::log(fs.scale);
    }
  }
  return {u, fs.state.rho, 0.0};
}

}  // namespace pcflow
