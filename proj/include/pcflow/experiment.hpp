#pragma once

// From a RunConfig to a trajectory: grid, data, initial state (possibly in a
// Moebius frame, possibly resumed from a snapshot), then the run itself.

#include <filesystem>
#include <memory>
#include <optional>

#include "pcflow/cap.hpp"
#include "pcflow/config.hpp"
#include "pcflow/io.hpp"
#include "pcflow/run.hpp"

namespace pcflow {

struct Setup {
  GridPtr grid;
  ProblemData data;      // original coordinates
  ProblemData run_data;  // pulled back by frame
  MobiusMap frame;
  FlowState state;
  std::optional<StepperHistory> resume;
  double normalization_R = 0.0;
};

inline Setup make_setup(const RunConfig& c) {
  c.validate();
  Setup s;
  s.grid = DiscGrid::make(c.nr, c.nt);
  s.data = make_data(c, s.grid);
  const Expression perturb = Expression::parse(c.initial.perturb);
  const DiscField p = DiscField::from_xy(s.grid, [&](double x, double y) { return perturb(x, y); });
  const auto& in = c.initial;
  double auto_rho = std::numbers::pi / 2;
  if (in.type == "zero") {
    s.state.u = p;
  } else if (in.type == "cap") {
    s.state.u = cap_profile(s.grid, in.R, in.scale) + p;
    auto_rho = CapGeometry(in.R).rest_rho();
  } else if (in.type == "concentrated") {
    const Complex a(in.a_re, in.a_im);
    if (c.frame) {
      FrameSetup fs = concentrated_frame(a, s.data);
      s.frame = fs.frame;
      s.state = fs.state;
      s.state.u = s.state.u + p;
      if (c.normalization_R == 0.0) s.normalization_R = fs.R;
    } else {
      s.state = concentrated_initial_data(a, s.data);
      s.state.u = s.state.u + p;
    }
    auto_rho = s.state.rho;
  } else {
    StoredSnapshot st = load_snapshot(in.path, s.grid);
    s.state = st.snap.state;
    s.resume = st.snap.history;
    s.frame = st.frame;
    auto_rho = s.state.rho;
  }
  s.state.rho = in.rho > 0.0 ? in.rho : auto_rho;
  if (in.type != "snapshot") s.state.t = 0.0;
  s.run_data = s.data.pulled_back(s.frame);
  if (c.normalization_R > 0.0) s.normalization_R = c.normalization_R;
  if (s.normalization_R == 0.0) s.normalization_R = default_normalization_radius(s.run_data);
  require_finite(s.state.u);
  require_rho(s.state.rho);
  return s;
}

inline RunOptions make_options(const RunConfig& c, const Setup& s) {
  RunOptions o;
  o.frame = s.frame;
  o.track_center = c.track_center;
  o.normalization_R = s.normalization_R;
  if (s.resume) {
    o.resume = &*s.resume;
    o.record_initial = false;
  }
  return o;
}

inline Trajectory run_config(const RunConfig& c, const Setup& s) {
  FlowConfig f = c.flow;
  return run(s.state, s.run_data, f, make_options(c, s));
}

inline Json run_summary_json(const RunConfig& c) {
  return {{"config", to_text(c)}, {"seed", c.seed}, {"scheme", to_string(c.flow.scheme)}, {"resolution", {c.nr, c.nt}}};
}

}  // namespace pcflow
