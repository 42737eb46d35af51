// pcflow: run, steady, spectrum, shadow, check and sweep.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pcflow/checks.hpp"
#include "pcflow/experiment.hpp"
#include "pcflow/shadow.hpp"

using namespace pcflow;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  unsigned long long seed = 42;
  std::vector<int> resolution;
  std::string scheme;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "configuration file");
  if (needs_config) opt->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory or file");
  app->add_option("--seed", c.seed, "seed for randomized suites")->capture_default_str();
  app->add_option("--resolution", c.resolution, "grid size NR NT")->expected(2);
  app->add_option("--scheme", c.scheme, "semi_implicit or explicit_rk4");
}

RunConfig resolve(const Common& c) {
  RunConfig rc = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (!c.out.empty()) rc.out_dir = c.out;
  rc.seed = c.seed;
  if (c.resolution.size() == 2) {
    rc.nr = c.resolution[0];
    rc.nt = c.resolution[1];
  }
  if (!c.scheme.empty()) rc.flow.scheme = parse_scheme(c.scheme);
  rc.validate();
  return rc;
}

std::string fmt(double x) { return format_double(x); }

int cmd_run(const Common& c, bool steady) {
  RunConfig rc = resolve(c);
  if (steady) rc.flow.stop_when_steady = true;
  Setup s = make_setup(rc);
  Trajectory tr;
  int code = 0;
  std::string error;
  try {
    tr = run_config(rc, s);
  } catch (const RunAborted& e) {
    tr = e.partial();
    error = e.what();
    code = 3;
  }
  Json extra = run_summary_json(rc);
  if (!error.empty()) extra["error"] = error;
  if (steady && code == 0) {
    const double F = tr.records.empty() ? deviation_F(tr.final_state, s.run_data) : tr.records.back().F;
    if (F < rc.flow.steady_tol) {
      // back to original coordinates before rescaling
      FlowState fin = tr.final_state;
      fin.u = pullback_conformal_factor(fin.u, s.frame.inverse());
      const DiscField sol = extract_solution(fin, s.data, rc.flow.steady_tol);
      const double res = problem_residual(sol, s.data);
      extra["problem_residual"] = res;
      fs::create_directories(rc.out_dir);
      write_json(fs::path(rc.out_dir) / "solution.json", field_to_json(sol));
      std::cout << "steady at t = " << fmt(fin.t) << ", F = " << fmt(F) << ", problem_residual = " << fmt(res) << "\n";
    } else {
      std::cout << "not steady by t = " << fmt(tr.final_state.t) << " (F = " << fmt(F) << ")\n";
      code = 2;
    }
  }
  write_trajectory(rc.out_dir, tr, s.frame, extra);
  if (!error.empty()) std::cerr << "run aborted: " << error << "\n";
  std::cout << "wrote " << rc.out_dir << " (" << tr.records.size() << " records, " << tr.snapshots.size() << " snapshots, stop: "
            << tr.stop_reason << ")\n";
  return code;
}

int cmd_spectrum(const Common& c, const std::vector<double>& radii, int n_eigs) {
  RunConfig rc = resolve(c);
  auto g = DiscGrid::make(rc.nr, rc.nt);
  std::ostringstream os;
  os << "R,index,eigenvalue,mode\n";
  for (double R : radii) {
    SteklovSpectrum sp = steklov_spectrum(g, R, n_eigs);
    for (int i = 0; i < int(sp.eigenvalues.size()); ++i) os << fmt(R) << ',' << i << ',' << fmt(sp.eigenvalues[i]) << ',' << sp.modes[i] << "\n";
  }
  if (c.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(c.out);
    if (!f) throw IoError("cannot write " + c.out);
    f << os.str();
  }
  return 0;
}

int cmd_shadow(const Common& c, const std::string& dir, double C1, double C2) {
  const Json info = read_json(fs::path(dir) / "run.json");
  std::istringstream text(info.at("config").get<std::string>());
  RunConfig rc = parse_config(text, dir + "/run.json");
  auto g = DiscGrid::make(rc.nr, rc.nt);
  ProblemData data = make_data(rc, g);
  auto stored = load_snapshots(dir, g);
  if (stored.empty()) throw IoError("no snapshots in " + dir);
  const MobiusMap frame = stored.front().frame;
  ProblemData fdata = data.pulled_back(frame);
  std::vector<Snapshot> snaps;
  for (auto& s : stored) snaps.push_back(s.snap);
  double R = rc.normalization_R;
  if (R == 0.0) {
    const Complex target = frame.raw(0.0);
    R = std::abs(target) > 0.0 ? std::min(1.0, scaling_radius(data.f_at(target / std::abs(target)), data.j_at(target / std::abs(target))))
                               : default_normalization_radius(fdata);
  }
  CenterTrack tr = track_centers(snaps, data, R, frame, &fdata);
  if (C1 == 0.0) {
    try {
      ShadowConstants k = calibrate_shadow({tr});
      C1 = k.C1;
      C2 = k.C2;
    } catch (const PreconditionError&) {
      C1 = C2 = 0.0;
    }
  }
  std::ostringstream os;
  os << "t,a_re,a_im,epsilon,xi_1,xi_2,predicted_da_dt,measured_da_dt\n";
  const auto& s = tr.samples;
  for (size_t i = 0; i < s.size(); ++i) {
    const Vec2 gr = rotate(s[i].gradJ, -s[i].phi);
    const double pred = -s[i].epsilon * s[i].epsilon * C1 * gr(0);
    std::string meas;
    if (i > 0 && i + 1 < s.size()) meas = fmt((std::abs(s[i + 1].a) - std::abs(s[i - 1].a)) / (s[i + 1].t - s[i - 1].t));
    os << fmt(s[i].t) << ',' << fmt(s[i].a.real()) << ',' << fmt(s[i].a.imag()) << ',' << fmt(s[i].epsilon) << ',' << fmt(s[i].Xi(0))
       << ',' << fmt(s[i].Xi(1)) << ',' << fmt(pred) << ',' << meas << "\n";
  }
  const std::string out = c.out.empty() ? (fs::path(dir) / "shadow.csv").string() : c.out;
  std::ofstream f(out);
  if (!f) throw IoError("cannot write " + out);
  f << os.str();
  std::cout << "tracked " << s.size() << " snapshots (" << tr.gaps << " gaps" << (tr.hit_resolution_floor ? ", stopped at resolution floor" : "")
            << "), C1 = " << fmt(C1) << ", C2 = " << fmt(C2) << ", wrote " << out << "\n";
  return 0;
}

int cmd_check(const Common& c) {
  RunConfig rc = resolve(c);
  const auto t0 = std::chrono::steady_clock::now();
  auto results = run_identity_suite(rc.nr, rc.nt, rc.seed);
  bool all = true;
  std::printf("%-22s %-6s %-12s %-10s %s\n", "check", "result", "worst", "tol", "note");
  for (const auto& r : results) {
    std::printf("%-22s %-6s %-12.3e %-10.1e %s\n", r.name.c_str(), r.passed ? "pass" : "FAIL", r.worst, r.tol, r.note.c_str());
    all = all && r.passed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s in %.1f s\n", all ? "all passed" : "FAILURES", secs);
  return all ? 0 : 1;
}

struct SweepResult {
  Complex a;
  std::string classifier = "error";
  Complex z_a;
  double F = 0.0;
  double epsilon = 0.0;
  std::string error;
};

int cmd_sweep(const Common& c, int threads) {
  RunConfig rc = resolve(c);
  auto g = DiscGrid::make(rc.nr, rc.nt);
  ProblemData data = make_data(rc, g);
  const int n = rc.sweep_n;
  std::vector<SweepResult> res(size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double h = n > 1 ? 2 * rc.sweep_extent / (n - 1) : 0.0;
      res[size_t(i) * n + k].a = Complex(-rc.sweep_extent + h * k, -rc.sweep_extent + h * i);
    }
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t idx; (idx = next++) < res.size();) {
      auto& r = res[idx];
      try {
        FrameSetup fs = concentrated_frame(r.a, data);
        RunOptions o;
        o.frame = fs.frame;
        o.track_center = true;
        o.normalization_R = fs.R;
        Trajectory tr = run(fs.state, fs.data, rc.flow, o);
        const auto& last = tr.records.back();
        r.classifier = to_string(last.classifier);
        r.F = last.F;
        if (last.a) {
          r.z_a = std::abs(*last.a) > 0 ? *last.a / std::abs(*last.a) : Complex(0, 0);
          r.epsilon = *last.epsilon;
        }
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int nt = std::max(1, threads > 0 ? threads : int(std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream os;
  os << "a_re,a_im,classifier,z_a_re,z_a_im,F,epsilon,error\n";
  int converged = 0;
  for (const auto& r : res) {
    os << fmt(r.a.real()) << ',' << fmt(r.a.imag()) << ',' << r.classifier << ',' << fmt(r.z_a.real()) << ',' << fmt(r.z_a.imag()) << ','
       << fmt(r.F) << ',' << fmt(r.epsilon) << ',' << '"' << r.error << '"' << "\n";
    converged += r.classifier == "converged";
  }
  fs::create_directories(rc.out_dir);
  const fs::path out = fs::path(rc.out_dir) / "sweep.csv";
  std::ofstream f(out);
  if (!f) throw IoError("cannot write " + out.string());
  f << os.str();
  std::cout << converged << " of " << res.size() << " runs converged, wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed curvature flow on the unit disc"};
  app.require_subcommand(1);

  Common c_run, c_steady, c_spec, c_shadow, c_check, c_sweep;
  auto* run_cmd = app.add_subcommand("run", "integrate and write a trajectory directory");
  add_common(run_cmd, c_run, false);
  auto* steady_cmd = app.add_subcommand("steady", "run to rest and write the extracted solution");
  add_common(steady_cmd, c_steady, false);

  auto* spec_cmd = app.add_subcommand("spectrum", "Steklov eigenvalues on caps");
  add_common(spec_cmd, c_spec, false);
  std::vector<double> radii{0.3, 0.5, 1 / std::sqrt(3.0), 0.8};
  int n_eigs = 6;
  spec_cmd->add_option("--R", radii, "cap radii")->capture_default_str();
  spec_cmd->add_option("--n-eigs", n_eigs, "eigenvalues per radius")->capture_default_str();

  auto* shadow_cmd = app.add_subcommand("shadow", "center tracking of a trajectory directory");
  add_common(shadow_cmd, c_shadow, false);
  std::string traj;
  double C1 = 0.0, C2 = 0.0;
  shadow_cmd->add_option("trajectory", traj, "trajectory directory")->required()->check(CLI::ExistingDirectory);
  shadow_cmd->add_option("--C1", C1, "normal shadow constant (0: calibrate on this track)");
  shadow_cmd->add_option("--C2", C2, "tangential shadow constant");

  auto* check_cmd = app.add_subcommand("check", "identity suites");
  add_common(check_cmd, c_check, false);

  auto* sweep_cmd = app.add_subcommand("sweep", "concentrated runs over a lattice of centers");
  add_common(sweep_cmd, c_sweep, false);
  int threads = 0;
  sweep_cmd->add_option("--threads", threads, "worker threads (0: all cores)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(c_run, false);
    if (*steady_cmd) return cmd_run(c_steady, true);
    if (*spec_cmd) return cmd_spectrum(c_spec, radii, n_eigs);
    if (*shadow_cmd) return cmd_shadow(c_shadow, traj, C1, C2 == 0.0 ? C1 : C2);
    if (*check_cmd) return cmd_check(c_check);
    if (*sweep_cmd) return cmd_sweep(c_sweep, threads);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
