#pragma once

// Persistence. Fields are JSON objects {n_r, n_theta, values} with values in
// row-major order (row 0 is the boundary). Doubles are written in shortest
// round-trip form, so a reloaded snapshot is bit-identical.
//
// A trajectory directory holds
//   diagnostics.csv          one row per record
//   snapshots/NNNNNN.json    state, stepper history and frame
//   run.json                 configuration and run summary

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcflow/conformal.hpp"
#include "pcflow/diagnostics.hpp"
#include "pcflow/run.hpp"

namespace pcflow {

using Json = nlohmann::json;

inline Json field_to_json(const DiscField& u) {
  if (!u.grid()) return nullptr;
  const auto& v = u.values();
  std::vector<double> flat;
  flat.reserve(v.size());
  for (int i = 0; i < v.rows(); ++i) {
    for (int k = 0; k < v.cols(); ++k) flat.push_back(v(i, k));
  }
  return {{"n_r", v.rows()}, {"n_theta", v.cols()}, {"values", flat}};
}

inline DiscField field_from_json(const Json& j, GridPtr g) {
  if (j.is_null()) return DiscField();
  try {
    const int nr = j.at("n_r").get<int>(), nt = j.at("n_theta").get<int>();
    if (!g) g = DiscGrid::make(nr, nt);
    if (nr != g->n_r() || nt != g->n_theta()) {
      throw DimensionError("stored field is " + std::to_string(nr) + " x " + std::to_string(nt) + ", grid is " +
                           std::to_string(g->n_r()) + " x " + std::to_string(g->n_theta()));
    }
    const auto flat = j.at("values").get<std::vector<double>>();
    if (flat.size() != size_t(nr) * nt) throw IoError("field has " + std::to_string(flat.size()) + " values, expected n_r * n_theta");
    Eigen::MatrixXd v(nr, nt);
    for (int i = 0; i < nr; ++i) {
      for (int k = 0; k < nt; ++k) v(i, k) = flat[size_t(i) * nt + k];
    }
    return DiscField(g, std::move(v));
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed field: ") + e.what());
  }
}

inline Json history_to_json(const StepperHistory& h) {
  return {{"steps", h.steps},         {"dt_prev", h.dt_prev},
          {"dt_nominal", h.dt_nominal}, {"has_prev", h.has_prev},
          {"u_prev", field_to_json(h.u_prev)}, {"rate_prev", field_to_json(h.rate_prev)},
          {"rho_prev", h.rho_prev},   {"rho_rate_prev", h.rho_rate_prev},
          {"guard_set", h.guard_set}, {"t0", h.t0},
          {"u0_sup", h.u0_sup},       {"growth_rate", h.growth_rate}};
}

inline StepperHistory history_from_json(const Json& j, GridPtr g) {
  try {
    StepperHistory h;
    h.steps = j.at("steps").get<long>();
    h.dt_prev = j.at("dt_prev").get<double>();
    h.dt_nominal = j.at("dt_nominal").get<double>();
    h.has_prev = j.at("has_prev").get<bool>();
    h.u_prev = field_from_json(j.at("u_prev"), g);
    h.rate_prev = field_from_json(j.at("rate_prev"), g);
    h.rho_prev = j.at("rho_prev").get<double>();
    h.rho_rate_prev = j.at("rho_rate_prev").get<double>();
    h.guard_set = j.at("guard_set").get<bool>();
    h.t0 = j.at("t0").get<double>();
    h.u0_sup = j.at("u0_sup").get<double>();
    h.growth_rate = j.at("growth_rate").get<double>();
    if (h.has_prev && (!h.u_prev.grid() || !h.rate_prev.grid())) throw IoError("history claims a previous step but stores none");
    return h;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed stepper history: ") + e.what());
  }
}

struct StoredSnapshot {
  Snapshot snap;
  MobiusMap frame;
};

inline Json snapshot_to_json(const Snapshot& s, const MobiusMap& frame = MobiusMap()) {
  return {{"format", "pcflow-snapshot"},
          {"version", 1},
          {"t", s.state.t},
          {"rho", s.state.rho},
          {"u", field_to_json(s.state.u)},
          {"history", history_to_json(s.history)},
          {"frame", {{"a_re", frame.a().real()}, {"a_im", frame.a().imag()}, {"theta", frame.theta()}}}};
}

inline StoredSnapshot snapshot_from_json(const Json& j, GridPtr g = nullptr) {
  try {
    if (j.at("format") != "pcflow-snapshot") throw IoError("not a snapshot file");
    if (j.at("version").get<int>() != 1) throw IoError("unsupported snapshot version");
    StoredSnapshot out;
    out.snap.state.u = field_from_json(j.at("u"), g);
    out.snap.state.rho = j.at("rho").get<double>();
    out.snap.state.t = j.at("t").get<double>();
    out.snap.history = history_from_json(j.at("history"), out.snap.state.u.grid());
    const auto& f = j.at("frame");
    out.frame = MobiusMap(Complex(f.at("a_re").get<double>(), f.at("a_im").get<double>()), f.at("theta").get<double>());
    return out;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed snapshot: ") + e.what());
  }
}

inline void write_json(const std::filesystem::path& p, const Json& j) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("write failed for " + p.string());
}

inline Json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(p.string() + ": " + e.what());
  }
}

inline void save_snapshot(const std::filesystem::path& p, const Snapshot& s, const MobiusMap& frame = MobiusMap()) {
  write_json(p, snapshot_to_json(s, frame));
}

inline StoredSnapshot load_snapshot(const std::filesystem::path& p, GridPtr g = nullptr) {
  try {
    return snapshot_from_json(read_json(p), g);
  } catch (const IoError& e) {
    throw IoError(p.string() + ": " + e.what());
  }
}

inline std::string snapshot_name(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.json", index);
  return buf;
}

// Writes diagnostics.csv, snapshots/ and run.json (with the given extra entries).
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr, const MobiusMap& frame, const Json& extra) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "snapshots");
  for (const auto& old : fs::directory_iterator(dir / "snapshots")) fs::remove(old.path());
  {
    std::ofstream csv(dir / "diagnostics.csv");
    if (!csv) throw IoError("cannot write " + (dir / "diagnostics.csv").string());
    write_csv(csv, tr.records);
  }
  for (size_t i = 0; i < tr.snapshots.size(); ++i) save_snapshot(dir / "snapshots" / snapshot_name(i), tr.snapshots[i], frame);
  Json summary = extra;
  summary["stop_reason"] = tr.stop_reason;
  summary["steps"] = tr.steps;
  summary["t_final"] = tr.final_state.t;
  summary["snapshots"] = tr.snapshots.size();
  summary["max_mass_drift"] = tr.max_mass_drift;
  summary["max_energy_increase"] = tr.max_energy_increase;
  summary["dissipation_integral"] = tr.dissipation_integral;
  summary["rho_range"] = {tr.rho_min, tr.rho_max};
  summary["multiplier_range"] = {tr.mult_min, tr.mult_max};
  summary["frame"] = {{"a_re", frame.a().real()}, {"a_im", frame.a().imag()}, {"theta", frame.theta()}};
  write_json(dir / "run.json", summary);
}

// Snapshots of a trajectory directory in file order.
inline std::vector<StoredSnapshot> load_snapshots(const std::filesystem::path& dir, GridPtr g = nullptr) {
  namespace fs = std::filesystem;
  const fs::path sd = dir / "snapshots";
  if (!fs::is_directory(sd)) throw IoError("no snapshots directory in " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(sd)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<StoredSnapshot> out;
  for (const auto& f : files) {
    out.push_back(load_snapshot(f, g));
    if (!g) g = out.back().snap.state.u.grid();
  }
  return out;
}

}  // namespace pcflow
