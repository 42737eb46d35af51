#pragma once

// Run configuration: a sectioned key = value text file.
//
//   [grid]     nr, nt
//   [data]     f, j                  expressions in x y r theta
//   [initial]  type = zero | cap | concentrated | snapshot
//              R, scale, a_re, a_im, rho, perturb, path
//   [flow]     the FlowConfig fields, scheme by name; stop_tol is the F
//              threshold at which `steady` stops (default steady_tol)
//   [output]   dir
//   [run]      seed, track_center, normalization_R, frame,
//              sweep_n, sweep_extent
//
// '#' and ';' start comments. Every error names the line.

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "pcflow/expression.hpp"
#include "pcflow/flow.hpp"
#include "pcflow/model.hpp"

namespace pcflow {

struct InitialSpec {
  std::string type = "zero";
  double R = 1.0 / std::sqrt(3.0);
  double scale = 1.0;
  double a_re = 0.0, a_im = 0.0;
  double rho = 0.0;  // 0: pick from the type (pi/2, cap rest value, balanced)
  std::string perturb = "0";
  std::string path;
};

struct RunConfig {
  int nr = 32, nt = 64;
  std::string f = "1";
  std::string j = "1";
  InitialSpec initial;
  FlowConfig flow;
  std::string out_dir = "out";
  unsigned long long seed = 42;
  bool track_center = false;
  double normalization_R = 0.0;
  bool frame = false;  // concentrated runs in the Moebius frame of a
  int sweep_n = 8;
  double sweep_extent = 0.7;

  void validate() const {
    if (nr < 8 || nt < 8 || nt % 2 != 0) throw ConfigError("grid needs nr >= 8 and even nt >= 8");
    flow.validate();
    (void)Expression::parse(f);
    (void)Expression::parse(j);
    (void)Expression::parse(initial.perturb);
    const auto& t = initial.type;
    if (t != "zero" && t != "cap" && t != "concentrated" && t != "snapshot") {
      throw ConfigError("initial.type must be zero, cap, concentrated or snapshot (got '" + t + "')");
    }
    if (t == "cap" && !(initial.R > 0.0 && initial.R <= 1.0)) throw ConfigError("initial.R must lie in (0, 1]");
    if (t == "cap" && !(initial.scale > 0.0)) throw ConfigError("initial.scale must be positive");
    if (t == "concentrated" && !(std::hypot(initial.a_re, initial.a_im) < 1.0)) throw ConfigError("concentrated needs |a| < 1");
    if (t == "snapshot" && initial.path.empty()) throw ConfigError("initial.path is required for snapshot starts");
    if (!(initial.rho == 0.0 || (initial.rho > 0.0 && initial.rho < std::numbers::pi))) {
      throw ConfigError("initial.rho must be 0 (automatic) or lie in (0, pi)");
    }
    if (frame && t != "concentrated") throw ConfigError("run.frame applies only to concentrated starts");
    if (normalization_R < 0.0 || normalization_R > 1.0) throw ConfigError("run.normalization_R must lie in [0, 1]");
    if (sweep_n < 1) throw ConfigError("run.sweep_n must be >= 1");
    if (!(sweep_extent >= 0.0 && sweep_extent < 1.0 / std::sqrt(2.0))) {
      throw ConfigError("run.sweep_extent must lie in [0, 1/sqrt(2)) so the lattice stays in the disc");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is, const std::string& source = "config") {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  std::set<std::string> seen;
  auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };

  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known{"grid", "data", "initial", "flow", "output", "run"};
      if (!known.count(section)) throw ConfigError(where() + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
    if (section.empty()) throw ConfigError(where() + "key outside of any section");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw ConfigError(where() + "duplicate key " + full);

    auto num = [&]() {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(val, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != val.size() || !std::isfinite(v)) throw ConfigError(where() + full + ": expected a number, got '" + val + "'");
      return v;
    };
    auto integer = [&]() {
      const double v = num();
      if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(where() + full + ": expected an integer, got '" + val + "'");
      return static_cast<int>(v);
    };
    auto boolean = [&]() {
      if (val == "true" || val == "1" || val == "yes") return true;
      if (val == "false" || val == "0" || val == "no") return false;
      throw ConfigError(where() + full + ": expected true or false, got '" + val + "'");
    };
    auto expr = [&]() {
      try {
        (void)Expression::parse(val);
      } catch (const ConfigError& e) {
        throw ConfigError(where() + full + ": " + e.what());
      }
      return val;
    };

    bool ok = true;
    if (section == "grid") {
      if (key == "nr") c.nr = integer();
      else if (key == "nt") c.nt = integer();
      else ok = false;
    } else if (section == "data") {
      if (key == "f") c.f = expr();
      else if (key == "j") c.j = expr();
      else ok = false;
    } else if (section == "initial") {
      auto& in = c.initial;
      if (key == "type") in.type = val;
      else if (key == "R") in.R = num();
      else if (key == "scale") in.scale = num();
      else if (key == "a_re") in.a_re = num();
      else if (key == "a_im") in.a_im = num();
      else if (key == "rho") in.rho = num();
      else if (key == "perturb") in.perturb = expr();
      else if (key == "path") in.path = val;
      else ok = false;
    } else if (section == "flow") {
      auto& f = c.flow;
      if (key == "dt_init") f.dt_init = num();
      else if (key == "dt_max") f.dt_max = num();
      else if (key == "dt_growth") f.dt_growth = num();
      else if (key == "cfl_safety") f.cfl_safety = num();
      else if (key == "t_end") f.t_end = num();
      else if (key == "scheme") {
        try {
          f.scheme = parse_scheme(val);
        } catch (const ConfigError& e) {
          throw ConfigError(where() + e.what());
        }
      } else if (key == "steady_tol") f.steady_tol = num();
      else if (key == "stop_when_steady") f.stop_when_steady = boolean();
      else if (key == "stop_tol") f.stop_tol = num();
      else if (key == "record_every") f.record_every = integer();
      else if (key == "snapshot_every") f.snapshot_every = integer();
      else if (key == "rho_margin") f.rho_margin = num();
      else if (key == "multiplier_min") f.multiplier_min = num();
      else if (key == "multiplier_max") f.multiplier_max = num();
      else ok = false;
    } else if (section == "output") {
      if (key == "dir") c.out_dir = val;
      else ok = false;
    } else if (section == "run") {
      if (key == "seed") {
        const double v = num();
        if (v < 0 || v != std::floor(v)) throw ConfigError(where() + "run.seed must be a non-negative integer");
        c.seed = static_cast<unsigned long long>(v);
      } else if (key == "track_center") c.track_center = boolean();
      else if (key == "normalization_R") c.normalization_R = num();
      else if (key == "frame") c.frame = boolean();
      else if (key == "sweep_n") c.sweep_n = integer();
      else if (key == "sweep_extent") c.sweep_extent = num();
      else ok = false;
    }
    if (!ok) throw ConfigError(where() + "unknown key " + full);
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, path);
}

// Text form that parses back to the same configuration.
inline std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "[grid]\nnr = " << c.nr << "\nnt = " << c.nt << "\n\n";
  o << "[data]\nf = " << c.f << "\nj = " << c.j << "\n\n";
  o << "[initial]\ntype = " << c.initial.type << "\nR = " << c.initial.R << "\nscale = " << c.initial.scale
    << "\na_re = " << c.initial.a_re << "\na_im = " << c.initial.a_im << "\nrho = " << c.initial.rho
    << "\nperturb = " << c.initial.perturb << "\n";
  if (!c.initial.path.empty()) o << "path = " << c.initial.path << "\n";
  const auto& f = c.flow;
  o << "\n[flow]\ndt_init = " << f.dt_init << "\ndt_max = " << f.dt_max << "\ndt_growth = " << f.dt_growth
    << "\ncfl_safety = " << f.cfl_safety << "\nt_end = " << f.t_end << "\nscheme = " << to_string(f.scheme)
    << "\nsteady_tol = " << f.steady_tol << "\nstop_when_steady = " << (f.stop_when_steady ? "true" : "false")
    << "\nstop_tol = " << f.stop_tol << "\nrecord_every = " << f.record_every << "\nsnapshot_every = " << f.snapshot_every << "\nrho_margin = " << f.rho_margin
    << "\nmultiplier_min = " << f.multiplier_min << "\nmultiplier_max = " << f.multiplier_max << "\n\n";
  o << "[output]\ndir = " << c.out_dir << "\n\n";
  o << "[run]\nseed = " << c.seed << "\ntrack_center = " << (c.track_center ? "true" : "false")
    << "\nnormalization_R = " << c.normalization_R << "\nframe = " << (c.frame ? "true" : "false") << "\nsweep_n = " << c.sweep_n
    << "\nsweep_extent = " << c.sweep_extent << "\n";
  return o.str();
}

inline ProblemData make_data(const RunConfig& c, GridPtr g) {
  const Expression f = Expression::parse(c.f), j = Expression::parse(c.j);
  return ProblemData::from_functions(g, [f](double x, double y) { return f(x, y); }, [j](double x, double y) { return j(x, y); });
}

}  // namespace pcflow
