#pragma once

// Scalar monitors per recorded state and the converged / concentrating
// classifier. Rows are written as CSV with 17 significant digits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcflow/flow.hpp"
#include "pcflow/model.hpp"

namespace pcflow {

enum class Classification { converged, concentrating, undecided };

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::converged: return "converged";
    case Classification::concentrating: return "concentrating";
    default: return "undecided";
  }
}

inline Classification parse_classification(const std::string& s) {
  if (s == "converged") return Classification::converged;
  if (s == "concentrating") return Classification::concentrating;
  if (s == "undecided") return Classification::undecided;
  throw IoError("unknown classifier state '" + s + "'");
}

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double m0 = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double F = 0.0;
  double G = 0.0;
  double gauss_bonnet_residual = 0.0;
  double min_K_minus_alpha_f = 0.0;
  double compat_defect = 0.0;
  std::optional<Complex> a;
  std::optional<double> epsilon;
  std::optional<double> boundary_mass_fraction;
  Classification classifier = Classification::undecided;
};

// F from rates already evaluated at the state
inline double deviation_F(const FlowState& s, const Rates& r) {
  return integrate_disc(r.interior * r.interior * s.u.exp(2)) +
         integrate_boundary(r.boundary * r.boundary * s.u.boundary().exp()) + r.drho_dt * r.drho_dt;
}

inline double deviation_F(const FlowState& s, const ProblemData& d) { return deviation_F(s, rhs(s, d)); }

// Dirichlet energy of K - alpha f
inline double deviation_G(const FlowState& s, const ProblemData& d) {
  auto [a, b] = multipliers(s, d);
  (void)b;
  return dirichlet_integral(gauss_curvature(s.u) - a * d.f());
}

inline double curvature_floor_monitor(const FlowState& s, const ProblemData& d) {
  auto [a, b] = multipliers(s, d);
  (void)b;
  return (gauss_curvature(s.u) - a * d.f()).min();
}

// max over the boundary of |(alpha f - K) - (beta j - k)|
inline double compat_defect(const Rates& r) {
  return (r.interior.boundary() - r.boundary).max_abs();
}

// Admissible floor for inf(K - alpha f): the more negative of
//   -2(|K0| + alpha1 |f| + beta1 |j|)  and  the root condition kappa^2 - C + 2 m0 C kappa > 0,
// with alpha1, beta1, C1, C2 measured at the initial state.
inline double curvature_floor_kappa(const FlowState& s0, const ProblemData& d) {
  Rates r = rhs(s0, d);
  const double fmax = d.f().max_abs(), jmax = d.j().max_abs();
  const double pi = std::numbers::pi;
  const double m0 = mass(s0.u);
  const double c1 = std::max(r.alpha * std::abs(r.drho_dt) / s0.rho * fmax, r.alpha * r.alpha / s0.rho * fmax * fmax);
  const double c2 = std::max(2.0 * r.beta * std::abs(r.drho_dt) / (pi - s0.rho) * jmax, r.beta * r.beta / (pi - s0.rho) * jmax * jmax);
  double kappa = -2.0 * (gauss_curvature(s0.u).max_abs() + r.alpha * fmax + r.beta * jmax);
  for (double c : {c1, c2}) kappa = std::min(kappa, -m0 * c - std::sqrt(m0 * m0 * c * c + c));
  return 1.01 * kappa;
}

inline DiagnosticsRecord make_record(const FlowState& s, const ProblemData& d, const Rates& r) {
  DiagnosticsRecord rec;
  rec.t = s.t;
  rec.E = energy(s, d);
  rec.m0 = mass(s.u);
  rec.rho = s.rho;
  rec.alpha = r.alpha;
  rec.beta = r.beta;
  rec.F = deviation_F(s, r);
  rec.G = dirichlet_integral(gauss_curvature(s.u) - r.alpha * d.f());
  rec.gauss_bonnet_residual = gauss_bonnet_residual(s.u);
  rec.min_K_minus_alpha_f = -r.interior.max();
  rec.compat_defect = compat_defect(r);
  return rec;
}

struct ClassifierOptions {
  double steady_tol = 1e-6;
  double concentration_F = 1e-2;
  double mass_fraction = 0.9;
  int min_records = 10;
};

// Looks at the second half of the records (at least min_records of them).
inline Classification classify(const std::vector<DiagnosticsRecord>& recs, const ClassifierOptions& opt = {}) {
  if (int(recs.size()) < opt.min_records) return Classification::undecided;
  const size_t begin = std::min(recs.size() - opt.min_records, recs.size() / 2);
  const auto& last = recs.back();
  double eps_max = 0.0;
  for (size_t i = begin; i < recs.size(); ++i) {
    if (recs[i].epsilon) eps_max = std::max(eps_max, *recs[i].epsilon);
  }
  // bounded away from 0: not shrinking over the tail
  const bool eps_bounded = !last.epsilon || (*last.epsilon > 0.0 && *last.epsilon >= 0.5 * eps_max);
  if (last.F < opt.steady_tol && eps_bounded) return Classification::converged;
  const auto& first = recs[begin];
  if (last.F < opt.concentration_F && first.epsilon && last.epsilon && *first.epsilon >= 2.0 * *last.epsilon &&
      last.boundary_mass_fraction && *last.boundary_mass_fraction > opt.mass_fraction) {
    return Classification::concentrating;
  }
  return Classification::undecided;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"t",     "E",     "m0",   "rho",  "alpha",
                                             "beta",  "F",     "G",    "gauss_bonnet_residual",
                                             "min_K_minus_alpha_f", "compat_defect", "a_re", "a_im",
                                             "epsilon", "boundary_mass_fraction", "classifier"};
  return cols;
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv_header(std::ostream& os) {
  const auto& c = csv_columns();
  for (size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << "\n";
}

inline void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  os << format_double(r.t) << ',' << format_double(r.E) << ',' << format_double(r.m0) << ',' << format_double(r.rho) << ','
     << format_double(r.alpha) << ',' << format_double(r.beta) << ',' << format_double(r.F) << ',' << format_double(r.G) << ','
     << format_double(r.gauss_bonnet_residual) << ',' << format_double(r.min_K_minus_alpha_f) << ','
     << format_double(r.compat_defect) << ',' << opt(r.a ? std::optional<double>(r.a->real()) : std::nullopt) << ','
     << opt(r.a ? std::optional<double>(r.a->imag()) : std::nullopt) << ',' << opt(r.epsilon) << ','
     << opt(r.boundary_mass_fraction) << ',' << to_string(r.classifier) << "\n";
}

inline void write_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& recs) {
  write_csv_header(os);
  for (const auto& r : recs) write_csv_row(os, r);
}

inline std::vector<DiagnosticsRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty diagnostics CSV");
  {
    std::ostringstream h;
    write_csv_header(h);
    if (line + "\n" != h.str()) throw IoError("diagnostics CSV header does not match the expected columns");
  }
  std::vector<DiagnosticsRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != csv_columns().size()) throw IoError("line " + std::to_string(lineno) + ": wrong number of cells");
    auto num = [&](int i) {
      try {
        return std::stod(cells[i]);
      } catch (const std::exception&) {
        throw IoError("line " + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
      }
    };
    auto opt = [&](int i) { return cells[i].empty() ? std::optional<double>() : std::optional<double>(num(i)); };
    DiagnosticsRecord r;
    r.t = num(0);
    r.E = num(1);
    r.m0 = num(2);
    r.rho = num(3);
    r.alpha = num(4);
    r.beta = num(5);
    r.F = num(6);
    r.G = num(7);
    r.gauss_bonnet_residual = num(8);
    r.min_K_minus_alpha_f = num(9);
    r.compat_defect = num(10);
    if (!cells[11].empty()) r.a = Complex(num(11), num(12));
    r.epsilon = opt(13);
    r.boundary_mass_fraction = opt(14);
    r.classifier = parse_classification(cells[15]);
    out.push_back(r);
  }
  return out;
}

}  // namespace pcflow
