#pragma once

// Identity suites shared by the `check` subcommand and the acceptance run.
// Each returns the worst deviation seen and whether it met its tolerance.

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pcflow/cap.hpp"
#include "pcflow/model.hpp"
#include "pcflow/random_fields.hpp"

namespace pcflow {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double tol = 0.0;
  std::string note;
};

// |int K dmu + int k ds - 2 pi| over random band-limited u
inline CheckResult check_gauss_bonnet(GridPtr g, unsigned long long seed, int samples = 50) {
  std::mt19937_64 rng(seed);
  CheckResult r{"gauss_bonnet", false, 0.0, 1e-8, std::to_string(samples) + " random metrics"};
  for (int t = 0; t < samples; ++t) r.worst = std::max(r.worst, std::abs(gauss_bonnet_residual(random_bandlimited(g, rng))));
  r.passed = r.worst < r.tol;
  return r;
}

// random conformal factors over caps at three radii; e^{2u} of the random
// metrics needs at least 128 angles
inline CheckResult check_kazdan_warner(int nr, int nt, unsigned long long seed, int samples = 20) {
  auto g = DiscGrid::make(nr, std::max(nt, 128));
  std::mt19937_64 rng(seed);
  CheckResult r{"kazdan_warner", false, 0.0, 1e-6, ""};
  for (double R : {0.4, 1 / std::sqrt(3.0), 0.7}) {
    for (int t = 0; t < samples; ++t) r.worst = std::max(r.worst, kazdan_warner_residual(random_bandlimited(g, rng), R).norm());
  }
  r.note = std::to_string(3 * samples) + " metrics at " + std::to_string(g->n_r()) + "x" + std::to_string(g->n_theta());
  r.passed = r.worst < r.tol;
  return r;
}

// deficit >= -1e-9 on random u, |deficit| < 1e-9 on Moebius factors
inline CheckResult check_lebedev_milin(GridPtr g, unsigned long long seed, int samples = 100) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CheckResult r{"lebedev_milin", false, 0.0, 1e-9, ""};
  double most_negative = 0.0, equality = 0.0;
  for (int t = 0; t < samples; ++t) most_negative = std::min(most_negative, lebedev_milin_deficit(random_bandlimited(g, rng)));
  for (int t = 0; t < 5; ++t) {
    const MobiusMap phi(std::polar(0.6 * std::sqrt(U(rng)), 2 * std::numbers::pi * U(rng)));
    equality = std::max(equality, std::abs(lebedev_milin_deficit(log_abs_derivative_field(g, phi))));
  }
  r.worst = std::max(-most_negative, equality);
  char buf[96];
  std::snprintf(buf, sizeof buf, "min deficit %.3e, equality defect %.3e", most_negative, equality);
  r.note = buf;
  r.passed = most_negative >= -1e-9 && equality < 1e-9;
  return r;
}

// energy and mass under pullback by random Moebius maps; |a| up to 0.5
// compresses boundary arcs threefold, so the angles are raised to 256
inline CheckResult check_conformal_invariance(int nr, int nt, unsigned long long seed, int samples = 10) {
  auto g = DiscGrid::make(nr, std::max(nt, 256));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto d = ProblemData::from_functions(
      g, [](double x, double y) { return 1.2 + 0.3 * x - 0.2 * y * y; }, [](double x, double y) { return 0.8 + 0.25 * x * y + 0.1 * y; });
  CheckResult r{"conformal_invariance", false, 0.0, 1e-8, ""};
  for (int t = 0; t < samples; ++t) {
    const DiscField u = random_bandlimited(g, rng);
    const MobiusMap phi(std::polar(0.5 * std::sqrt(U(rng)), 2 * std::numbers::pi * U(rng)));
    const double rho = 0.3 + 2.5 * U(rng);
    const FlowState s{u, rho, 0.0};
    const FlowState sv{pullback_conformal_factor(u, phi), rho, 0.0};
    r.worst = std::max({r.worst, std::abs(energy(s, d) - energy(sv, d.pulled_back(phi))), std::abs(mass(u) - mass(sv.u))});
  }
  r.note = std::to_string(samples) + " pairs at " + std::to_string(g->n_r()) + "x" + std::to_string(g->n_theta());
  r.passed = r.worst < r.tol;
  return r;
}

inline std::vector<CheckResult> run_identity_suite(int nr, int nt, unsigned long long seed) {
  auto g = DiscGrid::make(nr, nt);
  return {check_gauss_bonnet(g, seed), check_kazdan_warner(nr, nt, seed), check_lebedev_milin(g, seed),
          check_conformal_invariance(nr, nt, seed)};
}

}  // namespace pcflow
