#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcflow/cap.hpp"
#include "pcflow/normalize.hpp"
#include "pcflow/run.hpp"

using namespace pcflow;
constexpr double kPi = std::numbers::pi;

TEST(CenterOfMass, SymmetricExamples) {
  auto g = DiscGrid::make(32, 64);
  for (double R : {0.3, 0.5, 1 / std::sqrt(3.0), 1.0}) {
    EXPECT_LT(center_of_mass_residual(cap_profile(g, R), R).norm(), 1e-8) << R;
  }
  EXPECT_LT(center_of_mass_residual(DiscField::constant(g, 0.0), 0.5).norm(), 1e-12);
  Vec2 r = center_of_mass_residual(pullback_conformal_factor(DiscField::constant(g, 0.0), MobiusMap(Complex(0.4, 0))), 0.5);
  EXPECT_GT(std::abs(r(0)), 1e-2);
  EXPECT_LT(std::abs(r(1)), 1e-12);
  EXPECT_THROW(center_of_mass_residual(DiscField::constant(g, 0.0), 1.5), DomainError);
}

TEST(CenterOfMass, TransportedMatchesPullback) {
  auto g = DiscGrid::make(32, 128);
  DiscField u = DiscField::from_polar(g, [](double r, double t) { return 0.3 * r * std::cos(t) + 0.1 * r * r * std::sin(2 * t); });
  const MobiusMap phi(Complex(0.3, -0.2));
  const Vec2 a = transported_residual(u, 0.6, phi);
  const Vec2 b = center_of_mass_residual(pullback_conformal_factor(u, phi), 0.6);
  EXPECT_LT((a - b).norm(), 1e-8);
}

TEST(Normalize, IdentityForFlatDisc) {
  auto g = DiscGrid::make(32, 64);
  Normalization n = normalize(DiscField::constant(g, 0.0), 0.5);
  EXPECT_EQ(n.iterations, 0);
  EXPECT_LT(std::abs(n.phi.a()), 1e-14);
  EXPECT_LT(n.residual.norm(), 1e-9);
}

TEST(Normalize, RoundTripTranslatedCap) {
  auto g = DiscGrid::make(32, 64);
  const double R = 1 / std::sqrt(3.0);
  DiscField cap = cap_profile(g, R);
  const Complex a0(0.5, 0.0);
  DiscField u = pullback_conformal_factor(cap, MobiusMap(a0));
  Normalization n = normalize(u, R);
  EXPECT_LT(n.residual.norm(), 1e-9);
  EXPECT_LT(std::abs(n.phi.a() + a0), 1e-7);
  EXPECT_LT((n.v - cap).max_abs(), 1e-7);
  EXPECT_FALSE(n.near_degenerate);
}

// |a| up to 0.7 puts a bump of width ~0.2 on the boundary: 128 angles resolve it.
TEST(Normalize, RoundTripRandomMaps) {
  auto g = DiscGrid::make(32, 128);
  const double R = 0.6;
  DiscField cap = cap_profile(g, R);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> rad(0.0, 0.7), ang(0.0, 2 * kPi);
  for (int i = 0; i < 10; ++i) {
    const MobiusMap phi(std::polar(rad(rng), ang(rng)));
    DiscField u = pullback_conformal_factor(cap, phi);
    Normalization n = normalize(u, R);
    EXPECT_LT(n.residual.norm(), 1e-9) << i;
    EXPECT_LT((n.v - cap).max_abs(), 1e-7) << i;
  }
}

TEST(Normalize, StallCarriesBestIterate) {
  auto g = DiscGrid::make(32, 128);
  DiscField u = pullback_conformal_factor(cap_profile(g, 0.6), MobiusMap(Complex(0.8, 0)));
  NormalizeOptions opt;
  opt.a_max = 0.3;
  try {
    normalize(u, 0.6, MobiusMap(), opt);
    FAIL() << "expected a convergence error";
  } catch (const NormalizationError& e) {
    EXPECT_TRUE(e.best().near_degenerate);
    EXPECT_NEAR(std::abs(e.best().phi.a()), 0.3, 1e-12);
    EXPECT_GT(e.best().residual.norm(), 1e-9);
  }
}

TEST(Normalize, WarmStartAlongFlow) {
  auto g = DiscGrid::make(32, 64);
  const double R = 1 / std::sqrt(3.0);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(R).k_R);
  DiscField u = cap_profile(g, R) + DiscField::from_polar(g, [](double r, double t) { return 0.2 * r * std::cos(t); });
  FlowConfig cfg;
  cfg.t_end = 0.5;
  cfg.record_every = 5;
  RunOptions opt;
  opt.track_center = true;
  opt.normalization_R = R;
  Trajectory tr = run({u, CapGeometry(R).rest_rho(), 0.0}, d, cfg, opt);
  ASSERT_GT(tr.records.size(), 5u);
  for (size_t i = 1; i < tr.records.size(); ++i) {
    ASSERT_TRUE(tr.records[i].a && tr.records[i - 1].a);
    const double dt = tr.records[i].t - tr.records[i - 1].t;
    // the center moves no faster than the curvature deviation allows
    const double speed = std::sqrt(std::max(tr.records[i].F, tr.records[i - 1].F));
    EXPECT_LT(std::abs(*tr.records[i].a - *tr.records[i - 1].a), 2 * speed * dt + 1e-10) << i;
  }
}

TEST(DriftBound, Examples) {
  auto g = DiscGrid::make(32, 64);
  auto d = ProblemData::constant(g, 1.0, 1.0);
  EXPECT_NEAR(drift_speed_bound({DiscField::constant(g, 0.0), kPi / 2, 0.0}, d), std::sqrt(1.5 * kPi), 1e-12);
  const double R = 1 / std::sqrt(3.0);
  auto dc = ProblemData::constant(g, 1.0, CapGeometry(R).k_R);
  EXPECT_LT(drift_speed_bound({cap_profile(g, R), CapGeometry(R).rest_rho(), 0.0}, dc), 1e-6);
}

TEST(DriftBound, DecreasesAlongConvergentRun) {
  auto g = DiscGrid::make(32, 64);
  const double R = 1 / std::sqrt(3.0);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(R).k_R);
  DiscField u = cap_profile(g, R) + DiscField::from_polar(g, [](double r, double t) { return 0.05 * r * std::cos(t); });
  FlowConfig cfg;
  cfg.t_end = 2.0;
  cfg.snapshot_every = 20;
  Trajectory tr = run({u, CapGeometry(R).rest_rho(), 0.0}, d, cfg);
  double prev = 1e300;
  for (const auto& sn : tr.snapshots) {
    const double b = drift_speed_bound(sn.state, d);
    EXPECT_LE(b, prev * (1 + 1e-9));
    prev = b;
  }
}

TEST(DefaultRadius, MidpointOfBoundaryRange) {
  auto g = DiscGrid::make(16, 32);
  auto d = ProblemData::constant(g, 3.0, 1.0);
  EXPECT_NEAR(default_normalization_radius(d), 1 / std::sqrt(3.0), 1e-14);
  auto d2 = ProblemData::from_functions(g, [](double, double) { return 1.0; }, [](double x, double) { return 1 + 0.5 * x; });
  const double lo = scaling_radius(1.0, 1.5), hi = scaling_radius(1.0, 0.5);
  EXPECT_NEAR(default_normalization_radius(d2), 0.5 * (lo + hi), 1e-12);
}
