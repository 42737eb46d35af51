#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pcflow/cap.hpp"
#include "pcflow/diagnostics.hpp"
#include "pcflow/run.hpp"

using namespace pcflow;
constexpr double kPi = std::numbers::pi;

namespace {

const double kR = 1 / std::sqrt(3.0);

DiagnosticsRecord rec(double t, double F, std::optional<double> eps = std::nullopt, std::optional<double> frac = std::nullopt) {
  DiagnosticsRecord r;
  r.t = t;
  r.F = F;
  r.epsilon = eps;
  r.boundary_mass_fraction = frac;
  return r;
}

}  // namespace

TEST(DeviationF, FlatDiscExample) {
  auto g = DiscGrid::make(32, 64);
  auto d = ProblemData::constant(g, 1.0, 1.0);
  FlowState s{DiscField::constant(g, 0.0), kPi / 2, 0.0};
  EXPECT_NEAR(deviation_F(s, d), 1.5 * kPi + std::pow(std::log(4.0), 2), 1e-11);
  EXPECT_NEAR(curvature_floor_monitor(s, d), -1.0, 1e-12);
  EXPECT_LT(deviation_G(s, d), 1e-20);
}

TEST(DeviationF, RestPointVanishes) {
  auto g = DiscGrid::make(32, 64);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(kR).k_R);
  FlowState s{cap_profile(g, kR), CapGeometry(kR).rest_rho(), 0.0};
  EXPECT_LT(deviation_F(s, d), 1e-10);
  EXPECT_LT(deviation_G(s, d), 1e-10);
  EXPECT_NEAR(curvature_floor_monitor(s, d), 0.0, 1e-6);
}

TEST(DeviationG, RefinementStable) {
  auto d_of = [](GridPtr g) { return ProblemData::from_functions(g, [](double x, double) { return 1 + 0.3 * x; }, [](double, double) { return 1.0; }); };
  auto u_of = [](GridPtr g) { return DiscField::from_polar(g, [](double r, double t) { return 0.2 * r * std::cos(t) + 0.1 * r * r * std::sin(2 * t); }); };
  auto g1 = DiscGrid::make(16, 32), g2 = DiscGrid::make(32, 64);
  const double G1 = deviation_G({u_of(g1), 1.2, 0.0}, d_of(g1));
  const double G2 = deviation_G({u_of(g2), 1.2, 0.0}, d_of(g2));
  EXPECT_GT(G1, 0.0);
  EXPECT_LT(std::abs(G1 - G2) / G2, 1e-2);
}

TEST(CurvatureFloor, BoundaryRelationAlongFlow) {
  auto g = DiscGrid::make(32, 64);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(kR).k_R);
  DiscField u = cap_profile(g, kR) + DiscField::from_polar(g, [](double r, double t) { return 0.05 * r * r * std::cos(t); });
  FlowConfig cfg;
  cfg.t_end = 1.0;
  cfg.snapshot_every = 50;
  FlowState s0{u, CapGeometry(kR).rest_rho(), 0.0};
  const double kappa = curvature_floor_kappa(s0, d);
  EXPECT_LT(kappa, 0.0);
  Trajectory tr = run(s0, d, cfg);
  // once the initial boundary layer has relaxed the two boundary minima agree
  for (const auto& sn : tr.snapshots) {
    if (sn.state.t < 0.5) continue;
    Rates r = rhs(sn.state, d);
    const double inner = (-1.0 * r.interior.boundary()).min();
    const double outer = (-1.0 * r.boundary).min();
    EXPECT_NEAR(inner, outer, 1e-4) << sn.state.t;
    EXPECT_GT(-r.interior.max(), kappa);
  }
}

TEST(Classifier, NeedsTenRecords) {
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 9; ++i) recs.push_back(rec(i, 1e-12));
  EXPECT_EQ(classify(recs), Classification::undecided);
  recs.push_back(rec(9, 1e-12));
  EXPECT_EQ(classify(recs), Classification::converged);
}

TEST(Classifier, ConvergedNeedsBoundedEpsilon) {
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 20; ++i) recs.push_back(rec(i, 1e-8, 0.3, 0.2));
  EXPECT_EQ(classify(recs), Classification::converged);
  recs.clear();
  for (int i = 0; i < 20; ++i) recs.push_back(rec(i, 1e-8, 0.3 * std::pow(0.8, i), 0.95));
  EXPECT_EQ(classify(recs), Classification::concentrating);
}

TEST(Classifier, ConcentratingNeedsMassNearBoundary) {
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 20; ++i) recs.push_back(rec(i, 1e-3, 0.3 * std::pow(0.8, i), 0.5));
  EXPECT_EQ(classify(recs), Classification::undecided);
  recs.clear();
  for (int i = 0; i < 20; ++i) recs.push_back(rec(i, 5e-2, 0.3 * std::pow(0.8, i), 0.95));
  EXPECT_EQ(classify(recs), Classification::undecided);
}

TEST(Classifier, ConstantDataRunConverges) {
  auto g = DiscGrid::make(32, 64);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(kR).k_R);
  DiscField u = cap_profile(g, kR) + DiscField::from_polar(g, [](double r, double t) { return 0.05 * r * std::cos(t); });
  FlowConfig cfg;
  cfg.t_end = 20.0;
  cfg.record_every = 50;
  RunOptions opt;
  opt.track_center = true;
  Trajectory tr = run({u, CapGeometry(kR).rest_rho(), 0.0}, d, cfg, opt);
  EXPECT_EQ(tr.records.back().classifier, Classification::converged);
}

TEST(Classifier, ShortRunUndecided) {
  auto g = DiscGrid::make(16, 32);
  auto d = ProblemData::from_functions(g, [](double x, double) { return 1 + 0.3 * x; }, [](double, double y) { return 1 + 0.2 * y; });
  FlowConfig cfg;
  cfg.t_end = 0.1;
  cfg.record_every = 1;
  Trajectory tr = run({DiscField::constant(g, 0.0), kPi / 2, 0.0}, d, cfg);
  EXPECT_EQ(tr.records.back().classifier, Classification::undecided);
}

TEST(Classifier, Names) {
  for (auto c : {Classification::converged, Classification::concentrating, Classification::undecided}) {
    EXPECT_EQ(parse_classification(to_string(c)), c);
  }
  EXPECT_THROW(parse_classification("maybe"), IoError);
}

TEST(Csv, RoundTripIsExact) {
  std::vector<DiagnosticsRecord> recs;
  DiagnosticsRecord a = rec(0.1, 1.0 / 3.0);
  a.E = -std::sqrt(2.0);
  a.m0 = 5.5;
  a.rho = kPi / 3;
  a.alpha = 1e-300;
  a.beta = 7.25e12;
  a.G = 0.0;
  a.gauss_bonnet_residual = -1.5e-15;
  a.min_K_minus_alpha_f = -0.25;
  a.compat_defect = 3.0;
  recs.push_back(a);
  DiagnosticsRecord b = a;
  b.t = 0.2;
  b.a = Complex(0.9, -1e-17);
  b.epsilon = 0.052631578947368418;
  b.boundary_mass_fraction = 0.99;
  b.classifier = Classification::concentrating;
  recs.push_back(b);
  std::stringstream ss;
  write_csv(ss, recs);
  const std::string text = ss.str();
  std::vector<DiagnosticsRecord> back = read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  std::stringstream again;
  write_csv(again, back);
  EXPECT_EQ(again.str(), text);
  EXPECT_EQ(back[0].alpha, 1e-300);
  EXPECT_FALSE(back[0].a);
  EXPECT_EQ(*back[1].a, Complex(0.9, -1e-17));
  EXPECT_EQ(back[1].classifier, Classification::concentrating);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "t,E,m0,rho,alpha,beta,F,G,gauss_bonnet_residual,min_K_minus_alpha_f,compat_defect,a_re,a_im,epsilon,"
            "boundary_mass_fraction,classifier");
}

TEST(Csv, Errors) {
  std::stringstream empty;
  EXPECT_THROW(read_csv(empty), IoError);
  std::stringstream bad_header("t,E\n");
  EXPECT_THROW(read_csv(bad_header), IoError);
  std::stringstream h;
  write_csv_header(h);
  std::stringstream short_row(h.str() + "1,2,3\n");
  EXPECT_THROW(read_csv(short_row), IoError);
  std::stringstream bad_num(h.str() + "1,x,3,4,5,6,7,8,9,10,11,,,,,undecided\n");
  try {
    read_csv(bad_num);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
