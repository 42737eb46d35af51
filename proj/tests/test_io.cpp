#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pcflow/experiment.hpp"

using namespace pcflow;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("pcflow_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.ini");
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2*3")(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(1 + 2)*3")(0, 0), 9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^-1")(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("8/4/2")(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1 - 2 - 3")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1")(0, 0), 15.0);
  EXPECT_DOUBLE_EQ(Expression::parse("pi")(0, 0), kPi);
}

TEST(Expression, VariablesAndFunctions) {
  const double x = 0.3, y = -0.4;
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 0.3*x")(x, y), 1 + 0.3 * x);
  EXPECT_DOUBLE_EQ(Expression::parse("r")(x, y), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("theta")(x, y), std::atan2(y, x));
  EXPECT_DOUBLE_EQ(Expression::parse("0.05*r*cos(theta)")(x, y), 0.05 * 0.5 * std::cos(std::atan2(y, x)));
  EXPECT_DOUBLE_EQ(Expression::parse("sqrt(exp(2*x)) - log(exp(y)) + sin(x)")(x, y), std::exp(x) - y + std::sin(x));
}

TEST(Expression, Errors) {
  for (const char* bad : {"", "1 +", "(1", "foo", "sin 1", "1 2", "x $ y", "cos()"}) {
    EXPECT_THROW(Expression::parse(bad), ConfigError) << bad;
  }
  try {
    Expression::parse("1 + z");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
}

TEST(Config, ParsesSectionsAndDefaults) {
  RunConfig c = parse(R"(
# comment
[grid]
nr = 16
nt = 32   ; trailing comment
[data]
f = 1 + 0.3*x
j = 1
[initial]
type = cap
R = 0.5
perturb = 0.05*r*cos(theta)
[flow]
scheme = explicit_rk4
t_end = 2.5
stop_when_steady = true
[output]
dir = somewhere
[run]
seed = 7
track_center = yes
)");
  EXPECT_EQ(c.nr, 16);
  EXPECT_EQ(c.nt, 32);
  EXPECT_EQ(c.f, "1 + 0.3*x");
  EXPECT_EQ(c.initial.type, "cap");
  EXPECT_EQ(c.initial.R, 0.5);
  EXPECT_EQ(c.flow.scheme, Scheme::explicit_rk4);
  EXPECT_EQ(c.flow.t_end, 2.5);
  EXPECT_TRUE(c.flow.stop_when_steady);
  EXPECT_EQ(c.flow.dt_max, FlowConfig{}.dt_max);
  EXPECT_EQ(c.out_dir, "somewhere");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_TRUE(c.track_center);
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_NE(config_error("[grid]\nnr = 16\nbogus = 1\n").find("test.ini:3"), std::string::npos);
  EXPECT_NE(config_error("[flow]\n\nt_end = soon\n").find("test.ini:3"), std::string::npos);
  EXPECT_NE(config_error("[nowhere]\n").find("test.ini:1"), std::string::npos);
  EXPECT_NE(config_error("nr = 3\n").find("test.ini:1"), std::string::npos);
  EXPECT_NE(config_error("[grid]\nnr = 16\nnr = 32\n").find("duplicate"), std::string::npos);
  EXPECT_NE(config_error("[data]\nf = 1 +\n").find("test.ini:2"), std::string::npos);
  EXPECT_NE(config_error("[flow]\nscheme = euler\n").find("test.ini:2"), std::string::npos);
  EXPECT_NE(config_error("[grid]\nnr = 16.5\n").find("integer"), std::string::npos);
  EXPECT_NE(config_error("[run]\ntrack_center = maybe\n").find("true or false"), std::string::npos);
  EXPECT_FALSE(config_error("[grid]\nnt = 33\n").empty());
  EXPECT_FALSE(config_error("[initial]\ntype = blob\n").empty());
  EXPECT_FALSE(config_error("[initial]\ntype = concentrated\na_re = 1\n").empty());
  EXPECT_FALSE(config_error("[initial]\ntype = snapshot\n").empty());
  EXPECT_FALSE(config_error("[flow]\ncfl_safety = 2\n").empty());
  EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig c;
  c.f = "1 + 0.3*x";
  c.initial.type = "concentrated";
  c.initial.a_re = 0.9;
  c.frame = true;
  c.flow.dt_max = 1.0 / 3.0;
  c.flow.stop_tol = 1e-14;
  const std::string t = to_text(c);
  RunConfig back = parse(t);
  EXPECT_EQ(to_text(back), t);
  EXPECT_EQ(back.flow.dt_max, 1.0 / 3.0);
}

TEST(Setup, BuildsEachInitialType) {
  RunConfig c;
  c.nr = 16;
  c.nt = 32;
  pcflow::Setup z = make_setup(c);
  EXPECT_LT(z.state.u.max_abs(), 1e-15);
  EXPECT_DOUBLE_EQ(z.state.rho, kPi / 2);
  c.initial.type = "cap";
  pcflow::Setup cap = make_setup(c);
  EXPECT_NEAR(cap.state.rho, kPi / 2, 1e-15);  // rest value of R = 1/sqrt(3)
  c.initial.type = "concentrated";
  c.initial.a_re = 0.5;
  c.frame = true;
  pcflow::Setup fr = make_setup(c);
  EXPECT_NEAR(fr.frame.a().real(), 0.5, 1e-15);
  EXPECT_GT(fr.normalization_R, 0.0);
  c.initial.rho = 1.0;
  EXPECT_EQ(make_setup(c).state.rho, 1.0);
}

TEST(Field, JsonRoundTripIsExact) {
  auto g = DiscGrid::make(8, 16);
  DiscField u = DiscField::from_polar(g, [](double r, double t) { return std::exp(r) * std::sin(3 * t) / 3.0; });
  Json j = field_to_json(u);
  DiscField back = field_from_json(Json::parse(j.dump()), g);
  EXPECT_EQ((back - u).max_abs(), 0.0);
  EXPECT_EQ(j["n_r"], 8);
  EXPECT_EQ(j["values"].size(), 128u);
  EXPECT_DOUBLE_EQ(j["values"][16 + 3].get<double>(), u(1, 3));  // row-major
  EXPECT_THROW(field_from_json(j, DiscGrid::make(8, 32)), DimensionError);
  Json broken = j;
  broken["values"].erase(0);
  EXPECT_THROW(field_from_json(broken, g), IoError);
}

TEST(Snapshot, RestartFromFileMatchesUninterruptedRun) {
  const fs::path dir = scratch("restart");
  auto g = DiscGrid::make(16, 32);
  const double R = 1 / std::sqrt(3.0);
  auto d = ProblemData::constant(g, 1.0, CapGeometry(R).k_R);
  FlowState s0{cap_profile(g, R) + DiscField::from_polar(g, [](double r, double t) { return 0.05 * r * std::cos(t); }),
               CapGeometry(R).rest_rho(), 0.0};
  FlowConfig cfg;
  cfg.dt_init = cfg.dt_max = 1.0 / 128;
  cfg.t_end = 2.0;
  Trajectory full = run(s0, d, cfg);
  FlowConfig half = cfg;
  half.t_end = 1.0;
  Trajectory first = run(s0, d, half);
  save_snapshot(dir / "mid.json", first.snapshots.back());
  StoredSnapshot st = load_snapshot(dir / "mid.json", g);
  EXPECT_EQ(st.snap.state.t, 1.0);
  EXPECT_EQ(st.snap.history.steps, first.final_history.steps);
  RunOptions opt;
  opt.resume = &st.snap.history;
  opt.record_initial = false;
  Trajectory rest = run(st.snap.state, d, cfg, opt);
  EXPECT_LE((rest.final_state.u - full.final_state.u).max_abs(), 1e-12);
  EXPECT_LE(std::abs(rest.final_state.rho - full.final_state.rho), 1e-12);
  EXPECT_THROW(load_snapshot(dir / "missing.json"), IoError);
  std::ofstream(dir / "junk.json") << "{\"format\": \"other\"}";
  EXPECT_THROW(load_snapshot(dir / "junk.json"), IoError);
}

TEST(Trajectory, DirectoryLayoutAndDeterminism) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunConfig c;
  c.nr = 16;
  c.nt = 32;
  c.f = "1 + 0.2*x";
  c.j = "1";
  c.flow.t_end = 0.5;
  c.flow.snapshot_every = 20;
  c.track_center = true;
  for (const auto& dir : {a, b}) {
    pcflow::Setup s = make_setup(c);
    Trajectory tr = run_config(c, s);
    write_trajectory(dir, tr, s.frame, run_summary_json(c));
  }
  EXPECT_TRUE(fs::exists(a / "run.json"));
  EXPECT_TRUE(fs::exists(a / "snapshots" / "000000.json"));
  const std::string csv = slurp(a / "diagnostics.csv");
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(csv, slurp(b / "diagnostics.csv"));
  auto snaps = load_snapshots(a);
  ASSERT_FALSE(snaps.empty());
  EXPECT_EQ(snaps.back().snap.state.t, 0.5);
  std::istringstream text(read_json(a / "run.json").at("config").get<std::string>());
  EXPECT_EQ(to_text(parse_config(text)), to_text(c));
}
