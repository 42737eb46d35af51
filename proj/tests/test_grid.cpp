#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcflow/grid.hpp"
#include "pcflow/random_fields.hpp"

using namespace pcflow;
constexpr double kPi = std::numbers::pi;

namespace {

GridPtr default_grid() { return DiscGrid::make(32, 64); }

double max_err(const DiscField& a, const std::function<double(double, double)>& f) {
  return (a - DiscField::from_xy(a.grid(), f)).max_abs();
}

double max_err(const BoundaryField& a, const std::function<double(double)>& f) {
  return (a - BoundaryField::from_theta(a.grid(), f)).max_abs();
}

// beta(a, b) type closed form of int_B x^a y^b dz
double monomial_integral(int a, int b) {
  if (a % 2 || b % 2) return 0.0;
  const double ang = 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) / std::tgamma((a + b + 2) / 2.0);
  return ang / (a + b + 2);
}

}  // namespace

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(DiscGrid(4, 64), DimensionError);
  EXPECT_THROW(DiscGrid(32, 63), DimensionError);
  EXPECT_THROW(DiscGrid(32, 6), DimensionError);
}

TEST(Grid, WeightsSumToCircleAndArea) {
  auto g = default_grid();
  EXPECT_NEAR(g->angular_weight() * g->n_theta(), 2 * kPi, 1e-12);
  EXPECT_NEAR(integrate_disc(DiscField::constant(g, 1.0)), kPi, 1e-12);
  EXPECT_NEAR(integrate_boundary(BoundaryField::constant(g, 1.0)), 2 * kPi, 1e-12);
}

TEST(Grid, FieldShapeMismatch) {
  auto g = default_grid();
  auto h = DiscGrid::make(16, 32);
  EXPECT_THROW(DiscField(g, Eigen::MatrixXd::Zero(16, 32)), DimensionError);
  EXPECT_THROW(DiscField(g) + DiscField(h), DimensionError);
}

TEST(Grid, LaplacianExamples) {
  auto g = default_grid();
  auto r2 = DiscField::from_xy(g, [](double x, double y) { return x * x + y * y; });
  EXPECT_LT((laplacian(r2) - 4.0).max_abs(), 1e-8);
  auto x = DiscField::from_xy(g, [](double x, double) { return x; });
  EXPECT_LT(laplacian(x).max_abs(), 1e-9);

  const double R = 0.5;
  auto u = DiscField::from_xy(g, [R](double x, double y) { return std::log(1 + R * R * (x * x + y * y)); });
  EXPECT_LT(max_err(laplacian(u),
                    [R](double x, double y) {
                      const double q = 1 + R * R * (x * x + y * y);
                      return 4 * R * R / (q * q);
                    }),
            1e-8);
}

TEST(Grid, NormalDerivativeExamples) {
  auto g = default_grid();
  EXPECT_LT(max_err(normal_derivative(DiscField::from_xy(g, [](double x, double) { return x; })),
                    [](double t) { return std::cos(t); }),
            1e-12);
  EXPECT_LT(normal_derivative(DiscField::constant(g, 3.0)).max_abs(), 1e-11);
  EXPECT_LT(max_err(normal_derivative(DiscField::from_xy(g, [](double x, double y) { return x * x + y * y; })),
                    [](double) { return 2.0; }),
            1e-11);
}

TEST(Grid, GradientExamples) {
  auto g = default_grid();
  auto [ax, ay] = gradient(DiscField::from_xy(g, [](double x, double) { return x; }));
  EXPECT_LT((ax - 1.0).max_abs(), 1e-11);
  EXPECT_LT(ay.max_abs(), 1e-11);
  auto [bx, by] = gradient(DiscField::from_xy(g, [](double x, double y) { return x * x + y * y; }));
  EXPECT_LT(max_err(bx, [](double x, double) { return 2 * x; }), 1e-11);
  EXPECT_LT(max_err(by, [](double, double y) { return 2 * y; }), 1e-11);
  auto [cx, cy] = gradient(DiscField::from_xy(g, [](double x, double y) { return x * y; }));
  EXPECT_LT(max_err(cx, [](double, double y) { return y; }), 1e-11);
  EXPECT_LT(max_err(cy, [](double x, double) { return x; }), 1e-11);
}

TEST(Grid, QuadratureExamples) {
  auto g = default_grid();
  EXPECT_NEAR(integrate_disc(DiscField::from_xy(g, [](double x, double) { return x * x; })), kPi / 4, 1e-13);
}

TEST(Grid, QuadratureExactness) {
  auto g = default_grid();
  for (int m = 0; m <= 10; ++m) {
    auto w = DiscField::from_polar(g, [m](double r, double) { return std::pow(r, 2 * m); });
    EXPECT_NEAR(integrate_disc(w), kPi / (m + 1), 1e-10) << "m=" << m;
  }
  for (int a = 0; a <= 6; ++a) {
    for (int b = 0; a + b <= 6; ++b) {
      auto w = DiscField::from_xy(g, [a, b](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
      EXPECT_NEAR(integrate_disc(w), monomial_integral(a, b), 1e-10) << a << "," << b;
    }
  }
}

TEST(Grid, DivergenceTheorem) {
  auto g = default_grid();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    auto u = random_bandlimited(g, rng);
    EXPECT_LT(std::abs(integrate_disc(laplacian(u)) - integrate_boundary(normal_derivative(u))), 1e-8);
  }
}

TEST(Grid, SpectralConvergenceOfLaplacian) {
  std::vector<double> errs;
  for (int n : {8, 16, 32}) {
    auto g = DiscGrid::make(n, 2 * n);
    auto u = DiscField::from_xy(g, [](double x, double) { return std::exp(x); });
    errs.push_back(max_err(laplacian(u), [](double x, double) { return std::exp(x); }));
  }
  const double floor = 1e-8;  // boundary-row u_rr round-off at N = 63
  for (size_t i = 1; i < errs.size(); ++i) {
    if (errs[i - 1] > floor) EXPECT_GE(errs[i - 1] / errs[i], 10.0) << "level " << i;
  }
  EXPECT_LT(errs.back(), floor);
}

TEST(Grid, HarmonicExtensionExamples) {
  auto g = default_grid();
  EXPECT_LT(max_err(harmonic_extension(BoundaryField::from_theta(g, [](double t) { return std::cos(t); })),
                    [](double x, double) { return x; }),
            1e-13);
  EXPECT_LT((harmonic_extension(BoundaryField::constant(g, 2.5)) - 2.5).max_abs(), 1e-13);
  EXPECT_LT(max_err(harmonic_extension(BoundaryField::from_theta(g, [](double t) { return std::cos(2 * t); })),
                    [](double x, double y) { return x * x - y * y; }),
            1e-13);
}

TEST(Grid, HarmonicExtensionTraceAndHarmonicity) {
  auto g = default_grid();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    auto b = random_trig(g, rng, 12);
    auto h = harmonic_extension(b);
    EXPECT_LT((h.boundary() - b).max_abs(), 1e-12);
    EXPECT_LT(laplacian(h).max_abs(), 1e-8);
  }
}

// Shooting reference for u'' + u'/r - u = -1, u(1) = 0: integrate from the
// series start near r = 0 and combine two shots linearly.
static double shoot(double u0, double r_end, int steps) {
  auto rhs = [](double r, double u, double p) { return std::array<double, 2>{p, u - 1.0 - p / r}; };
  const double r0 = 1e-6;
  // series: u = u0 + (u0 - 1) r^2 / 4
  double u = u0 + (u0 - 1.0) * r0 * r0 / 4.0;
  double p = (u0 - 1.0) * r0 / 2.0;
  double r = r0;
  const double h = (r_end - r0) / steps;
  for (int s = 0; s < steps; ++s) {
    auto k1 = rhs(r, u, p);
    auto k2 = rhs(r + h / 2, u + h / 2 * k1[0], p + h / 2 * k1[1]);
    auto k3 = rhs(r + h / 2, u + h / 2 * k2[0], p + h / 2 * k2[1]);
    auto k4 = rhs(r + h, u + h * k3[0], p + h * k3[1]);
    u += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    r += h;
  }
  return u;
}

TEST(Grid, HelmholtzMatchesShootingOracle) {
  auto g = default_grid();
  auto sol = helmholtz_solve(1.0, DiscField::constant(g, 1.0), {1.0, 0.0}, BoundaryField::constant(g, 0.0));
  // u(1) is affine in u0
  const int steps = 20000;
  const double s0 = shoot(0.0, 1.0, steps), s1 = shoot(1.0, 1.0, steps);
  const double u0 = -s0 / (s1 - s0);
  for (int i = 0; i < g->n_r(); i += 5) {
    const double ref = shoot(u0, g->r(i), steps);
    for (int k = 0; k < g->n_theta(); k += 7) EXPECT_NEAR(sol(i, k), ref, 1e-8) << "r=" << g->r(i);
  }
}

TEST(Grid, HelmholtzExamples) {
  auto g = default_grid();
  auto trace = BoundaryField::from_theta(g, [](double t) { return std::cos(t); });
  auto u = helmholtz_solve(0.0, DiscField::constant(g, 0.0), {1.0, 0.0}, trace);
  EXPECT_LT(max_err(u, [](double x, double) { return x; }), 1e-11);

  auto u0 = DiscField::from_polar(g, [](double r, double t) { return r * r * std::cos(2 * t); });
  auto rhs = u0 - laplacian(u0);
  auto v = helmholtz_solve(1.0, rhs, {1.0, 0.0}, BoundaryField::from_theta(g, [](double t) { return std::cos(2 * t); }));
  EXPECT_LT((v - u0).max_abs(), 1e-10);
}

TEST(Grid, HelmholtzRobinAndNeumann) {
  auto g = default_grid();
  std::mt19937_64 rng(7);
  auto u0 = random_bandlimited(g, rng);
  const double c = 2.0;
  RobinCondition robin{1.5, 0.7};
  auto bc = robin.p * u0.boundary() + robin.q * normal_derivative(u0);
  auto u = helmholtz_solve(c, c * u0 - laplacian(u0), robin, bc);
  EXPECT_LT((u - u0).max_abs(), 1e-9);

  // compatible pure Neumann data: solution up to a constant
  auto w = helmholtz_solve(0.0, -laplacian(u0), {0.0, 1.0}, normal_derivative(u0));
  auto diff = w - u0;
  EXPECT_LT((diff - diff(0, 0)).max_abs(), 1e-8);

  EXPECT_THROW(helmholtz_solve(0.0, DiscField::constant(g, 1.0), {0.0, 1.0}, BoundaryField::constant(g, 0.0)),
               SolvabilityError);
}

TEST(Grid, InterpolationIsSpectral) {
  auto g = default_grid();
  auto f = [](double x, double y) { return std::exp(x) * std::cos(2 * y) + x * y * y; };
  FieldInterpolant it(DiscField::from_xy(g, f));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    const Complex z = std::polar(std::sqrt(U(rng)), 2 * kPi * U(rng));
    EXPECT_NEAR(it(z), f(z.real(), z.imag()), 1e-12);
  }
  EXPECT_NEAR(it(Complex(0, 0)), f(0, 0), 1e-12);
  EXPECT_NEAR(it(Complex(1, 0)), f(1, 0), 1e-12);
}
