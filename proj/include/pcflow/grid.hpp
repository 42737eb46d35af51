#pragma once

// Polar spectral grid on the closed unit disc.
//
// Radial direction: Chebyshev points of the doubled interval [-1, 1] with an
// odd number of intervals N = 2 n_r - 1, so r = 0 is never a node. A field at
// (-r, theta) is the field at (r, theta + pi); radial operators are folded
// with that parity. Angular direction: equispaced Fourier nodes.
// Row 0 of every field is the boundary r = 1.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pcflow/error.hpp"

namespace pcflow {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;

class DiscGrid {
 public:
  DiscGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < 8 || n_theta < 8 || n_theta % 2 != 0) {
      throw DimensionError("grid needs n_r >= 8 and even n_theta >= 8 (got " + std::to_string(n_r) +
                           " x " + std::to_string(n_theta) + ")");
    }
    build_radial();
    build_angular();
  }

  static std::shared_ptr<const DiscGrid> make(int n_r, int n_theta) {
    return std::make_shared<const DiscGrid>(n_r, n_theta);
  }

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  int size() const { return n_r_ * n_theta_; }
  int nyquist() const { return n_theta_ / 2; }

  double r(int i) const { return r_(i); }
  double theta(int k) const { return 2.0 * std::numbers::pi * k / n_theta_; }
  Complex node(int i, int k) const { return std::polar(r_(i), theta(k)); }
  const Eigen::VectorXd& radii() const { return r_; }

  // Weights for int_0^1 g(r) r dr over the radial nodes.
  const Eigen::VectorXd& radial_weights() const { return w_r_; }
  double angular_weight() const { return 2.0 * std::numbers::pi / n_theta_; }

  // Coefficient layout of a real Fourier row: column 0 is the mean, columns
  // 2m-1 and 2m hold cos(m theta) and sin(m theta), the last column holds the
  // Nyquist cosine.
  int mode_of_column(int c) const { return c == 0 ? 0 : (c == n_theta_ - 1 ? nyquist() : (c + 1) / 2); }
  bool is_sine_column(int c) const { return c > 0 && c < n_theta_ - 1 && c % 2 == 0; }
  int parity_of_column(int c) const { return mode_of_column(c) % 2; }

  // row-space transforms: coeffs = values * analysis(), values = coeffs * synthesis()
  const Eigen::MatrixXd& analysis() const { return analysis_; }
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }
  // angular derivatives act from the right: U_theta = U * dtheta1()
  const Eigen::MatrixXd& dtheta1() const { return dth1_; }
  const Eigen::MatrixXd& dtheta2() const { return dth2_; }

  // Parity-folded radial differentiation (parity 0 even, 1 odd).
  const Eigen::MatrixXd& d1(int parity) const { return d1_[parity]; }
  const Eigen::MatrixXd& d2(int parity) const { return d2_[parity]; }
  // Physical-space split: U_r = d1_direct * U + d1_mirror * shift(U).
  const Eigen::MatrixXd& d1_direct() const { return d1_dir_; }
  const Eigen::MatrixXd& d1_mirror() const { return d1_mir_; }
  const Eigen::MatrixXd& d2_direct() const { return d2_dir_; }
  const Eigen::MatrixXd& d2_mirror() const { return d2_mir_; }

  // Full doubled Chebyshev grid (N + 1 points) with barycentric weights.
  const Eigen::VectorXd& cheb_nodes() const { return x_; }
  const Eigen::VectorXd& cheb_bary() const { return bary_; }

  double h_min() const {
    return std::min(1.0 - r_(1), r_(n_r_ - 1) * angular_weight());
  }

  bool same_shape(const DiscGrid& o) const { return n_r_ == o.n_r_ && n_theta_ == o.n_theta_; }

 private:
  void build_radial() {
    const int N = 2 * n_r_ - 1;
    x_.resize(N + 1);
    for (int j = 0; j <= N; ++j) x_(j) = std::cos(std::numbers::pi * j / N);
    // exact symmetry of mirrored nodes
    for (int j = 0; j <= N; ++j) {
      if (j > N - j) x_(j) = -x_(N - j);
    }
    r_ = x_.head(n_r_);

    Eigen::VectorXd c(N + 1);
    for (int j = 0; j <= N; ++j) c(j) = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
    // node differences via the trigonometric identity, then off-diagonal
    // second-derivative entries from the first-derivative ones; diagonals by
    // the negative-sum rule
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j <= N; ++j) {
        dx(i, j) = 2.0 * std::sin(std::numbers::pi * (i + j) / (2.0 * N)) * std::sin(std::numbers::pi * (j - i) / (2.0 * N));
      }
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j <= N; ++j) {
        if (i != j) D(i, j) = (c(i) / c(j)) / dx(i, j);
      }
    }
    for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j <= N; ++j) {
        if (i != j) D2(i, j) = 2.0 * D(i, j) * (D(i, i) - 1.0 / dx(i, j));
      }
    }
    for (int i = 0; i <= N; ++i) D2(i, i) = -D2.row(i).sum();

    d1_dir_ = D.topLeftCorner(n_r_, n_r_);
    d2_dir_ = D2.topLeftCorner(n_r_, n_r_);
    d1_mir_.resize(n_r_, n_r_);
    d2_mir_.resize(n_r_, n_r_);
    for (int l = 0; l < n_r_; ++l) {
      d1_mir_.col(l) = D.col(N - l).head(n_r_);
      d2_mir_.col(l) = D2.col(N - l).head(n_r_);
    }
    d1_[0] = d1_dir_ + d1_mir_;
    d1_[1] = d1_dir_ - d1_mir_;
    d2_[0] = d2_dir_ + d2_mir_;
    d2_[1] = d2_dir_ - d2_mir_;

    bary_.resize(N + 1);
    for (int j = 0; j <= N; ++j) bary_(j) = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);

    // Clenshaw-Curtis type weights for int_{-1}^{1} |x| g(x) dx.
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(N + 1);
    auto S = [](int n) {
      if (n == 0) return 0.0;
      return (1.0 - std::cos(n * std::numbers::pi / 2.0)) / n;
    };
    for (int k = 0; k <= N; k += 2) mu(k) = 0.5 * (S(2 + k) + S(2 - k));
    Eigen::VectorXd W = Eigen::VectorXd::Zero(N + 1);
    for (int j = 0; j <= N; ++j) {
      const double sj = (j == 0 || j == N) ? 2.0 : 1.0;
      double acc = 0.0;
      for (int k = 0; k <= N; ++k) {
        const double sk = (k == 0 || k == N) ? 2.0 : 1.0;
        acc += mu(k) * (2.0 / N) * std::cos(std::numbers::pi * j * k / N) / (sk * sj);
      }
      W(j) = acc;
    }
    // int_B g dz = 1/2 int_theta int_{-1}^{1} |x| g dx dtheta; the two halves fold together
    w_r_ = W.head(n_r_);
  }

  void build_angular() {
    const int n = n_theta_;
    const int M = nyquist();
    analysis_.resize(n, n);
    synthesis_.resize(n, n);
    for (int k = 0; k < n; ++k) {
      const double th = theta(k);
      analysis_(k, 0) = 1.0 / n;
      synthesis_(0, k) = 1.0;
      for (int m = 1; m < M; ++m) {
        analysis_(k, 2 * m - 1) = 2.0 / n * std::cos(m * th);
        analysis_(k, 2 * m) = 2.0 / n * std::sin(m * th);
        synthesis_(2 * m - 1, k) = std::cos(m * th);
        synthesis_(2 * m, k) = std::sin(m * th);
      }
      analysis_(k, n - 1) = ((k % 2) ? -1.0 : 1.0) / n;
      synthesis_(n - 1, k) = (k % 2) ? -1.0 : 1.0;
    }
    // closed-form Fourier differentiation (Nyquist cosine kept in the second
    // derivative, dropped in the first), diagonals by the negative-sum rule
    const double h = 2.0 * std::numbers::pi / n;
    dth1_.setZero(n, n);
    dth2_.setZero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double sgn = ((i - j) % 2) ? -1.0 : 1.0;
        const double s = std::sin((i - j) * h / 2.0);
        // U * M convention: entry (j, i) multiplies u_j in output i
        dth1_(j, i) = 0.5 * sgn * std::cos((i - j) * h / 2.0) / s;
        dth2_(j, i) = -0.5 * sgn / (s * s);
      }
    }
    for (int i = 0; i < n; ++i) {
      dth1_(i, i) = 0.0;
      dth1_(i, i) = -dth1_.col(i).sum();
      dth2_(i, i) = 0.0;
      dth2_(i, i) = -dth2_.col(i).sum();
    }
  }

  int n_r_;
  int n_theta_;
  Eigen::VectorXd x_, bary_, r_, w_r_;
  Eigen::MatrixXd d1_dir_, d1_mir_, d2_dir_, d2_mir_;
  Eigen::MatrixXd d1_[2], d2_[2];
  Eigen::MatrixXd analysis_, synthesis_, dth1_, dth2_;
};

using GridPtr = std::shared_ptr<const DiscGrid>;

class BoundaryField;

class DiscField {
 public:
  DiscField() = default;
  explicit DiscField(GridPtr g) : grid_(std::move(g)), v_(Eigen::MatrixXd::Zero(grid_->n_r(), grid_->n_theta())) {}
  DiscField(GridPtr g, Eigen::MatrixXd v) : grid_(std::move(g)), v_(std::move(v)) {
    if (v_.rows() != grid_->n_r() || v_.cols() != grid_->n_theta()) {
      throw DimensionError("field shape does not match grid");
    }
  }

  static DiscField constant(GridPtr g, double c) {
    DiscField out(g);
    out.v_.setConstant(c);
    return out;
  }
  // f(x, y) sampled at the nodes
  static DiscField from_xy(GridPtr g, const std::function<double(double, double)>& f) {
    DiscField out(g);
    for (int i = 0; i < g->n_r(); ++i) {
      for (int k = 0; k < g->n_theta(); ++k) {
        const Complex z = g->node(i, k);
        out.v_(i, k) = f(z.real(), z.imag());
      }
    }
    return out;
  }
  static DiscField from_polar(GridPtr g, const std::function<double(double, double)>& f) {
    DiscField out(g);
    for (int i = 0; i < g->n_r(); ++i) {
      for (int k = 0; k < g->n_theta(); ++k) out.v_(i, k) = f(g->r(i), g->theta(k));
    }
    return out;
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return v_; }
  Eigen::MatrixXd& values() { return v_; }
  double operator()(int i, int k) const { return v_(i, k); }
  double& operator()(int i, int k) { return v_(i, k); }

  BoundaryField boundary() const;

  DiscField map(const std::function<double(double)>& fn) const {
    DiscField out(grid_);
    out.v_ = v_.unaryExpr(fn);
    return out;
  }
  DiscField exp(double s = 1.0) const {
    DiscField out(grid_);
    out.v_ = (s * v_.array()).exp().matrix();
    return out;
  }
  double max() const { return v_.maxCoeff(); }
  double min() const { return v_.minCoeff(); }
  double max_abs() const { return v_.cwiseAbs().maxCoeff(); }
  bool all_finite() const { return v_.allFinite(); }

  DiscField& operator+=(const DiscField& o) { check(o); v_ += o.v_; return *this; }
  DiscField& operator-=(const DiscField& o) { check(o); v_ -= o.v_; return *this; }
  DiscField& operator*=(double s) { v_ *= s; return *this; }
  DiscField& operator+=(double s) { v_.array() += s; return *this; }

  friend DiscField operator+(DiscField a, const DiscField& b) { return a += b; }
  friend DiscField operator-(DiscField a, const DiscField& b) { return a -= b; }
  friend DiscField operator*(DiscField a, double s) { return a *= s; }
  friend DiscField operator*(double s, DiscField a) { return a *= s; }
  friend DiscField operator+(DiscField a, double s) { return a += s; }
  friend DiscField operator-(DiscField a, double s) { return a += -s; }
  friend DiscField operator-(DiscField a) { a.v_ = -a.v_; return a; }
  // pointwise product
  friend DiscField operator*(const DiscField& a, const DiscField& b) {
    a.check(b);
    return DiscField(a.grid_, a.v_.cwiseProduct(b.v_));
  }
  friend DiscField operator/(const DiscField& a, const DiscField& b) {
    a.check(b);
    return DiscField(a.grid_, a.v_.cwiseQuotient(b.v_));
  }

  void check(const DiscField& o) const {
    if (!grid_ || !o.grid_ || !grid_->same_shape(*o.grid_)) throw DimensionError("fields live on different grids");
  }

 private:
  GridPtr grid_;
  Eigen::MatrixXd v_;
};

class BoundaryField {
 public:
  BoundaryField() = default;
  explicit BoundaryField(GridPtr g) : grid_(std::move(g)), v_(Eigen::VectorXd::Zero(grid_->n_theta())) {}
  BoundaryField(GridPtr g, Eigen::VectorXd v) : grid_(std::move(g)), v_(std::move(v)) {
    if (v_.size() != grid_->n_theta()) throw DimensionError("boundary field length does not match grid");
  }
  static BoundaryField constant(GridPtr g, double c) {
    BoundaryField out(g);
    out.v_.setConstant(c);
    return out;
  }
  static BoundaryField from_theta(GridPtr g, const std::function<double(double)>& f) {
    BoundaryField out(g);
    for (int k = 0; k < g->n_theta(); ++k) out.v_(k) = f(g->theta(k));
    return out;
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return v_; }
  Eigen::VectorXd& values() { return v_; }
  double operator()(int k) const { return v_(k); }
  double& operator()(int k) { return v_(k); }
  double max() const { return v_.maxCoeff(); }
  double min() const { return v_.minCoeff(); }
  double max_abs() const { return v_.cwiseAbs().maxCoeff(); }
  BoundaryField exp(double s = 1.0) const { return BoundaryField(grid_, (s * v_.array()).exp().matrix()); }

  friend BoundaryField operator+(BoundaryField a, const BoundaryField& b) { a.check(b); a.v_ += b.v_; return a; }
  friend BoundaryField operator-(BoundaryField a, const BoundaryField& b) { a.check(b); a.v_ -= b.v_; return a; }
  friend BoundaryField operator*(BoundaryField a, double s) { a.v_ *= s; return a; }
  friend BoundaryField operator*(double s, BoundaryField a) { a.v_ *= s; return a; }
  friend BoundaryField operator+(BoundaryField a, double s) { a.v_.array() += s; return a; }
  friend BoundaryField operator*(const BoundaryField& a, const BoundaryField& b) {
    a.check(b);
    return BoundaryField(a.grid_, a.v_.cwiseProduct(b.v_));
  }

  void check(const BoundaryField& o) const {
    if (!grid_ || !o.grid_ || grid_->n_theta() != o.grid_->n_theta()) {
      throw DimensionError("boundary fields live on different grids");
    }
  }

 private:
  GridPtr grid_;
  Eigen::VectorXd v_;
};

inline BoundaryField DiscField::boundary() const { return BoundaryField(grid_, v_.row(0).transpose()); }

// ---------------------------------------------------------------------------
// differential operators

namespace detail {
inline Eigen::MatrixXd half_turn(const Eigen::MatrixXd& U) {
  const int n = int(U.cols());
  const int h = n / 2;
  Eigen::MatrixXd S(U.rows(), n);
  S.leftCols(n - h) = U.rightCols(n - h);
  S.rightCols(h) = U.leftCols(h);
  return S;
}
}  // namespace detail

inline DiscField radial_derivative(const DiscField& u) {
  const auto& g = *u.grid();
  Eigen::MatrixXd s = detail::half_turn(u.values());
  return DiscField(u.grid(), g.d1_direct() * u.values() + g.d1_mirror() * s);
}

inline DiscField radial_second_derivative(const DiscField& u) {
  const auto& g = *u.grid();
  Eigen::MatrixXd s = detail::half_turn(u.values());
  return DiscField(u.grid(), g.d2_direct() * u.values() + g.d2_mirror() * s);
}

inline DiscField theta_derivative(const DiscField& u) {
  return DiscField(u.grid(), u.values() * u.grid()->dtheta1());
}

inline DiscField theta_second_derivative(const DiscField& u) {
  return DiscField(u.grid(), u.values() * u.grid()->dtheta2());
}

inline BoundaryField theta_derivative(const BoundaryField& b) {
  return BoundaryField(b.grid(), (b.values().transpose() * b.grid()->dtheta1()).transpose());
}

inline DiscField laplacian(const DiscField& u) {
  const auto& g = *u.grid();
  Eigen::MatrixXd s = detail::half_turn(u.values());
  Eigen::MatrixXd ur = g.d1_direct() * u.values() + g.d1_mirror() * s;
  Eigen::MatrixXd urr = g.d2_direct() * u.values() + g.d2_mirror() * s;
  Eigen::MatrixXd utt = u.values() * g.dtheta2();
  Eigen::ArrayXd inv_r = g.radii().array().inverse();
  Eigen::MatrixXd out = urr;
  out += (ur.array().colwise() * inv_r).matrix();
  out += (utt.array().colwise() * inv_r.square()).matrix();
  return DiscField(u.grid(), std::move(out));
}

inline BoundaryField normal_derivative(const DiscField& u) { return radial_derivative(u).boundary(); }

// Cartesian gradient (u_x, u_y).
inline std::pair<DiscField, DiscField> gradient(const DiscField& u) {
  const auto& g = *u.grid();
  DiscField ur = radial_derivative(u);
  DiscField ut = theta_derivative(u);
  DiscField gx(u.grid()), gy(u.grid());
  for (int i = 0; i < g.n_r(); ++i) {
    for (int k = 0; k < g.n_theta(); ++k) {
      const double c = std::cos(g.theta(k)), s = std::sin(g.theta(k));
      const double a = ur(i, k), b = ut(i, k) / g.r(i);
      gx(i, k) = c * a - s * b;
      gy(i, k) = s * a + c * b;
    }
  }
  return {std::move(gx), std::move(gy)};
}

// |grad u|^2
inline DiscField grad_norm_sq(const DiscField& u) {
  const auto& g = *u.grid();
  DiscField ur = radial_derivative(u);
  DiscField ut = theta_derivative(u);
  Eigen::ArrayXd inv_r = g.radii().array().inverse();
  Eigen::MatrixXd out = ur.values().array().square().matrix();
  out += (ut.values().array().colwise() * inv_r).square().matrix();
  return DiscField(u.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// quadrature

inline double integrate_disc(const DiscField& w) {
  const auto& g = *w.grid();
  return g.angular_weight() * g.radial_weights().dot(w.values().rowwise().sum());
}

inline double integrate_boundary(const BoundaryField& b) {
  return b.grid()->angular_weight() * b.values().sum();
}

inline double dirichlet_integral(const DiscField& u) { return integrate_disc(grad_norm_sq(u)); }

// ---------------------------------------------------------------------------
// elliptic solves, mode by mode

inline DiscField harmonic_extension(const BoundaryField& b) {
  const auto& g = *b.grid();
  Eigen::RowVectorXd c = b.values().transpose() * g.analysis();
  Eigen::MatrixXd coeff(g.n_r(), g.n_theta());
  for (int col = 0; col < g.n_theta(); ++col) {
    const int m = g.mode_of_column(col);
    for (int i = 0; i < g.n_r(); ++i) coeff(i, col) = c(col) * std::pow(g.r(i), m);
  }
  return DiscField(b.grid(), coeff * g.synthesis());
}

struct RobinCondition {
  double p = 1.0;  // p u + q du/dnu = g on the boundary
  double q = 0.0;
};

// Solves (c - Laplacian) u = rhs in B with p u + q u_r = g on the boundary.
// Constant Robin coefficients keep the Fourier modes decoupled.
inline DiscField helmholtz_solve(double c, const DiscField& rhs, const RobinCondition& robin, const BoundaryField& g_bc) {
  const auto& g = *rhs.grid();
  if (g_bc.grid()->n_theta() != g.n_theta()) throw DimensionError("boundary data does not match grid");
  if (robin.p == 0.0 && robin.q == 0.0) throw SolvabilityError("degenerate boundary condition p = q = 0");
  const int n = g.n_r();
  Eigen::MatrixXd rc = rhs.values() * g.analysis();
  Eigen::RowVectorXd gc = g_bc.values().transpose() * g.analysis();
  Eigen::MatrixXd sol(n, g.n_theta());
  Eigen::ArrayXd inv_r = g.radii().array().inverse();

  const bool neumann_zero = (c == 0.0 && robin.p == 0.0);
  if (neumann_zero) {
    const double lhs = integrate_disc(rhs) + integrate_boundary(g_bc) / robin.q;
    const double scale = std::abs(integrate_disc(rhs.map([](double v) { return std::abs(v); }))) +
                         std::abs(integrate_boundary(g_bc) / robin.q) + 1.0;
    if (std::abs(lhs) > 1e-8 * scale) {
      throw SolvabilityError("pure Neumann problem with incompatible data (defect " + std::to_string(lhs) + ")");
    }
  }

  std::vector<std::unique_ptr<Eigen::FullPivLU<Eigen::MatrixXd>>> lus(g.nyquist() + 1);
  for (int col = 0; col < g.n_theta(); ++col) {
    const int m = g.mode_of_column(col);
    const int par = m % 2;
    Eigen::VectorXd b = rc.col(col);
    b(0) = gc(col);
    if (lus[m]) {
      sol.col(col) = lus[m]->solve(b);
      continue;
    }
    Eigen::MatrixXd A = -(g.d2(par) + (g.d1(par).array().colwise() * inv_r).matrix());
    A.diagonal().array() += double(m) * m * inv_r.square() + c;
    A.row(0) = robin.q * g.d1(par).row(0);
    A(0, 0) += robin.p;
    if (neumann_zero && m == 0) {
      // null space = constants; pin the disc mean to zero
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
      B.topLeftCorner(n, n) = A;
      B.topRightCorner(n, 1).setOnes();
      B.bottomLeftCorner(1, n) = g.radial_weights().transpose();
      Eigen::VectorXd bb(n + 1);
      bb.head(n) = b;
      bb(n) = 0.0;
      sol.col(col) = B.fullPivLu().solve(bb).head(n);
      continue;
    }
    lus[m] = std::make_unique<Eigen::FullPivLU<Eigen::MatrixXd>>(A);
    if (!lus[m]->isInvertible()) throw SolvabilityError("singular radial system in mode " + std::to_string(m));
    sol.col(col) = lus[m]->solve(b);
  }
  return DiscField(rhs.grid(), sol * g.synthesis());
}

// ---------------------------------------------------------------------------
// spectral interpolation at arbitrary points of the closed disc

class FieldInterpolant {
 public:
  explicit FieldInterpolant(const DiscField& u) : grid_(u.grid()), coeff_(u.values() * u.grid()->analysis()) {}

  double operator()(Complex z) const {
    const auto& g = *grid_;
    const int n = g.n_r();
    double rho = std::abs(z);
    if (rho > 1.0) rho = 1.0;
    const double phi = std::arg(z);
    radial_basis(rho);
    Eigen::RowVectorXd ce = le_.transpose() * coeff_;
    Eigen::RowVectorXd co = lo_.transpose() * coeff_;
    double acc = ce(0);
    const int M = g.nyquist();
    for (int m = 1; m < M; ++m) {
      const auto& cc = (m % 2) ? co : ce;
      acc += cc(2 * m - 1) * std::cos(m * phi) + cc(2 * m) * std::sin(m * phi);
    }
    acc += ((M % 2) ? co : ce)(g.n_theta() - 1) * std::cos(M * phi);
    (void)n;
    return acc;
  }

 private:
  // folded Lagrange basis on the doubled Chebyshev grid
  void radial_basis(double rho) const {
    const auto& g = *grid_;
    const auto& x = g.cheb_nodes();
    const auto& w = g.cheb_bary();
    const int N = int(x.size()) - 1;
    const int n = g.n_r();
    Eigen::VectorXd l(N + 1);
    int hit = -1;
    for (int j = 0; j <= N; ++j) {
      if (rho == x(j)) { hit = j; break; }
    }
    if (hit >= 0) {
      l.setZero();
      l(hit) = 1.0;
    } else {
      double den = 0.0;
      for (int j = 0; j <= N; ++j) {
        l(j) = w(j) / (rho - x(j));
        den += l(j);
      }
      l /= den;
    }
    le_.resize(n);
    lo_.resize(n);
    for (int i = 0; i < n; ++i) {
      le_(i) = l(i) + l(N - i);
      lo_(i) = l(i) - l(N - i);
    }
  }

  GridPtr grid_;
  Eigen::MatrixXd coeff_;
  mutable Eigen::VectorXd le_, lo_;
};

class BoundaryInterpolant {
 public:
  explicit BoundaryInterpolant(const BoundaryField& b)
      : grid_(b.grid()), coeff_(b.values().transpose() * b.grid()->analysis()) {}
  double operator()(double phi) const {
    const auto& g = *grid_;
    const int M = g.nyquist();
    double acc = coeff_(0);
    for (int m = 1; m < M; ++m) acc += coeff_(2 * m - 1) * std::cos(m * phi) + coeff_(2 * m) * std::sin(m * phi);
    return acc + coeff_(g.n_theta() - 1) * std::cos(M * phi);
  }

 private:
  GridPtr grid_;
  Eigen::RowVectorXd coeff_;
};

}  // namespace pcflow
