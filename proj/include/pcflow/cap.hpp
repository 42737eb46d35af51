#pragma once

// Round-cap reference geometry on the disc: cap profiles, the Steklov problem
// pulled back by the scaled stereographic projection, the lifted conformal
// fields xi_1, xi_2 and the Kazdan-Warner type residual.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pcflow/conformal.hpp"
#include "pcflow/grid.hpp"
#include "pcflow/model.hpp"

namespace pcflow {

// log( 2R / sqrt(scale) / (1 + R^2 |z|^2) )
inline DiscField cap_profile(GridPtr g, double R, double scale = 1.0) {
  (void)CapGeometry(R);
  if (!(scale > 0.0)) throw DomainError("cap scale must be positive");
  const double c = std::log(2.0 * R) - 0.5 * std::log(scale);
  return DiscField::from_polar(g, [=](double r, double) { return c - std::log1p(R * R * r * r); });
}

// Weights of the two measures used on the cap. mu_hat: 2 e^{2 w_R} dz inside
// and k_R e^{w_R} ds0 = sigma ds0 on the boundary. mu_R: e^{2 vbar} dz and
// e^{vbar} ds0 for a normalized limit profile vbar.
struct CapMeasures {
  DiscField interior;
  BoundaryField boundary;

  double inner(const DiscField& a, const DiscField& b) const {
    return integrate_disc(interior * a * b) + integrate_boundary(boundary * a.boundary() * b.boundary());
  }
  double total() const { return integrate_disc(interior) + integrate_boundary(boundary); }
};

inline CapMeasures mu_hat(GridPtr g, double R) {
  CapGeometry geo(R);
  DiscField w = cap_metric_factor(g, R);
  return {2.0 * (w * w), BoundaryField::constant(g, geo.sigma)};
}

inline CapMeasures mu_R(const DiscField& vbar) { return {vbar.exp(2), vbar.boundary().exp()}; }

struct SteklovSpectrum {
  std::vector<double> eigenvalues;
  std::vector<DiscField> eigenfunctions;
  std::vector<int> modes;  // Fourier mode of each pair
};

inline SteklovSpectrum steklov_spectrum(GridPtr g, double R, int n_eigs) {
  CapGeometry geo(R);
  if (!(R < 1.0)) throw DomainError("Steklov problem needs R < 1");
  if (n_eigs < 1 || n_eigs > g->size()) throw DimensionError("n_eigs must lie in [1, n_r * n_theta]");
  const int n = g->n_r();
  const int M = g->nyquist();
  Eigen::ArrayXd inv_r = g->radii().array().inverse();
  Eigen::VectorXd bdiag(n);
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * R / (1.0 + R * R * g->r(i) * g->r(i));
    bdiag(i) = 2.0 * w * w;
  }
  bdiag(0) = geo.sigma;

  struct Pair {
    double lambda;
    int m;
    bool sine;
    Eigen::VectorXd radial;
  };
  std::vector<Pair> pairs;
  for (int m = 0; m <= M; ++m) {
    const int par = m % 2;
    Eigen::MatrixXd A = -(g->d2(par) + (g->d1(par).array().colwise() * inv_r).matrix());
    A.diagonal().array() += double(m) * m * inv_r.square();
    A.row(0) = g->d1(par).row(0);
    Eigen::MatrixXd C = bdiag.asDiagonal().inverse() * A;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);
    for (int q = 0; q < n; ++q) {
      const auto lam = es.eigenvalues()(q);
      if (std::abs(lam.imag()) > 1e-8 * (1.0 + std::abs(lam.real()))) continue;
      Eigen::VectorXd vec = es.eigenvectors().col(q).real();
      pairs.push_back({lam.real(), m, false, vec});
      if (m > 0 && m < M) pairs.push_back({lam.real(), m, true, vec});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });
  if (int(pairs.size()) < n_eigs) throw DimensionError("not enough real eigenpairs resolved on this grid");

  CapMeasures mh = mu_hat(g, R);
  SteklovSpectrum out;
  for (int q = 0; q < n_eigs; ++q) {
    const auto& p = pairs[q];
    DiscField phi = DiscField::from_polar(g, [](double, double) { return 0.0; });
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < g->n_theta(); ++k) {
        const double t = g->theta(k);
        phi(i, k) = p.radial(i) * (p.sine ? std::sin(p.m * t) : std::cos(p.m * t));
      }
    }
    // Gram-Schmidt in mu_hat
    for (const auto& prev : out.eigenfunctions) phi -= mh.inner(phi, prev) * prev;
    phi *= 1.0 / std::sqrt(mh.inner(phi, phi));
    out.eigenvalues.push_back(p.lambda);
    out.eigenfunctions.push_back(std::move(phi));
    out.modes.push_back(p.m);
  }
  return out;
}

// Pulled-back coordinate functions X = Psi_R(z) of the cap S^2_R.
inline std::array<DiscField, 3> cap_coordinates(GridPtr g, double R) {
  std::array<DiscField, 3> X{DiscField(g), DiscField(g), DiscField(g)};
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Complex w = R * g->node(i, k);
      const double q = 1.0 + std::norm(w);
      X[0](i, k) = 2.0 * w.real() / q;
      X[1](i, k) = 2.0 * w.imag() / q;
      X[2](i, k) = (1.0 - std::norm(w)) / q;
    }
  }
  return X;
}

// Disc-coordinate components of the pushed-down conformal fields.
struct TangentFields {
  DiscField xi1_x, xi1_y, xi2_x, xi2_y;
};

inline TangentFields lifted_tangent_fields(GridPtr g, double R) {
  CapGeometry geo(R);
  const double s = geo.sigma;
  TangentFields t{DiscField(g), DiscField(g), DiscField(g), DiscField(g)};
  for (int i = 0; i < g->n_r(); ++i) {
    for (int k = 0; k < g->n_theta(); ++k) {
      const Complex w = R * g->node(i, k);
      const double q = 1.0 + std::norm(w);
      const double X1 = 2.0 * w.real() / q, X2 = 2.0 * w.imag() / q, X3 = (1.0 - std::norm(w)) / q;
      // grad X_i = e_i - X_i X;  X x e2 = (-X3, 0, X1);  X x e1 = (0, X3, -X2)
      const std::array<double, 3> v1{1.0 - X1 * X1 - s * X3, -X1 * X2, -X1 * X3 + s * X1};
      const std::array<double, 3> v2{-X2 * X1, 1.0 - X2 * X2 - s * X3, -X2 * X3 + s * X2};
      // d(pi)(V) for pi(X) = (X1, X2)/(1 + X3), then z = w / R
      auto push = [&](const std::array<double, 3>& V) {
        const double d = 1.0 + X3;
        return std::array<double, 2>{(V[0] / d - X1 * V[2] / (d * d)) / R, (V[1] / d - X2 * V[2] / (d * d)) / R};
      };
      const auto p1 = push(v1), p2 = push(v2);
      t.xi1_x(i, k) = p1[0];
      t.xi1_y(i, k) = p1[1];
      t.xi2_x(i, k) = p2[0];
      t.xi2_y(i, k) = p2[1];
    }
  }
  return t;
}

// divergence with respect to the cap metric e^{2 w_R}|dz|^2
inline DiscField cap_divergence(const DiscField& vx, const DiscField& vy, double R) {
  DiscField w = cap_metric_factor(vx.grid(), R);
  DiscField w2 = w * w;
  auto [ax, ay] = gradient(w2 * vx);
  auto [bx, by] = gradient(w2 * vy);
  return (ax + by) / w2;
}

// (1/2 int dK.xi_i dmu_g + int dk.xi_i ds_g) for g = e^{2 u_cap} g_{S^2} on the cap
inline Vec2 kazdan_warner_residual(const DiscField& u_cap, double R) {
  const auto& g = u_cap.grid();
  DiscField U = u_cap + DiscField::from_polar(g, [R](double r, double) { return std::log(2.0 * R / (1.0 + R * R * r * r)); });
  DiscField K = gauss_curvature(U);
  BoundaryField k = geodesic_curvature(U);
  BoundaryField dk = theta_derivative(k);
  auto [Kx, Ky] = gradient(K);
  TangentFields t = lifted_tangent_fields(g, R);
  DiscField e2U = U.exp(2);
  BoundaryField eU = U.boundary().exp();
  BoundaryField tau1(g), tau2(g);
  for (int kk = 0; kk < g->n_theta(); ++kk) {
    const double c = std::cos(g->theta(kk)), s = std::sin(g->theta(kk));
    tau1(kk) = -s * t.xi1_x(0, kk) + c * t.xi1_y(0, kk);
    tau2(kk) = -s * t.xi2_x(0, kk) + c * t.xi2_y(0, kk);
  }
  Vec2 out;
  out(0) = 0.5 * integrate_disc((Kx * t.xi1_x + Ky * t.xi1_y) * e2U) + integrate_boundary(dk * tau1 * eU);
  out(1) = 0.5 * integrate_disc((Kx * t.xi2_x + Ky * t.xi2_y) * e2U) + integrate_boundary(dk * tau2 * eU);
  return out;
}

}  // namespace pcflow
