#pragma once

// Random band-limited test fields: polynomials in (x, y) of bounded degree,
// written as r^k cos(m theta), r^k sin(m theta) with k >= m, k = m mod 2.

#include <random>

#include "pcflow/grid.hpp"

namespace pcflow {

inline DiscField random_bandlimited(GridPtr g, std::mt19937_64& rng, int max_degree = 6, double amplitude = 0.5) {
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  DiscField u(g);
  for (int m = 0; m <= max_degree; ++m) {
    for (int k = m; k <= max_degree; k += 2) {
      const double a = coef(rng);
      const double b = m > 0 ? coef(rng) : 0.0;
      for (int i = 0; i < g->n_r(); ++i) {
        const double rk = std::pow(g->r(i), k);
        for (int t = 0; t < g->n_theta(); ++t) {
          const double th = g->theta(t);
          u(i, t) += rk * (a * std::cos(m * th) + b * std::sin(m * th));
        }
      }
    }
  }
  return u;
}

inline BoundaryField random_trig(GridPtr g, std::mt19937_64& rng, int max_mode = 6, double amplitude = 0.5) {
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  BoundaryField b(g);
  for (int m = 0; m <= max_mode; ++m) {
    const double a = coef(rng);
    const double c = m > 0 ? coef(rng) : 0.0;
    for (int t = 0; t < g->n_theta(); ++t) b(t) += a * std::cos(m * g->theta(t)) + c * std::sin(m * g->theta(t));
  }
  return b;
}

}  // namespace pcflow
