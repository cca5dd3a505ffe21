#pragma once

// Helpers shared by the scheme and the diagnostics.

#include <cmath>

#include "envara/grid_ops.hpp"
#include "envara/problem_model.hpp"

namespace envara::detail {

/// Mass-weighted mobility coefficient w_i u0_i^2/D~x_i / f(u0_i/D~x_i),
/// written as m_i u_i / f(u_i). Zero where the node carries no mass.
inline NodeField mobility_weights(const NodeField& x_old, const LagrangianGrid& grid,
                                  const ProblemSpec& spec) {
  const int M = grid.cells();
  NodeField a(M + 1, 0.0);
  for (int i = 0; i <= M; ++i) {
    const double m = grid.node_mass(i);
    if (m == 0.0) continue;
    double jac;
    if (i == 0)
      jac = (x_old[1] - x_old[0]) / grid.width(0);
    else if (i == M)
      jac = (x_old[M] - x_old[M - 1]) / grid.width(M - 1);
    else
      jac = (x_old[i + 1] - x_old[i - 1]) / (grid.X[i + 1] - grid.X[i - 1]);
    const double u = grid.u0_nodes[i] / jac;
    a[i] = m * u / spec.mobility.f(u);
  }
  return a;
}

/// P(u) = u H'(u) - H(u); the derivative of H(c/d) d in d is -P(c/d).
inline double pressure(const InternalEnergy& e, double u) { return u * e.H_prime(u) - e.H(u); }

/// Second derivative of H(c/d) d in the width d: (c^2/d^3) H''(c/d).
inline double width_curvature(const InternalEnergy& e, double c, double d) {
  const double u = c / d;
  return u * u / d * e.H_double_prime(u);
}

}  // namespace envara::detail
