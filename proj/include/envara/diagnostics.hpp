#pragma once

#include <span>
#include <vector>

#include "envara/grid_ops.hpp"
#include "envara/problem_model.hpp"
#include "envara/state.hpp"

namespace envara {

struct EnergyReport {
  double E = 0.0;    // total discrete energy
  double E_c = 0.0;  // convex part
  double E_e = 0.0;  // concave part, E = E_c - E_e
  double dissipation_bound = 0.0;  // -<mobility * rate, rate>_E of the step that led here
  double t = 0.0;
};

/// Discrete total energy
///   <H(u0/D_h x), D_h x>_C + <u0, V(x)>_E + 1/2 <u0, <W(x - y), u0>>_E
/// and its convex/concave split. Reuses the state's pair cache when it
/// matches the positions.
EnergyReport discrete_energy(const TrajectoryState& state, const ProblemSpec& spec);

/// Energy of arbitrary positions on a grid (no cache).
EnergyReport discrete_energy(const NodeField& x, const LagrangianGrid& grid,
                             const ProblemSpec& spec);

/// -<[u0^2/D~x_old] / f(u0/D~x_old) * rate, rate>_E with
/// rate = (x_new - x_old)/tau; always <= 0.
double dissipation_bound(const NodeField& x_new, const NodeField& x_old, const ProblemSpec& spec,
                         const LagrangianGrid& grid, double tau);

struct SteadyResidual {
  NodeField residual;
  double max_norm = 0.0;
};

/// Interior rows of the discrete steady-state equations with the unsplit
/// V' and W'. Boundary rows are zero when pinned and carry the boundary
/// velocity when free.
SteadyResidual steady_residual(const TrajectoryState& state, const ProblemSpec& spec);

/// E_N(state) - E_N(steady).
double relative_energy(const TrajectoryState& state, const TrajectoryState& steady,
                       const ProblemSpec& spec);

/// True when |E^n - E^{n-window}| <= tol (1 + |E^n|).
bool detect_steady(std::span<const EnergyReport> history, int window, double tol);

}  // namespace envara
