#pragma once

// Implicit convex-splitting step for the trajectory equation
//
//   u0^2/x_X / f(u0/x_X) x_t = -[u H'(u) - H(u)]_X - u0 V'(x) - u0 S(x),
//   u = u0 / x_X,
//
// on the Lagrangian grid. The convex parts (H, V_c, W_c) are implicit, the
// concave parts (V_e, W_e) explicit; each step is the minimizer of a convex
// functional J and is computed by Newton's method with damping into the
// admissible set of strictly increasing positions.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "envara/diagnostics.hpp"
#include "envara/grid_ops.hpp"
#include "envara/problem_model.hpp"
#include "envara/state.hpp"

namespace envara {

struct SolverConfig {
  double tau = 1e-2;
  double newton_tol = 1e-12;  // max-norm of the Newton increment
  int newton_max_iter = 50;
  double damping_shrink = 0.5;
  double merge_tol = 1e-9;
  bool merge = true;
  // Allowed energy increase per step, relative to 1 + |E|.
  double energy_slack = 1e-10;
  bool check_energy = true;
  // When Newton fails the step is split into two halves, recursively, up
  // to this depth (0: no retry). Particles are merged between substeps.
  int max_halvings = 30;

  void validate() const;
};

struct NonlocalSums {
  NodeField S_c;        // <W_c'(x_i - y), u0>_E at the evaluation positions
  NodeField S_e;        // <W_e'(x_i - y), u0>_E at the old positions
  NodeField S_c_prime;  // <W_c''(x_i - y), u0>_E at the evaluation positions
};

NonlocalSums nonlocal_sums(const NodeField& x_eval, const NodeField& x_old, const ProblemSpec& spec,
                           const LagrangianGrid& grid);

/// Residual of the step equations at a candidate x_new: interior rows are
/// LHS - RHS of the discrete trajectory equation (force per unit reference
/// length); boundary rows are x - X (pinned) or the free-boundary velocity
/// equation. Throws LeftAdmissibleSet if x_new is not strictly increasing.
NodeField step_residual(const NodeField& x_new, const NodeField& x_old, const ProblemSpec& spec,
                        const LagrangianGrid& grid, const SolverConfig& config);

/// The convex step functional; +infinity outside the admissible set.
double functional_J(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                    const LagrangianGrid& grid, const SolverConfig& config);

/// Relative mismatch between the centered difference of J along v and
/// <step_residual(z), v>_E, scaled by |residual|_E |v|_E. v must vanish at
/// both end nodes.
double directional_mismatch(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                            const LagrangianGrid& grid, const SolverConfig& config,
                            const NodeField& v, double delta);

/// Worst directional_mismatch over `directions` random interior directions.
/// Halves delta (up to 20 times) when a perturbed point leaves the
/// admissible set.
double grad_check(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                  const LagrangianGrid& grid, const SolverConfig& config, double delta,
                  int directions = 8, unsigned seed = 1);

struct NewtonResult {
  NodeField x;
  int iterations = 0;
  double final_residual = 0.0;  // max-norm of step_residual at x
  double last_increment = 0.0;
  std::vector<double> merit_history;  // J (pinned) at each accepted iterate
};

/// Solves one step. Throws StepFailure when the iteration budget is
/// exhausted or damping underflows.
NewtonResult newton_solve(const NodeField& x_old, const ProblemSpec& spec,
                          const LagrangianGrid& grid, const SolverConfig& config);

class EnergyIncrease : public std::runtime_error {
 public:
  EnergyIncrease(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

struct StepReport {
  double energy_old = 0.0;
  double energy_new = 0.0;
  double dissipation_bound = 0.0;  // tau-scaled: tau * (quadratic form rate)
  int newton_iterations = 0;
  int substeps = 1;
  int merged = 0;
};

struct StepOutcome {
  TrajectoryState state;
  StepReport report;
};

/// One Newton-solved step followed by particle merging. Throws StepFailure
/// once the halving budget is spent and EnergyIncrease if the discrete
/// energy (after merging) grows beyond the configured slack.
StepOutcome advance_step(const TrajectoryState& state, const ProblemSpec& spec,
                         const SolverConfig& config);

TrajectoryState advance(const TrajectoryState& state, const ProblemSpec& spec,
                        const SolverConfig& config);

struct MergeEvent {
  long step = 0;
  double t = 0.0;
  int count = 0;
  int retained_nodes = 0;
};

struct RunOptions {
  double final_time = 1.0;
  // Observer cadence in steps (0 disables); the observer also sees the
  // initial and final states.
  long snapshot_every = 0;
  std::function<void(const TrajectoryState&, const EnergyReport&)> observer;
  // Stop early when detect_steady fires (window <= 0 disables).
  int steady_window = 0;
  double steady_tol = 1e-12;
  // Per-step hook, called after every accepted step.
  std::function<void(const TrajectoryState&, const StepReport&)> on_step;
  // Ends the run after the current step when it returns true.
  std::function<bool(const TrajectoryState&, const StepReport&)> stop_when;
};

struct SimulationResult {
  TrajectoryState final_state;
  std::vector<EnergyReport> energy;  // one entry per time level, starting at t = 0
  std::vector<MergeEvent> merges;
  bool reached_steady = false;
  long steps = 0;
};

SimulationResult run_simulation(const ProblemSpec& spec, const TrajectoryState& initial,
                                const SolverConfig& config, const RunOptions& options);

/// Convenience overload starting from the identity map on `cells` cells.
SimulationResult run_simulation(const ProblemSpec& spec, int cells, const SolverConfig& config,
                                const RunOptions& options);

}  // namespace envara
