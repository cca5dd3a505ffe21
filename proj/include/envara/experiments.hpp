#pragma once

// Experiment harness behind the command-line driver: single runs,
// convergence studies, waiting-time sweeps and steady-state checks, all
// writing CSV files into an output directory.

#include <optional>
#include <string>
#include <vector>

#include "envara/grid_ops.hpp"
#include "envara/problem_model.hpp"
#include "envara/scheme.hpp"

namespace envara {

enum class ReferenceMode { exact, refined };

struct ExperimentConfig {
  ExampleId example = ExampleId::ex1;
  ParamMap params;  // overrides on top of default_params(example)
  int M = 100;
  double tau = 1e-2;
  double T = 1.0;
  SolverConfig solver;  // its tau is replaced by `tau`
  std::string out_dir = "out";
  long snapshot_every = 0;
  ReferenceMode reference = ReferenceMode::exact;
  int ref_factor = 8;         // M_ref = ref_factor * finest M
  int ref_tau_divisor = 64;   // tau_ref = finest tau / ref_tau_divisor
  int levels = 3;
  // Nonzero: ex1 starts from a seeded random profile of unit mass.
  unsigned seed = 0;
  std::vector<double> thetas{0.0, 0.25, 0.5, 0.75, 1.0};
  // run stops early once detect_steady fires (0: always run to T).
  int steady_window = 0;
  double steady_tol = 1e-12;
  // steady_check stops once no node moves more than this in one step.
  double steady_move_tol = 1e-14;
  int restart_steps = 100;

  /// Throws std::invalid_argument on a bad combination.
  void validate() const;
  [[nodiscard]] SolverConfig solver_config() const;
  [[nodiscard]] ProblemSpec spec() const;
};

/// ex1 initial data replaced by (1 - x^2) times a random cosine series,
/// rescaled to unit mass so that the steady state is unchanged.
ProblemSpec with_random_initial(ProblemSpec spec, unsigned seed);

/// Closed-form steady density, when one is known for the spec's
/// parameters (ex1 with m = 2 and unit mass; ex2 with its defaults).
std::optional<ScalarFn> exact_steady_density(ExampleId id, const ParamMap& params);

struct ConvergenceRow {
  double h = 0.0;
  double tau = 0.0;
  ErrorNorms u;
  std::optional<ErrorNorms> x;
  // log2 of consecutive error ratios; empty on the first row.
  std::optional<double> order_u_L1, order_u_L2, order_u_Linf, order_x_L2, order_x_Linf;
};

/// Runs config.levels levels with M, 2M, ... cells and tau, tau/4, ...
/// and measures errors against the exact steady density or a refined
/// run on a nested grid.
std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& config);

struct WaitingRow {
  double theta = 0.0;
  double t_star_left = 0.0;
  double t_star_right = 0.0;
};

std::vector<WaitingRow> waiting_sweep(const ExperimentConfig& config);

struct SteadyCheck {
  double t_stop = 0.0;
  bool reached = false;
  double energy = 0.0;
  double residual = 0.0;          // max-norm of the steady residual
  double restart_energy_change = 0.0;  // relative, after restart_steps more steps
  double restart_displacement = 0.0;   // max node displacement over the restart
};

/// Runs until no node moves more than steady_move_tol in one step (or
/// until T), then continues restart_steps steps from the final state.
SteadyCheck steady_check(const ExperimentConfig& config);

/// Bisection on the initial mass of ex4 for one beta: a run "blows up"
/// when particles merge before config.T. Returns the midpoint of the
/// final bracket [lo, hi].
struct CriticalMass {
  double beta = 0.0;
  double lo = 0.0;  // largest mass seen without merging
  double hi = 0.0;  // smallest mass seen with merging
  [[nodiscard]] double estimate() const { return 0.5 * (lo + hi); }
};
CriticalMass critical_mass(const ExperimentConfig& config, double beta, double lo, double hi,
                           int iterations);

// Subcommands; each writes its CSV files into config.out_dir.
void cmd_run(const ExperimentConfig& config);
void cmd_converge(const ExperimentConfig& config);
void cmd_waiting_time(const ExperimentConfig& config);
void cmd_steady(const ExperimentConfig& config);

}  // namespace envara
