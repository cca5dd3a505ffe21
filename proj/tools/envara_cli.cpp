// Command-line driver: envara_cli <run|converge|waiting-time|steady> [flags]
//
// Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
// 1 anything else (for example an unwritable output directory).

#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "envara/experiments.hpp"
#include "envara/state.hpp"

namespace {

struct Flags {
  std::string example = "ex1";
  int M = 100;
  double tau = 1e-2;
  double T = 1.0;
  std::optional<double> m, nu, beta, mass, sigma, kernel_coeff;
  std::vector<double> theta;
  double merge_tol = 1e-9;
  double newton_tol = 1e-12;
  bool no_merge = false;
  int levels = 3;
  std::string out = "out";
  long snapshot_every = 0;
  unsigned seed = 0;
  std::string reference = "exact";
  int ref_factor = 8;
  int ref_tau_divisor = 64;
  int steady_window = 0;
  double steady_tol = 1e-12;
  double steady_move_tol = 1e-14;
};

envara::ExperimentConfig to_config(const Flags& f, const std::string& command) {
  envara::ExperimentConfig c;
  c.example = envara::parse_example_id(f.example);
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) c.params[key] = *v;
  };
  put("m", f.m);
  put("nu", f.nu);
  put("beta", f.beta);
  put("mass", f.mass);
  put("sigma", f.sigma);
  put("kernel_coeff", f.kernel_coeff);
  if (command == "waiting-time") {
    if (!f.theta.empty()) c.thetas = f.theta;
  } else if (f.theta.size() > 1) {
    throw std::invalid_argument("--theta takes a list only for waiting-time");
  } else if (f.theta.size() == 1) {
    c.params["theta"] = f.theta.front();
  }
  c.M = f.M;
  c.tau = f.tau;
  c.T = f.T;
  c.solver.merge_tol = f.merge_tol;
  c.solver.newton_tol = f.newton_tol;
  c.solver.merge = !f.no_merge;
  c.levels = f.levels;
  c.out_dir = f.out;
  c.snapshot_every = f.snapshot_every;
  c.seed = f.seed;
  if (f.reference == "exact")
    c.reference = envara::ReferenceMode::exact;
  else if (f.reference == "refined")
    c.reference = envara::ReferenceMode::refined;
  else
    throw std::invalid_argument("--reference must be 'exact' or 'refined'");
  c.ref_factor = f.ref_factor;
  c.ref_tau_divisor = f.ref_tau_divisor;
  c.steady_window = f.steady_window;
  c.steady_tol = f.steady_tol;
  c.steady_move_tol = f.steady_move_tol;
  // Building the spec here surfaces parameter errors before any work.
  c.validate();
  (void)c.spec();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian solver for nonlinear Fokker-Planck equations"};
  app.set_config("--config", "", "key=value file, one flag per line; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--example", f.example, "ex1..ex5")->capture_default_str();
  app.add_option("--M", f.M, "number of cells")->capture_default_str();
  app.add_option("--tau", f.tau, "time step")->capture_default_str();
  app.add_option("--T", f.T, "final time")->capture_default_str();
  app.add_option("--m", f.m, "diffusion exponent");
  app.add_option("--nu", f.nu, "diffusion coefficient");
  app.add_option("--theta", f.theta, "ex3 initial-data parameter (a list for waiting-time)")
      ->delimiter(',');
  app.add_option("--beta", f.beta, "ex4 confinement strength");
  app.add_option("--mass", f.mass, "total initial mass");
  app.add_option("--sigma", f.sigma, "Gaussian width");
  app.add_option("--kernel-coeff", f.kernel_coeff, "ex3 kernel slope; negative balances the boundary force");
  app.add_option("--merge-tol", f.merge_tol, "particle merging gap")->capture_default_str();
  app.add_flag("--no-merge", f.no_merge, "disable particle merging");
  app.add_option("--newton-tol", f.newton_tol, "Newton increment tolerance")
      ->capture_default_str();
  app.add_option("--levels", f.levels, "refinement levels for converge")->capture_default_str();
  app.add_option("--out", f.out, "output directory")->capture_default_str();
  app.add_option("--snapshot-every", f.snapshot_every, "snapshot cadence in steps (0: none)")
      ->capture_default_str();
  app.add_option("--seed", f.seed, "random initial data for ex1 (0: off)")->capture_default_str();
  app.add_option("--reference", f.reference, "exact | refined")->capture_default_str();
  app.add_option("--ref-factor", f.ref_factor, "reference M over finest M")->capture_default_str();
  app.add_option("--ref-tau-divisor", f.ref_tau_divisor, "finest tau over reference tau")
      ->capture_default_str();
  app.add_option("--steady-window", f.steady_window, "run: stop when the energy is flat over this many steps (0: off)")
      ->capture_default_str();
  app.add_option("--steady-tol", f.steady_tol, "run: relative energy tolerance for --steady-window")
      ->capture_default_str();
  app.add_option("--steady-move-tol", f.steady_move_tol,
                 "steady: stop once no node moves more than this in one step")
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "run one example, writing energy and snapshots");
  auto* converge = app.add_subcommand("converge", "convergence study, writing errors.csv");
  auto* waiting = app.add_subcommand("waiting-time", "waiting-time sweep, writing waiting.csv");
  auto* steady = app.add_subcommand("steady", "run to steady state and restart, writing steady.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command;
  if (run->parsed()) command = "run";
  if (converge->parsed()) command = "converge";
  if (waiting->parsed()) command = "waiting-time";
  if (steady->parsed()) command = "steady";

  envara::ExperimentConfig config;
  try {
    config = to_config(f, command);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  }

  try {
    if (command == "run") envara::cmd_run(config);
    if (command == "converge") envara::cmd_converge(config);
    if (command == "waiting-time") envara::cmd_waiting_time(config);
    if (command == "steady") envara::cmd_steady(config);
  } catch (const envara::StepFailure& e) {
    std::cerr << "solver failure at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  } catch (const envara::LeftAdmissibleSet& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const envara::EnergyIncrease& e) {
    std::cerr << "solver failure at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
