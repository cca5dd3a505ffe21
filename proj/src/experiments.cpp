#include "envara/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>

#include "envara/csv.hpp"
#include "envara/density_map.hpp"
#include "envara/diagnostics.hpp"
#include "envara/waiting_time.hpp"

namespace envara {

void ExperimentConfig::validate() const {
  if (M < 2) throw std::invalid_argument("M must be at least 2");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be nonnegative");
  if (snapshot_every < 0) throw std::invalid_argument("snapshot cadence must be nonnegative");
  if (levels < 1) throw std::invalid_argument("levels must be positive");
  if (ref_factor < 2) throw std::invalid_argument("reference must be strictly finer (factor >= 2)");
  if (ref_tau_divisor < 1) throw std::invalid_argument("reference tau divisor must be positive");
  if (steady_window < 0) throw std::invalid_argument("steady window must be nonnegative");
  if (!(steady_move_tol > 0.0)) throw std::invalid_argument("steady move tolerance must be positive");
  if (restart_steps < 0) throw std::invalid_argument("restart steps must be nonnegative");
  solver_config().validate();
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig c = solver;
  c.tau = tau;
  return c;
}

ProblemSpec ExperimentConfig::spec() const {
  ParamMap p = default_params(example);
  for (const auto& [k, v] : params) p[k] = v;
  ProblemSpec s = build_example(example, p);
  if (seed != 0 && example == ExampleId::ex1) s = with_random_initial(std::move(s), seed);
  return s;
}

ProblemSpec with_random_initial(ProblemSpec spec, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> a(4);
  for (double& v : a) v = dist(rng);
  const double lo = spec.support.lo, hi = spec.support.hi;
  auto shape = [a, lo, hi](double x) {
    const double s = (2.0 * x - lo - hi) / (hi - lo);
    if (std::abs(s) >= 1.0) return 0.0;
    double f = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      f += a[k] * std::cos((k + 1) * std::numbers::pi * s) / (4.0 * (k + 1));
    return (1.0 - s * s) * f;
  };
  // Normalize to unit mass with a fine trapezoid rule.
  const int n = 20000;
  const double h = (hi - lo) / n;
  double mass = 0.0;
  for (int i = 1; i < n; ++i) mass += h * shape(lo + i * h);
  spec.u0 = [shape, mass](double x) { return shape(x) / mass; };
  spec.name += "-random";
  return spec;
}

std::optional<ScalarFn> exact_steady_density(ExampleId id, const ParamMap& params) {
  ParamMap p = default_params(id);
  for (const auto& [k, v] : params) p[k] = v;
  if (id == ExampleId::ex1) {
    if (p.at("m") != 2.0) return std::nullopt;
    const double C = std::pow(3.0 / 8.0, 2.0 / 3.0);
    return ScalarFn([C](double x) { return std::max(C - 0.25 * x * x, 0.0); });
  }
  if (id == ExampleId::ex2) {
    const ParamMap d = default_params(id);
    if (p != d) return std::nullopt;
    return ScalarFn([](double x) {
      const double V = 0.25 * x * x * x * x - 0.5 * x * x;
      return std::max(-3.0 / 16.0 - V, 0.0);
    });
  }
  return std::nullopt;
}

namespace {

TrajectoryState run_to(const ProblemSpec& spec, int M, double tau, double T,
                       const SolverConfig& base) {
  SolverConfig c = base;
  c.tau = tau;
  RunOptions opt;
  opt.final_time = T;
  return run_simulation(spec, M, c, opt).final_state;
}

std::optional<double> order(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
  return std::log2(coarse / fine);
}

std::string snapshot_name(const std::string& dir, const char* stem, long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06ld.csv", stem, step);
  return (std::filesystem::path(dir) / buf).string();
}

void write_trajectory(const std::string& path, const TrajectoryState& s) {
  CsvWriter w(path, {"i", "X", "x"});
  for (int i = 0; i <= s.cells(); ++i) w.row({static_cast<long>(i), s.grid.X[i], s.x[i]});
}

void write_density(const std::string& path, const TrajectoryState& s) {
  const DensitySample d = density_from_trajectory(s);
  CsvWriter w(path, {"x", "u", "mass"});
  for (std::size_t i = 0; i < d.positions.size(); ++i)
    w.row({d.positions[i], d.density[i], d.masses[i]});
}

std::string out_path(const ExperimentConfig& c, const char* file) {
  return (std::filesystem::path(c.out_dir) / file).string();
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& config) {
  config.validate();
  if (config.levels < 2) throw std::invalid_argument("a convergence study needs levels >= 2");
  const ProblemSpec spec = config.spec();
  const SolverConfig base = config.solver_config();
  const Interval span = spec.boundary_mode == BoundaryMode::free ? spec.support : spec.domain;

  std::optional<ScalarFn> exact;
  if (config.reference == ReferenceMode::exact) {
    if (config.seed == 0) exact = exact_steady_density(config.example, config.params);
    if (!exact)
      throw std::invalid_argument("no closed-form steady state for " + spec.name +
                                  "; use the refined reference");
  }

  std::vector<int> Ms;
  std::vector<double> taus;
  for (int k = 0; k < config.levels; ++k) {
    Ms.push_back(config.M << k);
    taus.push_back(config.tau / std::pow(4.0, k));
  }
  std::vector<std::future<TrajectoryState>> runs;
  for (int k = 0; k < config.levels; ++k)
    runs.push_back(std::async(std::launch::async, run_to, std::cref(spec), Ms[k], taus[k],
                              config.T, std::cref(base)));

  std::optional<TrajectoryState> ref;
  if (!exact) {
    const int M_ref = config.ref_factor * Ms.back();
    const double tau_ref = taus.back() / config.ref_tau_divisor;
    ref = run_to(spec, M_ref, tau_ref, config.T, base);
    if (ref->cells() != M_ref)
      throw std::runtime_error("reference run merged particles; nested comparison impossible");
  }

  std::vector<ConvergenceRow> rows;
  for (int k = 0; k < config.levels; ++k) {
    const TrajectoryState s = runs[k].get();
    if (s.cells() != Ms[k]) throw std::runtime_error("study run merged particles");
    const DensitySample d = density_from_trajectory(s);
    const NodeField widths = moving_mesh_widths(s.x);
    ConvergenceRow row;
    row.h = span.length() / Ms[k];
    row.tau = taus[k];
    NodeField eu(Ms[k] + 1);
    if (exact) {
      for (int i = 0; i <= Ms[k]; ++i) eu[i] = (*exact)(s.x[i]) - d.density[i];
      row.u = error_norms(eu, widths);
    } else {
      const DensitySample dr = density_from_trajectory(*ref);
      const int stride = ref->cells() / Ms[k];
      NodeField ex(Ms[k] + 1);
      for (int i = 0; i <= Ms[k]; ++i) {
        eu[i] = dr.density[i * stride] - d.density[i];
        ex[i] = ref->x[i * stride] - s.x[i];
      }
      row.u = error_norms(eu, widths);
      row.x = error_norms(ex, NodeField(Ms[k] + 1, row.h));
    }
    if (!rows.empty()) {
      const ConvergenceRow& prev = rows.back();
      row.order_u_L1 = order(prev.u.L1, row.u.L1);
      row.order_u_L2 = order(prev.u.L2, row.u.L2);
      row.order_u_Linf = order(prev.u.Linf, row.u.Linf);
      if (row.x && prev.x) {
        row.order_x_L2 = order(prev.x->L2, row.x->L2);
        row.order_x_Linf = order(prev.x->Linf, row.x->Linf);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<WaitingRow> waiting_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.thetas.empty()) throw std::invalid_argument("no theta values given");
  std::vector<std::future<WaitingRow>> jobs;
  for (double theta : config.thetas) {
    ExperimentConfig c = config;
    c.params["theta"] = theta;
    const ProblemSpec spec = c.spec();  // validates here, on the calling thread
    if (spec.boundary_mode != BoundaryMode::free)
      throw std::invalid_argument("waiting time needs a free-boundary example");
    jobs.push_back(std::async(std::launch::async, [spec, c, theta] {
      const WaitingTimeResult r = estimate_waiting_time(spec, c.solver_config(), c.M, c.T);
      return WaitingRow{theta, r.left.t_star, r.right.t_star};
    }));
  }
  std::vector<WaitingRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

SteadyCheck steady_check(const ExperimentConfig& config) {
  config.validate();
  const ProblemSpec spec = config.spec();
  const SolverConfig solver = config.solver_config();
  RunOptions opt;
  opt.final_time = config.T;
  NodeField previous = TrajectoryState::initial(spec, config.M).x;
  bool settled = false;
  opt.stop_when = [&](const TrajectoryState& st, const StepReport&) {
    if (st.x.size() == previous.size()) {
      double move = 0.0;
      for (std::size_t i = 0; i < st.x.size(); ++i)
        move = std::max(move, std::abs(st.x[i] - previous[i]));
      settled = move <= config.steady_move_tol;
    }
    previous = st.x;
    return settled;
  };
  const SimulationResult run = run_simulation(spec, config.M, solver, opt);

  SteadyCheck out;
  const TrajectoryState& s = run.final_state;
  out.t_stop = s.t;
  out.reached = settled;
  out.energy = discrete_energy(s, spec).E;
  out.residual = steady_residual(s, spec).max_norm;

  TrajectoryState r = s;
  double disp = 0.0;
  for (int n = 0; n < config.restart_steps; ++n) {
    r = advance(r, spec, solver);
    if (r.cells() != s.cells()) throw std::runtime_error("restart merged particles");
    for (std::size_t i = 0; i < r.x.size(); ++i) disp = std::max(disp, std::abs(r.x[i] - s.x[i]));
  }
  const double e1 = discrete_energy(r, spec).E;
  out.restart_energy_change =
      out.energy != 0.0 ? std::abs(e1 - out.energy) / std::abs(out.energy) : std::abs(e1);
  out.restart_displacement = disp;
  return out;
}

CriticalMass critical_mass(const ExperimentConfig& config, double beta, double lo, double hi,
                           int iterations) {
  if (config.example != ExampleId::ex4)
    throw std::invalid_argument("critical mass sweep is defined for ex4");
  if (!(0.0 < lo && lo < hi)) throw std::invalid_argument("need 0 < lo < hi");
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  config.validate();
  auto blows_up = [&](double mass) {
    ExperimentConfig c = config;
    c.params["beta"] = beta;
    c.params["mass"] = mass;
    RunOptions opt;
    opt.final_time = c.T;
    bool merged = false;
    opt.stop_when = [&merged](const TrajectoryState&, const StepReport& r) {
      merged = merged || r.merged > 0;
      return merged;
    };
    run_simulation(c.spec(), c.M, c.solver_config(), opt);
    return merged;
  };
  if (blows_up(lo)) throw std::runtime_error("lower mass bound already blows up");
  if (!blows_up(hi)) throw std::runtime_error("upper mass bound does not blow up");
  CriticalMass out{beta, lo, hi};
  for (int k = 0; k < iterations; ++k) {
    const double mid = out.estimate();
    (blows_up(mid) ? out.hi : out.lo) = mid;
  }
  return out;
}

void cmd_run(const ExperimentConfig& config) {
  config.validate();
  const ProblemSpec spec = config.spec();
  prepare_out_dir(config.out_dir);

  CsvWriter energy(out_path(config, "energy.csv"),
                   {"step", "t", "E", "E_c", "E_e", "dissipation_bound"});
  CsvWriter merges(out_path(config, "merges.csv"), {"step", "t", "count", "retained_nodes"});
  auto energy_row = [&](long step, const EnergyReport& e) {
    energy.row({step, e.t, e.E, e.E_c, e.E_e, e.dissipation_bound});
  };

  RunOptions opt;
  opt.final_time = config.T;
  opt.snapshot_every = config.snapshot_every;
  opt.steady_window = config.steady_window;
  opt.steady_tol = config.steady_tol;
  opt.observer = [&](const TrajectoryState& s, const EnergyReport&) {
    if (config.snapshot_every <= 0) return;
    write_trajectory(snapshot_name(config.out_dir, "trajectory", s.step), s);
    write_density(snapshot_name(config.out_dir, "density", s.step), s);
  };
  opt.on_step = [&](const TrajectoryState& s, const StepReport& r) {
    EnergyReport e = discrete_energy(s, spec);
    e.dissipation_bound = r.dissipation_bound / config.tau;
    energy_row(s.step, e);
    if (r.merged > 0) merges.row({s.step, s.t, static_cast<long>(r.merged),
                                  static_cast<long>(s.grid.nodes())});
  };

  const TrajectoryState initial = TrajectoryState::initial(spec, config.M);
  energy_row(0, discrete_energy(initial, spec));
  const SimulationResult result = run_simulation(spec, initial, config.solver_config(), opt);
  write_trajectory(out_path(config, "trajectory_final.csv"), result.final_state);
  write_density(out_path(config, "density_final.csv"), result.final_state);
}

void cmd_converge(const ExperimentConfig& config) {
  const std::vector<ConvergenceRow> rows = convergence_study(config);
  prepare_out_dir(config.out_dir);
  CsvWriter w(out_path(config, "errors.csv"),
              {"h", "tau", "u_L1", "u_L2", "u_Linf", "x_L2", "x_Linf", "order_u_L1", "order_u_L2",
               "order_u_Linf"});
  auto opt = [](const std::optional<double>& v) -> CsvWriter::Cell {
    if (v) return *v;
    return std::monostate{};
  };
  for (const ConvergenceRow& r : rows) {
    w.row({r.h, r.tau, r.u.L1, r.u.L2, r.u.Linf,
           r.x ? CsvWriter::Cell(r.x->L2) : CsvWriter::Cell(std::monostate{}),
           r.x ? CsvWriter::Cell(r.x->Linf) : CsvWriter::Cell(std::monostate{}),
           opt(r.order_u_L1), opt(r.order_u_L2), opt(r.order_u_Linf)});
  }
}

void cmd_waiting_time(const ExperimentConfig& config) {
  const std::vector<WaitingRow> rows = waiting_sweep(config);
  prepare_out_dir(config.out_dir);
  CsvWriter w(out_path(config, "waiting.csv"), {"theta", "t_star_left", "t_star_right"});
  for (const WaitingRow& r : rows) w.row({r.theta, r.t_star_left, r.t_star_right});
}

void cmd_steady(const ExperimentConfig& config) {
  const SteadyCheck c = steady_check(config);
  prepare_out_dir(config.out_dir);
  CsvWriter w(out_path(config, "steady.csv"),
              {"t_stop", "reached", "E", "residual_max", "restart_energy_change",
               "restart_displacement"});
  w.row({c.t_stop, static_cast<long>(c.reached), c.energy, c.residual, c.restart_energy_change,
         c.restart_displacement});
}

}  // namespace envara
