#include "envara/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "detail.hpp"
#include "envara/density_map.hpp"
#include "envara/pair_sums.hpp"
#include "envara/tridiagonal.hpp"

namespace envara {

void SolverConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("Newton iteration budget must be positive");
  if (!(damping_shrink > 0.0 && damping_shrink < 1.0))
    throw std::invalid_argument("damping factor must lie in (0, 1)");
  if (!(merge_tol > 0.0)) throw std::invalid_argument("merge tolerance must be positive");
  if (max_halvings < 0) throw std::invalid_argument("halving depth must be nonnegative");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Everything about one step that does not depend on the unknown
/// positions z. Interior equations are kept in mass-weighted form (the
/// gradient of J); dividing by the node weight gives the residual rows.
class StepProblem {
 public:
  StepProblem(const ProblemSpec& spec, const LagrangianGrid& grid, const NodeField& x_old,
              double tau, const NodeField* concave_force = nullptr)
      : spec_(spec), grid_(grid), x_old_(x_old), tau_(tau), M_(grid.cells()),
        free_(spec.boundary_mode == BoundaryMode::free) {
    if (static_cast<int>(x_old.size()) != grid.nodes())
      throw std::invalid_argument("position field does not match the grid");
    require_admissible(x_old, "step");
    mass_ = grid.node_masses();
    cmass_ = grid.cell_masses();
    mob_ = detail::mobility_weights(x_old, grid, spec);

    Se_.assign(M_ + 1, 0.0);
    if (spec.kernel.concave.present())
      Se_ = concave_force ? *concave_force : pairs::force(spec.kernel.concave, x_old, mass_);
    Ve_prime_.assign(M_ + 1, 0.0);
    if (spec.potential.concave.present())
      for (int i = 0; i <= M_; ++i) Ve_prime_[i] = spec.potential.concave.d1(x_old[i]);
  }

  [[nodiscard]] bool free() const { return free_; }
  [[nodiscard]] int cells() const { return M_; }

  [[nodiscard]] NodeField implicit_force(const NodeField& z) const {
    if (!spec_.kernel.convex.present()) return NodeField(M_ + 1, 0.0);
    return pairs::force(spec_.kernel.convex, z, mass_);
  }
  [[nodiscard]] NodeField implicit_curvature(const NodeField& z) const {
    if (!spec_.kernel.convex.present()) return NodeField(M_ + 1, 0.0);
    return pairs::curvature(spec_.kernel.convex, spec_.kernel.kink_at_zero, z, mass_);
  }
  [[nodiscard]] const NodeField& concave_force() const { return Se_; }

  /// Mass-weighted interior equations (gradient of J) and boundary rows.
  [[nodiscard]] NodeField equations(const NodeField& z) const {
    require_admissible(z, "step_residual");
    const NodeField Sc = implicit_force(z);
    NodeField g(M_ + 1, 0.0);
    CellField P(M_);
    for (int k = 0; k < M_; ++k) P[k] = detail::pressure(spec_.energy, cmass_[k] / (z[k + 1] - z[k]));
    for (int i = 1; i < M_; ++i) {
      double gi = mob_[i] * (z[i] - x_old_[i]) / tau_ + (P[i] - P[i - 1]);
      if (spec_.potential.convex.present()) gi += mass_[i] * spec_.potential.convex.d1(z[i]);
      gi += mass_[i] * (Sc[i] - Ve_prime_[i] - Se_[i]);
      g[i] = gi;
    }
    if (free_) {
      g[0] = free_row(z, Sc, 0);
      g[M_] = free_row(z, Sc, M_);
    } else {
      g[0] = z[0] - grid_.X[0];
      g[M_] = z[M_] - grid_.X[M_];
    }
    return g;
  }

  /// Residual rows in the normalization of the written-out scheme.
  [[nodiscard]] NodeField residual(const NodeField& z) const {
    NodeField g = equations(z);
    for (int i = 1; i < M_; ++i) g[i] /= grid_.weight(i);
    return g;
  }

  [[nodiscard]] double functional(const NodeField& z) const {
    if (static_cast<int>(z.size()) != M_ + 1) throw std::invalid_argument("J: size mismatch");
    if (!strictly_increasing(z)) return kInf;
    double J = 0.0;
    for (int i = 0; i <= M_; ++i) {
      const double d = z[i] - x_old_[i];
      J += mob_[i] * d * d / (2.0 * tau_);
    }
    for (int k = 0; k < M_; ++k) {
      const double w = z[k + 1] - z[k];
      J += spec_.energy.H(cmass_[k] / w) * w;
    }
    for (int i = 0; i <= M_; ++i) {
      if (mass_[i] == 0.0) continue;
      if (spec_.potential.convex.present()) J += mass_[i] * spec_.potential.convex.value(z[i]);
      J -= mass_[i] * (Ve_prime_[i] + Se_[i]) * z[i];
    }
    if (spec_.kernel.convex.present()) J += pairs::energy(spec_.kernel.convex, z, mass_);
    return J;
  }

  [[nodiscard]] TridiagonalSystem jacobian(const NodeField& z) const {
    TridiagonalSystem A(M_ + 1);
    const NodeField Cc = implicit_curvature(z);
    CellField K(M_);
    for (int k = 0; k < M_; ++k)
      K[k] = detail::width_curvature(spec_.energy, cmass_[k], z[k + 1] - z[k]);
    for (int i = 1; i < M_; ++i) {
      double d = mob_[i] / tau_ + K[i - 1] + K[i] + mass_[i] * Cc[i];
      if (spec_.potential.convex.present()) d += mass_[i] * spec_.potential.convex.d2(z[i]);
      A.diag[i] = d;
      A.lower[i] = -K[i - 1];
      A.upper[i] = -K[i];
    }
    if (free_) {
      free_row_jacobian(z, Cc, 0, A);
      free_row_jacobian(z, Cc, M_, A);
    } else {
      A.diag[0] = 1.0;
      A.diag[M_] = 1.0;
    }
    return A;
  }

 private:
  struct Edge {
    double dX;   // reference width of the boundary cell
    double jac;  // one-sided D~x at the node
    double du0;  // one-sided D~u0 at the node
  };

  [[nodiscard]] Edge edge(const NodeField& z, int i) const {
    const int inner = i == 0 ? 1 : M_ - 1;
    const double dX = i == 0 ? grid_.width(0) : grid_.width(M_ - 1);
    const double sgn = i == 0 ? 1.0 : -1.0;
    return {dX, sgn * (z[inner] - z[i]) / dX,
            sgn * (grid_.u0_nodes[inner] - grid_.u0_nodes[i]) / dX};
  }

  // (x_i - x_i^n)/tau + f'(0) [H''(u0/D~x) D~u0 / (D~x)^2 + V_c'(x) - V_e'(x^n) + S_c - S_e]
  [[nodiscard]] double free_row(const NodeField& z, const NodeField& Sc, int i) const {
    const Edge e = edge(z, i);
    const double u = grid_.u0_nodes[i] / e.jac;
    double drive = spec_.energy.H_double_prime(u) * e.du0 / (e.jac * e.jac);
    if (spec_.potential.convex.present()) drive += spec_.potential.convex.d1(z[i]);
    drive += -Ve_prime_[i] + Sc[i] - Se_[i];
    return (z[i] - x_old_[i]) / tau_ + spec_.mobility.f_prime_zero * drive;
  }

  // u0 vanishes at a free boundary, so H'' is evaluated at a fixed
  // argument and only 1/(D~x)^2 depends on the positions.
  void free_row_jacobian(const NodeField& z, const NodeField& Cc, int i,
                         TridiagonalSystem& A) const {
    const Edge e = edge(z, i);
    const double fp = spec_.mobility.f_prime_zero;
    const double u = grid_.u0_nodes[i] / e.jac;
    // d(jac^-2)/d(jac) = -2 jac^-3; d(jac)/dz_i = -1/dX (left) or +1/dX (right)
    const double c = spec_.energy.H_double_prime(u) * e.du0 * (-2.0) / (e.jac * e.jac * e.jac) / e.dX;
    double self = 1.0 / tau_ + fp * Cc[i];
    if (spec_.potential.convex.present()) self += fp * spec_.potential.convex.d2(z[i]);
    if (i == 0) {
      A.diag[0] = self - fp * c;
      A.upper[0] = fp * c;
    } else {
      A.diag[M_] = self + fp * c;
      A.lower[M_] = -fp * c;
    }
  }

  const ProblemSpec& spec_;
  const LagrangianGrid& grid_;
  const NodeField& x_old_;
  double tau_;
  int M_;
  bool free_;
  NodeField mass_;
  CellField cmass_;
  NodeField mob_;
  NodeField Se_;
  NodeField Ve_prime_;
};

// Newton gave up while some gaps had closed to the merge tolerance: the
// step functional has no minimizer with those particles apart.
class Collision : public StepFailure {
 public:
  Collision(const std::string& what, std::vector<bool> join)
      : StepFailure(what, 0), join_(std::move(join)) {}
  [[nodiscard]] const std::vector<bool>& join() const { return join_; }

 private:
  std::vector<bool> join_;
};

[[noreturn]] void give_up(const std::string& what, const NodeField& z, double merge_tol) {
  std::vector<bool> join(z.size() - 1);
  bool any = false;
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    join[k] = z[k + 1] - z[k] <= merge_tol;
    any = any || join[k];
  }
  if (any) throw Collision(what + " (particles collide)", std::move(join));
  throw StepFailure(what, 0);
}

double max_abs(const NodeField& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

NewtonResult newton_impl(const StepProblem& problem, const NodeField& x_old,
                         const SolverConfig& config) {
  NewtonResult out;
  NodeField z = x_old;
  const bool use_merit = !problem.free();
  double Jz = use_merit ? problem.functional(z) : 0.0;
  if (use_merit) out.merit_history.push_back(Jz);

  for (int k = 0; k < config.newton_max_iter; ++k) {
    NodeField rhs = problem.equations(z);
    for (double& r : rhs) r = -r;
    const NodeField delta = solve_tridiagonal(problem.jacobian(z), rhs);
    const double step = max_abs(delta);
    out.iterations = k + 1;
    out.last_increment = step;
    if (!std::isfinite(step)) throw StepFailure("Newton increment is not finite", 0);

    // Start from the largest step keeping the order, backed off by 10%.
    double s = 1.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
      const double closing = delta[i] - delta[i + 1];
      if (closing > 0.0) s = std::min(s, 0.9 * (z[i + 1] - z[i]) / closing);
    }
    NodeField trial(z.size());
    for (;;) {
      for (std::size_t i = 0; i < z.size(); ++i) trial[i] = z[i] + s * delta[i];
      if (strictly_increasing(trial)) {
        if (!use_merit) break;
        const double Jt = problem.functional(trial);
        if (Jt <= Jz + 1e-13 * (1.0 + std::abs(Jz))) {
          Jz = Jt;
          break;
        }
      }
      s *= config.damping_shrink;
      if (s < 1e-14) give_up("Newton damping underflow", z, config.merge_tol);
    }
    z.swap(trial);
    if (use_merit) out.merit_history.push_back(Jz);
    if (s == 1.0 && step <= config.newton_tol) {
      out.x = std::move(z);
      out.final_residual = max_abs(problem.residual(out.x));
      return out;
    }
  }
  std::ostringstream msg;
  msg << "Newton did not converge in " << config.newton_max_iter << " iterations (last |dx| "
      << out.last_increment << ")";
  give_up(msg.str(), z, config.merge_tol);
}

}  // namespace

NonlocalSums nonlocal_sums(const NodeField& x_eval, const NodeField& x_old, const ProblemSpec& spec,
                           const LagrangianGrid& grid) {
  require_admissible(x_eval, "nonlocal_sums");
  require_admissible(x_old, "nonlocal_sums");
  const NodeField m = grid.node_masses();
  const std::size_t n = x_eval.size();
  NonlocalSums s{NodeField(n, 0.0), NodeField(n, 0.0), NodeField(n, 0.0)};
  if (spec.kernel.convex.present()) {
    s.S_c = pairs::force(spec.kernel.convex, x_eval, m);
    s.S_c_prime = pairs::curvature(spec.kernel.convex, spec.kernel.kink_at_zero, x_eval, m);
  }
  if (spec.kernel.concave.present()) s.S_e = pairs::force(spec.kernel.concave, x_old, m);
  return s;
}

NodeField step_residual(const NodeField& x_new, const NodeField& x_old, const ProblemSpec& spec,
                        const LagrangianGrid& grid, const SolverConfig& config) {
  return StepProblem(spec, grid, x_old, config.tau).residual(x_new);
}

double functional_J(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                    const LagrangianGrid& grid, const SolverConfig& config) {
  return StepProblem(spec, grid, x_old, config.tau).functional(z);
}

double directional_mismatch(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                            const LagrangianGrid& grid, const SolverConfig& config,
                            const NodeField& v, double delta) {
  const StepProblem problem(spec, grid, x_old, config.tau);
  if (v.size() != z.size()) throw std::invalid_argument("direction size mismatch");
  if (v.front() != 0.0 || v.back() != 0.0)
    throw std::invalid_argument("direction must vanish at the end nodes");
  const NodeField R = problem.residual(z);
  const double analytic = inner_node(R, v, grid);
  NodeField zp(z), zm(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    zp[i] += delta * v[i];
    zm[i] -= delta * v[i];
  }
  const double Jp = problem.functional(zp), Jm = problem.functional(zm);
  if (!std::isfinite(Jp) || !std::isfinite(Jm))
    throw LeftAdmissibleSet("grad_check: perturbed point left the admissible set");
  const double fd = (Jp - Jm) / (2.0 * delta);
  // Interior part of R only: boundary rows are constraints, not gradients.
  NodeField R_int(R);
  R_int.front() = R_int.back() = 0.0;
  const double scale = std::sqrt(inner_node(R_int, R_int, grid) * inner_node(v, v, grid));
  if (scale == 0.0) return std::abs(fd - analytic);
  return std::abs(fd - analytic) / scale;
}

double grad_check(const NodeField& z, const NodeField& x_old, const ProblemSpec& spec,
                  const LagrangianGrid& grid, const SolverConfig& config, double delta,
                  int directions, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    NodeField v(z.size(), 0.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = dist(rng);
    double step = delta;
    for (int attempt = 0;; ++attempt) {
      try {
        worst = std::max(worst, directional_mismatch(z, x_old, spec, grid, config, v, step));
        break;
      } catch (const LeftAdmissibleSet&) {
        if (attempt == 20) throw;
        step *= 0.5;
      }
    }
  }
  return worst;
}

NewtonResult newton_solve(const NodeField& x_old, const ProblemSpec& spec,
                          const LagrangianGrid& grid, const SolverConfig& config) {
  config.validate();
  const StepProblem problem(spec, grid, x_old, config.tau);
  return newton_impl(problem, x_old, config);
}

namespace {

// Solves one step of size tau from `state`, refreshing the pair cache.
TrajectoryState solve_step(const TrajectoryState& state, const ProblemSpec& spec,
                           const SolverConfig& config, double tau, int& iterations) {
  const NodeField m = state.grid.node_masses();
  const bool concave_kernel = spec.kernel.concave.present();
  ExplicitPairCache cache = state.cache;
  if (concave_kernel && !cache.matches(state.x)) {
    auto fe = pairs::force_and_energy(spec.kernel.concave, state.x, m);
    cache = {state.x, std::move(fe.force), fe.energy};
  }
  SolverConfig cfg = config;
  cfg.tau = tau;
  const StepProblem problem(spec, state.grid, state.x, tau,
                            concave_kernel ? &cache.force : nullptr);
  NewtonResult nr = newton_impl(problem, state.x, cfg);
  iterations += nr.iterations;

  TrajectoryState next;
  next.grid = state.grid;
  next.x = std::move(nr.x);
  next.t = state.t + tau;
  next.step = state.step;
  if (concave_kernel) {
    auto fe = pairs::force_and_energy(spec.kernel.concave, next.x, m);
    next.cache = {next.x, std::move(fe.force), fe.energy};
  }
  return next;
}

void refresh_cache(TrajectoryState& s, const ProblemSpec& spec) {
  if (!spec.kernel.concave.present()) return;
  const NodeField m = s.grid.node_masses();
  auto fe = pairs::force_and_energy(spec.kernel.concave, s.x, m);
  s.cache = {s.x, std::move(fe.force), fe.energy};
}

// Advances `state` by tau, splitting into halves while Newton fails and
// merging particles after every accepted substep.
TrajectoryState solve_span(const TrajectoryState& state, const ProblemSpec& spec,
                           const SolverConfig& config, double tau, int depth, StepReport& report) {
  TrajectoryState next;
  try {
    next = solve_step(state, spec, config, tau, report.newton_iterations);
  } catch (const StepFailure& failure) {
    if (depth < config.max_halvings) {
      report.substeps += 1;
      const TrajectoryState mid = solve_span(state, spec, config, 0.5 * tau, depth + 1, report);
      return solve_span(mid, spec, config, 0.5 * tau, depth + 1, report);
    }
    // Halving cannot outrun a collision (the mobility weight vanishes as
    // the density blows up), so merge the colliding particles up front.
    const auto* collision = dynamic_cast<const Collision*>(&failure);
    if (!collision || !config.merge) throw;
    MergeResult mr = merge_gaps(state, collision->join());
    report.merged += mr.count;
    refresh_cache(mr.state, spec);
    return solve_span(mr.state, spec, config, tau, depth, report);
  }
  report.dissipation_bound += tau * dissipation_bound(next.x, state.x, spec, state.grid, tau);
  if (config.merge) {
    MergeResult mr = merge_particles(next, config.merge_tol);
    if (mr.count > 0) {
      report.merged += mr.count;
      next = std::move(mr.state);
      refresh_cache(next, spec);
    }
  }
  return next;
}

}  // namespace

StepOutcome advance_step(const TrajectoryState& state, const ProblemSpec& spec,
                         const SolverConfig& config) {
  config.validate();
  require_admissible(state.x, "advance");
  StepReport report;
  report.energy_old = discrete_energy(state, spec).E;

  TrajectoryState next;
  try {
    next = solve_span(state, spec, config, config.tau, 0, report);
  } catch (const StepFailure& e) {
    std::string what = e.what();
    if (config.max_halvings > 0) what += " (after step halving)";
    throw StepFailure(what, state.step + 1);
  }
  next.t = state.t + config.tau;
  next.step = state.step + 1;
  report.energy_new = discrete_energy(next, spec).E;
  if (config.check_energy) {
    const double slack = config.energy_slack * (1.0 + std::abs(report.energy_old));
    if (report.energy_new > report.energy_old + slack) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "discrete energy increased at step " << next.step << ": " << report.energy_old
          << " -> " << report.energy_new;
      throw EnergyIncrease(msg.str(), next.step);
    }
  }
  return {std::move(next), report};
}

TrajectoryState advance(const TrajectoryState& state, const ProblemSpec& spec,
                        const SolverConfig& config) {
  return advance_step(state, spec, config).state;
}

SimulationResult run_simulation(const ProblemSpec& spec, const TrajectoryState& initial,
                                const SolverConfig& config, const RunOptions& options) {
  config.validate();
  if (options.final_time < 0.0) throw std::invalid_argument("final time must be nonnegative");
  SimulationResult result;
  result.final_state = initial;
  TrajectoryState& state = result.final_state;

  EnergyReport e0 = discrete_energy(state, spec);
  result.energy.push_back(e0);
  if (options.observer) options.observer(state, e0);

  const long steps = std::lround(options.final_time / config.tau);
  if (std::abs(steps * config.tau - options.final_time) > 1e-9 * (1.0 + options.final_time))
    throw std::invalid_argument("final time is not a whole number of time steps");
  for (long n = 0; n < steps; ++n) {
    StepOutcome out = advance_step(state, spec, config);
    state = std::move(out.state);
    state.t = initial.t + (n + 1) * config.tau;
    EnergyReport e = discrete_energy(state, spec);
    e.dissipation_bound = out.report.dissipation_bound / config.tau;
    result.energy.push_back(e);
    ++result.steps;
    if (out.report.merged > 0)
      result.merges.push_back({state.step, state.t, out.report.merged, state.grid.nodes()});
    if (options.on_step) options.on_step(state, out.report);

    const bool last = (n + 1 == steps);
    bool steady = false;
    if (options.steady_window > 0)
      steady = detect_steady(result.energy, options.steady_window, options.steady_tol);
    if (options.observer && options.snapshot_every > 0 &&
        ((n + 1) % options.snapshot_every == 0 || last || steady))
      options.observer(state, e);
    if (steady) {
      result.reached_steady = true;
      break;
    }
    if (options.stop_when && options.stop_when(state, out.report)) break;
  }
  return result;
}

SimulationResult run_simulation(const ProblemSpec& spec, int cells, const SolverConfig& config,
                                const RunOptions& options) {
  return run_simulation(spec, TrajectoryState::initial(spec, cells), config, options);
}

}  // namespace envara
