#include "envara/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "detail.hpp"
#include "envara/pair_sums.hpp"

namespace envara {

namespace {

EnergyReport energy_impl(const NodeField& x, const LagrangianGrid& grid, const ProblemSpec& spec,
                         const ExplicitPairCache* cache) {
  require_admissible(x, "discrete_energy");
  const int M = grid.cells();
  const NodeField m = grid.node_masses();

  double internal = 0.0;
  for (int k = 0; k < M; ++k) {
    const double d = x[k + 1] - x[k];
    internal += spec.energy.H(grid.cell_mass(k) / d) * d;
  }
  double vc = 0.0, ve = 0.0;
  for (int i = 0; i <= M; ++i) {
    if (m[i] == 0.0) continue;
    if (spec.potential.convex.present()) vc += m[i] * spec.potential.convex.value(x[i]);
    if (spec.potential.concave.present()) ve += m[i] * spec.potential.concave.value(x[i]);
  }
  double wc = 0.0, we = 0.0;
  if (spec.kernel.convex.present()) wc = pairs::energy(spec.kernel.convex, x, m);
  if (spec.kernel.concave.present())
    we = (cache != nullptr) ? cache->pair_energy : pairs::energy(spec.kernel.concave, x, m);

  EnergyReport r;
  r.E_c = internal + vc + wc;
  r.E_e = ve + we;
  r.E = r.E_c - r.E_e;
  return r;
}

}  // namespace

EnergyReport discrete_energy(const TrajectoryState& state, const ProblemSpec& spec) {
  const ExplicitPairCache* cache = state.cache.matches(state.x) ? &state.cache : nullptr;
  EnergyReport r = energy_impl(state.x, state.grid, spec, cache);
  r.t = state.t;
  return r;
}

EnergyReport discrete_energy(const NodeField& x, const LagrangianGrid& grid,
                             const ProblemSpec& spec) {
  return energy_impl(x, grid, spec, nullptr);
}

double dissipation_bound(const NodeField& x_new, const NodeField& x_old, const ProblemSpec& spec,
                         const LagrangianGrid& grid, double tau) {
  require_admissible(x_new, "dissipation_bound");
  require_admissible(x_old, "dissipation_bound");
  const NodeField a = detail::mobility_weights(x_old, grid, spec);
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double rate = (x_new[i] - x_old[i]) / tau;
    q += a[i] * rate * rate;
  }
  return -q;
}

SteadyResidual steady_residual(const TrajectoryState& state, const ProblemSpec& spec) {
  const NodeField& x = state.x;
  const LagrangianGrid& grid = state.grid;
  require_admissible(x, "steady_residual");
  const int M = grid.cells();
  const NodeField m = grid.node_masses();

  NodeField S(M + 1, 0.0);
  if (spec.kernel.convex.present()) S = pairs::force(spec.kernel.convex, x, m);
  if (spec.kernel.concave.present()) {
    const NodeField Se = pairs::force(spec.kernel.concave, x, m);
    for (int i = 0; i <= M; ++i) S[i] -= Se[i];
  }
  CellField P(M);
  for (int k = 0; k < M; ++k)
    P[k] = detail::pressure(spec.energy, grid.cell_mass(k) / (x[k + 1] - x[k]));

  SteadyResidual out;
  out.residual.assign(M + 1, 0.0);
  for (int i = 1; i < M; ++i) {
    out.residual[i] =
        (P[i] - P[i - 1] + m[i] * spec.potential.d1(x[i]) + m[i] * S[i]) / grid.weight(i);
  }
  if (spec.boundary_mode == BoundaryMode::free) {
    const double fp = spec.mobility.f_prime_zero;
    auto edge = [&](int i, int inner) {
      const double dX = grid.X[std::max(i, inner)] - grid.X[std::min(i, inner)];
      const double sgn = inner > i ? 1.0 : -1.0;
      const double jac = sgn * (x[inner] - x[i]) / dX;
      const double du0 = sgn * (grid.u0_nodes[inner] - grid.u0_nodes[i]) / dX;
      const double u = grid.u0_nodes[i] / jac;
      return fp * (spec.energy.H_double_prime(u) * du0 / (jac * jac) + spec.potential.d1(x[i]) +
                   S[i]);
    };
    out.residual[0] = edge(0, 1);
    out.residual[M] = edge(M, M - 1);
  }
  for (double r : out.residual) out.max_norm = std::max(out.max_norm, std::abs(r));
  return out;
}

double relative_energy(const TrajectoryState& state, const TrajectoryState& steady,
                       const ProblemSpec& spec) {
  return discrete_energy(state, spec).E - discrete_energy(steady, spec).E;
}

bool detect_steady(std::span<const EnergyReport> history, int window, double tol) {
  if (window < 1) throw std::invalid_argument("detect_steady: window must be positive");
  if (history.size() <= static_cast<std::size_t>(window)) return false;
  const double now = history.back().E;
  const double then = history[history.size() - 1 - window].E;
  return std::abs(now - then) <= tol * (1.0 + std::abs(now));
}

}  // namespace envara
