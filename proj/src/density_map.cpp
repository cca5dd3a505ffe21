#include "envara/density_map.hpp"

#include <stdexcept>

namespace envara {

namespace {

double jacobian(const TrajectoryState& s, int i) {
  const auto& X = s.grid.X;
  const auto& x = s.x;
  const int M = s.cells();
  if (i == 0) return (x[1] - x[0]) / (X[1] - X[0]);
  if (i == M) return (x[M] - x[M - 1]) / (X[M] - X[M - 1]);
  return (x[i + 1] - x[i - 1]) / (X[i + 1] - X[i - 1]);
}

}  // namespace

DensitySample density_from_trajectory(const TrajectoryState& state) {
  require_admissible(state.x, "density_from_trajectory");
  if (state.x.size() != state.grid.X.size())
    throw std::invalid_argument("density_from_trajectory: size mismatch");
  const int M = state.cells();
  DensitySample out;
  out.positions = state.x;
  out.density.resize(M + 1);
  out.masses.resize(M + 1);
  out.t = state.t;
  for (int i = 0; i <= M; ++i) out.density[i] = state.grid.u0_nodes[i] / jacobian(state, i);
  const auto& x = state.x;
  out.masses[0] = 0.5 * (x[1] - x[0]) * out.density[0];
  out.masses[M] = 0.5 * (x[M] - x[M - 1]) * out.density[M];
  for (int i = 1; i < M; ++i) out.masses[i] = 0.5 * (x[i + 1] - x[i - 1]) * out.density[i];
  return out;
}

NodeField particle_masses(const TrajectoryState& state) {
  return density_from_trajectory(state).masses;
}

MergeResult merge_particles(const TrajectoryState& state, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("merge tolerance must be positive");
  require_admissible(state.x, "merge_particles");
  std::vector<bool> join(state.cells());
  for (int k = 0; k < state.cells(); ++k) join[k] = state.x[k + 1] - state.x[k] <= eps;
  return merge_gaps(state, join);
}

MergeResult merge_gaps(const TrajectoryState& state, const std::vector<bool>& join) {
  require_admissible(state.x, "merge_gaps");
  const int M = state.cells();
  if (static_cast<int>(join.size()) != M) throw std::invalid_argument("merge_gaps: size mismatch");
  const auto& x = state.x;
  bool any = false;
  for (bool j : join) any = any || j;
  if (!any) return {state, 0};

  const LagrangianGrid& g = state.grid;
  const NodeField m = g.node_masses();
  const CellField c = g.cell_masses();

  NodeField X, xs, ms;
  CellField cs;
  int i = 0;
  while (i <= M) {
    int j = i;
    while (j < M && join[j]) ++j;
    double mass = 0.0, mx = 0.0, mX = 0.0;
    for (int k = i; k <= j; ++k) {
      mass += m[k];
      mx += m[k] * x[k];
      mX += m[k] * g.X[k];
    }
    double xn, Xn;
    if (i == 0) {
      xn = x[0];
      Xn = g.X[0];
    } else if (j == M) {
      xn = x[M];
      Xn = g.X[M];
    } else if (mass > 0.0) {
      xn = mx / mass;
      Xn = mX / mass;
    } else {
      xn = 0.5 * (x[i] + x[j]);
      Xn = 0.5 * (g.X[i] + g.X[j]);
    }
    if (!xs.empty()) cs.push_back(c[i - 1]);
    X.push_back(Xn);
    xs.push_back(xn);
    ms.push_back(mass);
    i = j + 1;
  }
  if (xs.size() < 3) throw std::runtime_error("merging would leave fewer than 3 particles");

  MergeResult out;
  out.count = static_cast<int>(x.size() - xs.size());
  TrajectoryState& s = out.state;
  s.t = state.t;
  s.step = state.step;
  s.x = std::move(xs);
  s.grid.X = std::move(X);
  const int Mn = s.grid.cells();
  s.grid.u0_cells.resize(Mn);
  for (int k = 0; k < Mn; ++k) s.grid.u0_cells[k] = cs[k] / s.grid.width(k);
  s.grid.u0_nodes.resize(Mn + 1);
  for (int k = 0; k <= Mn; ++k) s.grid.u0_nodes[k] = ms[k] / s.grid.weight(k);
  require_admissible(s.grid.X, "merge_particles (reference grid)");
  return out;
}

}  // namespace envara
