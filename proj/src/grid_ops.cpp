#include "envara/grid_ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace envara {

namespace {

void check_h(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
}

void check_min_size(std::size_t n, std::size_t min, const char* what) {
  if (n < min)
    throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(min) +
                                " entries");
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("grid function length mismatch");
}

}  // namespace

LagrangianGrid LagrangianGrid::uniform(Interval span, int cells, const ScalarFn& u0) {
  if (cells < 1) throw std::invalid_argument("grid needs at least one cell");
  if (!(span.length() > 0.0)) throw std::invalid_argument("grid interval must have positive length");
  LagrangianGrid g;
  const double h = span.length() / cells;
  g.X.resize(cells + 1);
  g.u0_nodes.resize(cells + 1);
  g.u0_cells.resize(cells);
  for (int i = 0; i <= cells; ++i) g.X[i] = span.lo + i * h;
  g.X[cells] = span.hi;
  for (int i = 0; i <= cells; ++i) g.u0_nodes[i] = u0(g.X[i]);
  for (int k = 0; k < cells; ++k) g.u0_cells[k] = u0(span.lo + (k + 0.5) * h);
  return g;
}

double LagrangianGrid::weight(int i) const {
  const int M = cells();
  if (i == 0) return 0.5 * width(0);
  if (i == M) return 0.5 * width(M - 1);
  return 0.5 * (width(i - 1) + width(i));
}

NodeField LagrangianGrid::node_masses() const {
  NodeField m(nodes());
  for (int i = 0; i < nodes(); ++i) m[i] = node_mass(i);
  return m;
}

CellField LagrangianGrid::cell_masses() const {
  CellField c(cells());
  for (int k = 0; k < cells(); ++k) c[k] = cell_mass(k);
  return c;
}

NodeField LagrangianGrid::weights() const {
  NodeField w(nodes());
  for (int i = 0; i < nodes(); ++i) w[i] = weight(i);
  return w;
}

CellField forward_diff(std::span<const double> l, double h) {
  check_h(h);
  check_min_size(l.size(), 2, "forward_diff");
  CellField out(l.size() - 1);
  for (std::size_t k = 0; k + 1 < l.size(); ++k) out[k] = (l[k + 1] - l[k]) / h;
  return out;
}

NodeField cell_div(std::span<const double> phi, double h) {
  check_h(h);
  check_min_size(phi.size(), 2, "cell_div");
  NodeField out(phi.size() - 1);
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) out[i] = (phi[i + 1] - phi[i]) / h;
  return out;
}

NodeField centered_diff(std::span<const double> l, double h) {
  check_h(h);
  check_min_size(l.size(), 2, "centered_diff");
  const std::size_t M = l.size() - 1;
  NodeField out(M + 1);
  out[0] = (l[1] - l[0]) / h;
  for (std::size_t i = 1; i < M; ++i) out[i] = (l[i + 1] - l[i - 1]) / (2.0 * h);
  out[M] = (l[M] - l[M - 1]) / h;
  return out;
}

double inner_node(std::span<const double> l, std::span<const double> g, double h) {
  check_same_size(l.size(), g.size());
  check_min_size(l.size(), 2, "inner_node");
  const std::size_t M = l.size() - 1;
  double s = 0.5 * l[0] * g[0];
  for (std::size_t i = 1; i < M; ++i) s += l[i] * g[i];
  s += 0.5 * l[M] * g[M];
  return h * s;
}

double inner_cell(std::span<const double> phi, std::span<const double> psi, double h) {
  check_same_size(phi.size(), psi.size());
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) s += phi[k] * psi[k];
  return h * s;
}

CellField forward_diff(std::span<const double> l, const LagrangianGrid& grid) {
  check_same_size(l.size(), grid.X.size());
  check_min_size(l.size(), 2, "forward_diff");
  CellField out(l.size() - 1);
  for (int k = 0; k < grid.cells(); ++k) out[k] = (l[k + 1] - l[k]) / grid.width(k);
  return out;
}

NodeField cell_div(std::span<const double> phi, const LagrangianGrid& grid) {
  check_same_size(phi.size(), static_cast<std::size_t>(grid.cells()));
  check_min_size(phi.size(), 2, "cell_div");
  NodeField out(phi.size() - 1);
  for (int i = 1; i < grid.cells(); ++i) out[i - 1] = (phi[i] - phi[i - 1]) / grid.weight(i);
  return out;
}

NodeField centered_diff(std::span<const double> l, const LagrangianGrid& grid) {
  check_same_size(l.size(), grid.X.size());
  check_min_size(l.size(), 2, "centered_diff");
  const int M = grid.cells();
  NodeField out(M + 1);
  out[0] = (l[1] - l[0]) / grid.width(0);
  for (int i = 1; i < M; ++i) out[i] = (l[i + 1] - l[i - 1]) / (grid.X[i + 1] - grid.X[i - 1]);
  out[M] = (l[M] - l[M - 1]) / grid.width(M - 1);
  return out;
}

double inner_node(std::span<const double> l, std::span<const double> g, const LagrangianGrid& grid) {
  check_same_size(l.size(), g.size());
  check_same_size(l.size(), grid.X.size());
  double s = 0.0;
  for (int i = 0; i < grid.nodes(); ++i) s += grid.weight(i) * l[i] * g[i];
  return s;
}

double inner_cell(std::span<const double> phi, std::span<const double> psi,
                  const LagrangianGrid& grid) {
  check_same_size(phi.size(), psi.size());
  check_same_size(phi.size(), static_cast<std::size_t>(grid.cells()));
  double s = 0.0;
  for (int k = 0; k < grid.cells(); ++k) s += grid.width(k) * phi[k] * psi[k];
  return s;
}

ErrorNorms error_norms(std::span<const double> e, std::span<const double> weights) {
  check_same_size(e.size(), weights.size());
  check_min_size(e.size(), 2, "error_norms");
  const std::size_t M = e.size() - 1;
  ErrorNorms n;
  double l2 = 0.0;
  for (std::size_t i = 0; i <= M; ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("error_norms: negative weight");
    const double w = (i == 0 || i == M) ? 0.5 * weights[i] : weights[i];
    const double a = std::abs(e[i]);
    l2 += a * a * w;
    n.L1 += a * w;
    n.Linf = std::max(n.Linf, a);
  }
  n.L2 = std::sqrt(l2);
  return n;
}

NodeField moving_mesh_widths(std::span<const double> x) {
  check_min_size(x.size(), 2, "moving_mesh_widths");
  const std::size_t M = x.size() - 1;
  NodeField w(M + 1);
  w[0] = x[1] - x[0];
  for (std::size_t i = 1; i < M; ++i) w[i] = 0.5 * (x[i + 1] - x[i - 1]);
  w[M] = x[M] - x[M - 1];
  return w;
}

}  // namespace envara
