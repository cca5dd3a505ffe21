#pragma once

// Lagrangian reference grid, difference operators and discrete inner
// products on node (E_M) and cell (C_M) grid functions.
//
// Node fields have M+1 entries indexed 0..M. Cell fields have M entries;
// entry k lives at the midpoint X_{k+1/2} between nodes k and k+1.

#include <span>
#include <vector>

#include "envara/problem_model.hpp"

namespace envara {

using NodeField = std::vector<double>;
using CellField = std::vector<double>;

/// Reference (Lagrangian) nodes together with the initial density sampled
/// on nodes and cell midpoints. The grid starts uniform; particle merging
/// makes it nonuniform, in which case all quotients use the local spacing.
struct LagrangianGrid {
  NodeField X;
  NodeField u0_nodes;
  CellField u0_cells;

  static LagrangianGrid uniform(Interval span, int cells, const ScalarFn& u0);

  [[nodiscard]] int cells() const { return static_cast<int>(X.size()) - 1; }
  [[nodiscard]] int nodes() const { return static_cast<int>(X.size()); }
  /// Spacing of the first cell; the spacing everywhere while uniform.
  [[nodiscard]] double h() const { return X[1] - X[0]; }
  [[nodiscard]] double width(int k) const { return X[k + 1] - X[k]; }
  /// Trapezoid weight of node i (h/2 at the ends, h inside when uniform).
  [[nodiscard]] double weight(int i) const;
  [[nodiscard]] double node_mass(int i) const { return weight(i) * u0_nodes[i]; }
  [[nodiscard]] double cell_mass(int k) const { return width(k) * u0_cells[k]; }

  [[nodiscard]] NodeField node_masses() const;
  [[nodiscard]] CellField cell_masses() const;
  [[nodiscard]] NodeField weights() const;
};

// Uniform-spacing operators. All throw std::invalid_argument on h <= 0 or
// on inputs that are too short.

/// (D_h l)_{i-1/2} = (l_i - l_{i-1}) / h, i = 1..M.
CellField forward_diff(std::span<const double> l, double h);
/// (d_h phi)_i = (phi_{i+1/2} - phi_{i-1/2}) / h for the interior nodes
/// i = 1..M-1 only; the result has M-1 entries. Boundary rows belong to
/// the caller.
NodeField cell_div(std::span<const double> phi, double h);
/// Central differences inside, one-sided first-order stencils at 0 and M.
NodeField centered_diff(std::span<const double> l, double h);
/// h (l_0 g_0 / 2 + sum_{0<i<M} l_i g_i + l_M g_M / 2)
double inner_node(std::span<const double> l, std::span<const double> g, double h);
/// h sum_k phi_k psi_k
double inner_cell(std::span<const double> phi, std::span<const double> psi, double h);

// Same operators on a possibly nonuniform reference grid.
CellField forward_diff(std::span<const double> l, const LagrangianGrid& grid);
NodeField cell_div(std::span<const double> phi, const LagrangianGrid& grid);
NodeField centered_diff(std::span<const double> l, const LagrangianGrid& grid);
double inner_node(std::span<const double> l, std::span<const double> g, const LagrangianGrid& grid);
double inner_cell(std::span<const double> phi, std::span<const double> psi,
                  const LagrangianGrid& grid);

struct ErrorNorms {
  double L2 = 0.0;
  double L1 = 0.0;
  double Linf = 0.0;
};

/// Trapezoid-weighted L2/L1 and max norms of an error field. `weights`
/// holds the local mesh widths; the end nodes get half weight.
ErrorNorms error_norms(std::span<const double> e, std::span<const double> weights);

/// Local widths of a moving mesh: (x_{i+1}-x_{i-1})/2 inside, full
/// one-sided gaps at the ends.
NodeField moving_mesh_widths(std::span<const double> x);

}  // namespace envara
