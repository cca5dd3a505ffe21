#pragma once

#include <stdexcept>
#include <string>

#include "envara/grid_ops.hpp"
#include "envara/problem_model.hpp"

namespace envara {

/// Pair sums of the explicit kernel part W_e evaluated at one set of
/// positions. They are the costly O(M^2) part of a step and are reused
/// between the energy check of one step and the explicit force of the next.
struct ExplicitPairCache {
  NodeField positions;   // the positions the sums belong to
  NodeField force;       // sum_j m_j W_e'(x_i - x_j)
  double pair_energy = 0.0;  // 1/2 sum_ij m_i m_j W_e(x_i - x_j)

  [[nodiscard]] bool matches(const NodeField& x) const { return positions == x; }
};

/// Particle positions x_i = x(X_i, t) at one time level.
struct TrajectoryState {
  LagrangianGrid grid;
  NodeField x;
  double t = 0.0;
  long step = 0;
  ExplicitPairCache cache;

  /// Identity map x = X on the reference grid of `spec` (the domain when
  /// pinned, the initial support when free).
  static TrajectoryState initial(const ProblemSpec& spec, int cells);

  [[nodiscard]] int cells() const { return grid.cells(); }
  [[nodiscard]] const NodeField& u0_nodes() const { return grid.u0_nodes; }
};

/// Thrown when positions stop being strictly increasing.
class LeftAdmissibleSet : public std::runtime_error {
 public:
  explicit LeftAdmissibleSet(const std::string& what) : std::runtime_error(what) {}
};

/// Step failure (Newton budget or damping exhausted).
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

/// True when x is strictly increasing.
bool strictly_increasing(const NodeField& x);
/// Throws LeftAdmissibleSet unless x is strictly increasing.
void require_admissible(const NodeField& x, const char* where);

}  // namespace envara
