#include "envara/state.hpp"

namespace envara {

TrajectoryState TrajectoryState::initial(const ProblemSpec& spec, int cells) {
  const Interval span = spec.boundary_mode == BoundaryMode::pinned ? spec.domain : spec.support;
  TrajectoryState s;
  s.grid = LagrangianGrid::uniform(span, cells, spec.u0);
  s.x = s.grid.X;
  return s;
}

bool strictly_increasing(const NodeField& x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) return false;
  return true;
}

void require_admissible(const NodeField& x, const char* where) {
  if (!strictly_increasing(x))
    throw LeftAdmissibleSet(std::string(where) + ": positions are not strictly increasing");
}

}  // namespace envara
