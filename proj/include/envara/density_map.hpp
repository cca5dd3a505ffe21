#pragma once

#include "envara/grid_ops.hpp"
#include "envara/state.hpp"

namespace envara {

struct DensitySample {
  NodeField positions;
  NodeField density;
  NodeField masses;
  double t = 0.0;
};

/// u_i = u0(X_i) / D~x_i with the centered quotient inside and one-sided
/// quotients at the two end nodes.
DensitySample density_from_trajectory(const TrajectoryState& state);

/// Mass carried by each particle: half-gap widths times density. These
/// do not change along a run.
NodeField particle_masses(const TrajectoryState& state);

struct MergeResult {
  TrajectoryState state;
  int count = 0;  // number of removed particles
};

/// Collapses every maximal run of gaps <= eps into one particle at the
/// mass-weighted mean position (an end node keeps its position) carrying
/// the summed mass. Throws std::invalid_argument for eps <= 0 and
/// std::runtime_error if fewer than 3 particles would remain.
MergeResult merge_particles(const TrajectoryState& state, double eps);

/// Same collapse rule for an explicit choice of gaps: join[k] merges
/// particles k and k+1. join must have one entry per cell.
MergeResult merge_gaps(const TrajectoryState& state, const std::vector<bool>& join);

}  // namespace envara
