#pragma once

#include <random>

#include "envara/problem_model.hpp"
#include "envara/state.hpp"

namespace testing_support {

// Identity trajectory with every movable node shifted by up to amp * h.
// End nodes stay put in pinned mode.
inline envara::NodeField jitter(const envara::TrajectoryState& s, const envara::ProblemSpec& spec,
                                std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> d(-amp, amp);
  envara::NodeField x = s.x;
  const int M = s.cells();
  const bool pinned = spec.boundary_mode == envara::BoundaryMode::pinned;
  for (int i = 0; i <= M; ++i) {
    if (pinned && (i == 0 || i == M)) continue;
    const double h = i < M ? s.grid.width(i) : s.grid.width(M - 1);
    x[i] += d(rng) * h;
  }
  return x;
}

}  // namespace testing_support
