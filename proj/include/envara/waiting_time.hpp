#pragma once

// Two-grid waiting-time estimate for a free boundary that may stay put
// for a while before it starts to move.

#include <limits>
#include <vector>

#include "envara/problem_model.hpp"
#include "envara/scheme.hpp"
#include "envara/state.hpp"

namespace envara {

enum class Side { left, right };

/// f'(0) [H''(u0/D~x) D~u0/(D~x)^2 + V_c'(x) - V_e'(x) + S_c - S_e] at the
/// chosen end node, everything at the current level. The boundary node
/// moves with velocity -B. Throws std::invalid_argument in pinned mode.
double boundary_driving_term(const TrajectoryState& state, const ProblemSpec& spec, Side side);

struct WaitingSample {
  double t = 0.0;
  double B_h = 0.0;
  double B_2h = 0.0;
  double ratio = 0.0;  // B_2h / B_h; NaN when B_h == 0
  double x_boundary = 0.0;  // fine-grid boundary position
};

struct WaitingTimeRecord {
  Side side = Side::left;
  double t_star = std::numeric_limits<double>::infinity();
  std::vector<WaitingSample> history;
  std::vector<double> skipped;  // times with B_h == 0
  // First time B_h changes sign; +inf if it never does.
  double first_sign_change = std::numeric_limits<double>::infinity();
};

struct WaitingTimeResult {
  WaitingTimeRecord left;
  WaitingTimeRecord right;
};

/// Marches the spec on M and M/2 cells with the same time step up to
/// final_time and records, per side, the first level with
/// |B_2h / B_h| <= 1.
WaitingTimeResult estimate_waiting_time(const ProblemSpec& spec, const SolverConfig& config, int M,
                                        double final_time);

}  // namespace envara
