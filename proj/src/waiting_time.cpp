#include "envara/waiting_time.hpp"

#include <cmath>
#include <stdexcept>

#include "envara/pair_sums.hpp"

namespace envara {

double boundary_driving_term(const TrajectoryState& state, const ProblemSpec& spec, Side side) {
  if (spec.boundary_mode != BoundaryMode::free)
    throw std::invalid_argument("boundary_driving_term needs a free boundary");
  require_admissible(state.x, "boundary_driving_term");
  const LagrangianGrid& g = state.grid;
  const int M = g.cells();
  const int i = side == Side::left ? 0 : M;
  const int inner = side == Side::left ? 1 : M - 1;
  const double dX = side == Side::left ? g.width(0) : g.width(M - 1);
  const double sgn = side == Side::left ? 1.0 : -1.0;
  const double jac = sgn * (state.x[inner] - state.x[i]) / dX;
  const double du0 = sgn * (g.u0_nodes[inner] - g.u0_nodes[i]) / dX;
  const double xb = state.x[i];

  double B = spec.energy.H_double_prime(g.u0_nodes[i] / jac) * du0 / (jac * jac);
  if (spec.potential.convex.present()) B += spec.potential.convex.d1(xb);
  if (spec.potential.concave.present()) B -= spec.potential.concave.d1(xb);
  const NodeField m = g.node_masses();
  for (int j = 0; j <= M; ++j) {
    if (j == i) continue;
    const double r = xb - state.x[j];
    if (spec.kernel.convex.present()) B += m[j] * spec.kernel.convex.d1(r);
    if (spec.kernel.concave.present()) B -= m[j] * spec.kernel.concave.d1(r);
  }
  return spec.mobility.f_prime_zero * B;
}

namespace {

void record(WaitingTimeRecord& rec, const TrajectoryState& fine, const TrajectoryState& coarse,
            const ProblemSpec& spec) {
  WaitingSample s;
  s.t = fine.t;
  s.B_h = boundary_driving_term(fine, spec, rec.side);
  s.B_2h = boundary_driving_term(coarse, spec, rec.side);
  s.x_boundary = rec.side == Side::left ? fine.x.front() : fine.x.back();
  if (s.B_h == 0.0) {
    s.ratio = std::nan("");
    rec.skipped.push_back(s.t);
  } else {
    s.ratio = s.B_2h / s.B_h;
    if (std::isinf(rec.t_star) && std::abs(s.ratio) <= 1.0) rec.t_star = s.t;
  }
  if (!rec.history.empty() && std::isinf(rec.first_sign_change)) {
    const double prev = rec.history.back().B_h;
    if ((prev > 0.0 && s.B_h < 0.0) || (prev < 0.0 && s.B_h > 0.0)) rec.first_sign_change = s.t;
  }
  rec.history.push_back(s);
}

}  // namespace

WaitingTimeResult estimate_waiting_time(const ProblemSpec& spec, const SolverConfig& config, int M,
                                        double final_time) {
  if (spec.boundary_mode != BoundaryMode::free)
    throw std::invalid_argument("waiting time needs a free boundary");
  if (M < 4 || M % 2 != 0) throw std::invalid_argument("waiting time needs an even M >= 4");
  if (!(final_time > 0.0)) throw std::invalid_argument("final time must be positive");
  config.validate();

  WaitingTimeResult out;
  out.left.side = Side::left;
  out.right.side = Side::right;
  TrajectoryState fine = TrajectoryState::initial(spec, M);
  TrajectoryState coarse = TrajectoryState::initial(spec, M / 2);
  record(out.left, fine, coarse, spec);
  record(out.right, fine, coarse, spec);

  const long steps = std::lround(final_time / config.tau);
  for (long n = 0; n < steps; ++n) {
    fine = advance(fine, spec, config);
    coarse = advance(coarse, spec, config);
    fine.t = coarse.t = (n + 1) * config.tau;
    record(out.left, fine, coarse, spec);
    record(out.right, fine, coarse, spec);
  }
  return out;
}

}  // namespace envara
