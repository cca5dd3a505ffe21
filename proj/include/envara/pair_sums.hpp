#pragma once

// Particle-pair sums of an interaction kernel part, weighted by particle
// masses. Quadratic terms reduce to moments; the general term is summed
// directly.

#include <span>
#include <vector>

#include "envara/problem_model.hpp"

namespace envara::pairs {

/// F_i = sum_j m_j W'(x_i - x_j); the self term is zero.
std::vector<double> force(const KernelPart& part, std::span<const double> x,
                          std::span<const double> m);

/// C_i = sum_j m_j W''(x_i - x_j), self term included (zero at a kink).
std::vector<double> curvature(const KernelPart& part, bool kink_at_zero, std::span<const double> x,
                              std::span<const double> m);

/// 1/2 sum_ij m_i m_j W(x_i - x_j).
double energy(const KernelPart& part, std::span<const double> x, std::span<const double> m);

/// Force and energy from one symmetric sweep.
struct ForceAndEnergy {
  std::vector<double> force;
  double energy = 0.0;
};
ForceAndEnergy force_and_energy(const KernelPart& part, std::span<const double> x,
                                std::span<const double> m);

}  // namespace envara::pairs
