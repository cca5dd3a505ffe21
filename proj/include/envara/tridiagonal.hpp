#pragma once

#include <span>
#include <vector>

namespace envara {

/// Tridiagonal system: lower[i] multiplies x[i-1], upper[i] multiplies
/// x[i+1]; lower[0] and upper[n-1] are ignored.
struct TridiagonalSystem {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit TridiagonalSystem(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  [[nodiscard]] std::size_t size() const { return diag.size(); }
};

/// Solves A x = rhs with the Thomas algorithm. When a pivot becomes tiny
/// relative to its row, falls back to Gaussian elimination with partial
/// pivoting. Throws std::runtime_error if the matrix is singular.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& A, std::span<const double> rhs);

/// Partial-pivoting elimination on its own (exposed for tests).
std::vector<double> solve_tridiagonal_pivoting(const TridiagonalSystem& A,
                                               std::span<const double> rhs);

}  // namespace envara
