#include "envara/tridiagonal.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace envara {

namespace {

constexpr double kPivotRatio = 1e-13;

double row_scale(const TridiagonalSystem& A, std::size_t i) {
  return std::abs(A.lower[i]) + std::abs(A.diag[i]) + std::abs(A.upper[i]);
}

std::optional<std::vector<double>> thomas(const TridiagonalSystem& A, std::span<const double> rhs) {
  const std::size_t n = A.size();
  std::vector<double> c(n), d(n);
  double pivot = A.diag[0];
  if (!(std::abs(pivot) > kPivotRatio * row_scale(A, 0))) return std::nullopt;
  c[0] = A.upper[0] / pivot;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = A.diag[i] - A.lower[i] * c[i - 1];
    if (!(std::abs(pivot) > kPivotRatio * row_scale(A, i))) return std::nullopt;
    c[i] = (i + 1 < n) ? A.upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - A.lower[i] * d[i - 1]) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  for (double v : x)
    if (!std::isfinite(v)) return std::nullopt;
  return x;
}

}  // namespace

std::vector<double> solve_tridiagonal_pivoting(const TridiagonalSystem& A,
                                               std::span<const double> rhs) {
  const std::size_t n = A.size();
  // Row i holds columns i-1..i+2 after pivoting introduces fill-in.
  std::vector<double> sub(A.lower), dia(A.diag), sup(A.upper), sup2(n, 0.0);
  std::vector<double> b(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && std::abs(sub[i + 1]) > std::abs(dia[i])) {
      // Swap rows i and i+1 (columns i, i+1, i+2).
      std::swap(dia[i], sub[i + 1]);
      std::swap(sup[i], dia[i + 1]);
      std::swap(sup2[i], sup[i + 1]);
      std::swap(b[i], b[i + 1]);
    }
    if (dia[i] == 0.0 || !std::isfinite(dia[i]))
      throw std::runtime_error("tridiagonal solve: singular matrix");
    if (i + 1 < n) {
      const double f = sub[i + 1] / dia[i];
      sub[i + 1] = 0.0;
      dia[i + 1] -= f * sup[i];
      sup[i + 1] -= f * sup2[i];
      b[i + 1] -= f * b[i];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    if (i + 1 < n) s -= sup[i] * x[i + 1];
    if (i + 2 < n) s -= sup2[i] * x[i + 2];
    x[i] = s / dia[i];
  }
  return x;
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& A, std::span<const double> rhs) {
  if (rhs.size() != A.size() || A.lower.size() != A.size() || A.upper.size() != A.size())
    throw std::invalid_argument("tridiagonal solve: size mismatch");
  if (A.size() == 0) return {};
  if (auto x = thomas(A, rhs)) return *x;
  return solve_tridiagonal_pivoting(A, rhs);
}

}  // namespace envara
