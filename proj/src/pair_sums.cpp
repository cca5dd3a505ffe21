#include "envara/pair_sums.hpp"

#include <stdexcept>

namespace envara::pairs {

namespace {

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
};

Moments moments(std::span<const double> x, std::span<const double> m) {
  Moments mo;
  double first = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mo.mass += m[j];
    first += m[j] * x[j];
  }
  mo.mean = mo.mass > 0.0 ? first / mo.mass : 0.0;
  return mo;
}

void check(std::span<const double> x, std::span<const double> m) {
  if (x.size() != m.size()) throw std::invalid_argument("pair sums: length mismatch");
}

}  // namespace

std::vector<double> force(const KernelPart& part, std::span<const double> x,
                          std::span<const double> m) {
  check(x, m);
  const std::size_t n = x.size();
  std::vector<double> F(n, 0.0);
  if (part.quadratic != 0.0) {
    const Moments mo = moments(x, m);
    for (std::size_t i = 0; i < n; ++i) F[i] = 2.0 * part.quadratic * mo.mass * (x[i] - mo.mean);
  }
  if (part.general.present()) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += m[j] * part.general.d1(x[i] - x[j]);
      F[i] += s;
    }
  }
  return F;
}

std::vector<double> curvature(const KernelPart& part, bool kink_at_zero, std::span<const double> x,
                              std::span<const double> m) {
  check(x, m);
  const std::size_t n = x.size();
  std::vector<double> C(n, 0.0);
  if (part.quadratic != 0.0) {
    double mass = 0.0;
    for (double mj : m) mass += mj;
    for (auto& c : C) c = 2.0 * part.quadratic * mass;
  }
  if (part.general.present()) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i && kink_at_zero) continue;
        s += m[j] * part.general.d2(x[i] - x[j]);
      }
      C[i] += s;
    }
  }
  return C;
}

double energy(const KernelPart& part, std::span<const double> x, std::span<const double> m) {
  check(x, m);
  const std::size_t n = x.size();
  double E = 0.0;
  if (part.quadratic != 0.0) {
    const Moments mo = moments(x, m);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += m[j] * (x[j] - mo.mean) * (x[j] - mo.mean);
    E += part.quadratic * mo.mass * var;
  }
  if (part.general.present()) {
    const double g0 = part.general.value(0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) row += m[j] * part.general.value(x[i] - x[j]);
      s += m[i] * row + 0.5 * m[i] * m[i] * g0;
    }
    E += s;
  }
  return E;
}

ForceAndEnergy force_and_energy(const KernelPart& part, std::span<const double> x,
                                std::span<const double> m) {
  check(x, m);
  if (!part.general_value_d1 || !part.general.present()) {
    return {force(part, x, m), energy(part, x, m)};
  }
  const std::size_t n = x.size();
  ForceAndEnergy out;
  out.force.assign(n, 0.0);
  if (part.quadratic != 0.0) {
    KernelPart quad;
    quad.quadratic = part.quadratic;
    out.force = force(quad, x, m);
    out.energy = energy(quad, x, m);
  }
  const double g0 = part.general.value(0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    double fi = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto [g, dg] = part.general_value_d1(x[i] - x[j]);
      row += m[j] * g;
      fi += m[j] * dg;
      out.force[j] -= m[i] * dg;  // W' is odd
    }
    out.force[i] += fi;
    s += m[i] * row + 0.5 * m[i] * m[i] * g0;
  }
  out.energy += s;
  return out;
}

}  // namespace envara::pairs
