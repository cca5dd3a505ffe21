#pragma once

// Continuous problem data for the nonlinear Fokker-Planck equation
//
//   u_t = (f(u) (H'(u) + V(x) + W * u)_x)_x
//
// with the potentials handed over already split into convex parts,
// V = V_c - V_e and W = W_c - W_e.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace envara {

using ScalarFn = std::function<double(double)>;

struct Mobility {
  ScalarFn f;
  double f_prime_zero = 1.0;
};

struct InternalEnergy {
  ScalarFn H;
  ScalarFn H_prime;
  ScalarFn H_double_prime;
};

/// A function together with its first two derivatives.
struct ConvexPart {
  ScalarFn value;
  ScalarFn d1;
  ScalarFn d2;

  [[nodiscard]] bool present() const { return static_cast<bool>(value); }
};

struct SplitPotential {
  ConvexPart convex;   // V_c
  ConvexPart concave;  // V_e (also convex; enters with a minus sign)

  [[nodiscard]] double value(double x) const;
  [[nodiscard]] double d1(double x) const;
};

/// One convex half of an even interaction kernel, written as
/// q r^2 + g(r). The quadratic coefficient is kept apart so that pair sums
/// reduce to moments and cost O(M).
struct KernelPart {
  double quadratic = 0.0;
  ConvexPart general;
  // Optional fused (g(r), g'(r)) for kernels where both share one costly
  // evaluation.
  std::function<std::pair<double, double>(double)> general_value_d1;

  [[nodiscard]] bool present() const { return quadratic != 0.0 || general.present(); }
  [[nodiscard]] double value(double r) const;
  /// Odd derivative; the self-interaction r == 0 contributes zero.
  [[nodiscard]] double d1(double r) const;
  [[nodiscard]] double d2(double r, bool kink_at_zero) const;
};

struct SplitKernel {
  KernelPart convex;   // W_c
  KernelPart concave;  // W_e
  // W has a corner at r = 0; one-sided slopes W'(0-) and W'(0+).
  bool kink_at_zero = false;
  double slope_left = 0.0;
  double slope_right = 0.0;

  [[nodiscard]] bool present() const { return convex.present() || concave.present(); }
  [[nodiscard]] double value(double r) const { return convex.value(r) - concave.value(r); }
  [[nodiscard]] double d1(double r) const { return convex.d1(r) - concave.d1(r); }
};

enum class BoundaryMode { pinned, free };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double length() const { return hi - lo; }
};

struct ProblemSpec {
  std::string name;
  Interval domain;
  Mobility mobility;
  InternalEnergy energy;
  SplitPotential potential;
  SplitKernel kernel;
  ScalarFn u0;
  BoundaryMode boundary_mode = BoundaryMode::pinned;
  Interval support;  // equals domain when pinned

  // Unsplit reference forms, used to check the splits.
  ScalarFn V_reference;
  ScalarFn W_reference;
};

enum class ExampleId { ex1, ex2, ex3, ex4, ex5 };

using ParamMap = std::map<std::string, double>;

ExampleId parse_example_id(const std::string& id);
std::string to_string(ExampleId id);

/// Parameters each example accepts, with defaults taken from the
/// reference experiments.
ParamMap default_params(ExampleId id);

/// Builds and validates one of the registered examples. Missing keys fall
/// back to default_params; unknown keys and out-of-range values throw
/// std::invalid_argument.
ProblemSpec build_example(ExampleId id, const ParamMap& params = {});

struct ValidationCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // worst sampled value of the checked quantity
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] const ValidationCheck* find(const std::string& name) const;
};

/// Samples the standing assumptions (f(0)=0, f increasing, H''>0, convex
/// splits, even kernel parts, sign pattern of u0). Never throws on a
/// failed check.
ValidationReport validate_spec(const ProblemSpec& spec, int samples);

// Closed-form pieces of the Boson-gas internal energy, exposed for tests.
namespace boson {
double H(double u);
double H_prime(double u);
double H_double_prime(double u);
/// Antiderivative of 1/(1+s^3) vanishing at s = 0.
double inverse_cubic_integral(double u);
}  // namespace boson

}  // namespace envara
