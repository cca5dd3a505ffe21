#include "envara/problem_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace envara {

namespace {

constexpr double kPi = std::numbers::pi;

double sign_of(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

ConvexPart zero_part() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ConvexPart quadratic_part(double c, double shift = 0.0) {
  // c (x - shift)^2 / 2
  return {[c, shift](double x) { return 0.5 * c * (x - shift) * (x - shift); },
          [c, shift](double x) { return c * (x - shift); }, [c](double) { return c; }};
}

double require(const ParamMap& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing parameter '" + key + "'");
  if (!std::isfinite(it->second))
    throw std::invalid_argument("parameter '" + key + "' is not finite");
  return it->second;
}

void require_positive(const ParamMap& p, const std::string& key) {
  if (!(require(p, key) > 0.0))
    throw std::invalid_argument("parameter '" + key + "' must be positive");
}

ParamMap merged(ExampleId id, const ParamMap& user) {
  ParamMap p = default_params(id);
  for (const auto& [k, v] : user) {
    if (!p.contains(k))
      throw std::invalid_argument("parameter '" + k + "' is not used by example " + to_string(id));
    p[k] = v;
  }
  return p;
}

// H(u) = nu u^m / m, the porous-medium energy with H'(u) = nu u^(m-1).
InternalEnergy power_energy(double nu, double m) {
  return {[nu, m](double u) { return nu * std::pow(u, m) / m; },
          [nu, m](double u) { return nu * std::pow(u, m - 1.0); },
          [nu, m](double u) {
            if (m == 2.0) return nu;
            return nu * (m - 1.0) * std::pow(u, m - 2.0);
          }};
}

Mobility linear_mobility() {
  return {[](double u) { return u; }, 1.0};
}

ProblemSpec make_ex1(const ParamMap& p) {
  const double m = require(p, "m");
  if (!(m >= 2.0))
    throw std::invalid_argument("ex1 needs m >= 2 (free boundary rows use H''(0))");
  ProblemSpec s;
  s.name = "ex1";
  s.domain = {-2.0, 2.0};
  s.support = {-1.0, 1.0};
  s.boundary_mode = BoundaryMode::free;
  s.mobility = linear_mobility();
  // H'(u) = m/(m-1) u^(m-1)  <=>  nu = m/(m-1) in the power family.
  s.energy = power_energy(m / (m - 1.0), m);
  s.potential.convex = quadratic_part(1.0);
  s.potential.concave = zero_part();
  s.V_reference = [](double x) { return 0.5 * x * x; };
  s.W_reference = [](double) { return 0.0; };
  s.u0 = [](double x) { return std::max(1.0 - std::abs(x), 0.0); };
  return s;
}

ProblemSpec make_ex2(const ParamMap& p) {
  for (const char* k : {"m", "nu", "mass", "sigma"}) require_positive(p, k);
  const double m = p.at("m"), nu = p.at("nu"), mass = p.at("mass"), sigma = p.at("sigma");
  if (!(m > 1.0)) throw std::invalid_argument("ex2 needs m > 1");
  ProblemSpec s;
  s.name = "ex2";
  s.domain = {-2.0, 2.0};
  s.support = s.domain;
  s.boundary_mode = BoundaryMode::pinned;
  s.mobility = linear_mobility();
  s.energy = power_energy(nu, m);
  s.potential.convex = {[](double x) { return 0.25 * x * x * x * x; },
                        [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }};
  s.potential.concave = quadratic_part(1.0);
  s.V_reference = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
  s.W_reference = [](double) { return 0.0; };
  const double norm = mass / std::sqrt(2.0 * kPi * sigma * sigma);
  s.u0 = [norm, sigma](double x) { return norm * std::exp(-x * x / (2.0 * sigma * sigma)); };
  return s;
}

ProblemSpec make_ex3(const ParamMap& p) {
  const double m = require(p, "m");
  require_positive(p, "nu");
  const double nu = p.at("nu");
  const double theta = require(p, "theta");
  if (!(m >= 2.0))
    throw std::invalid_argument("ex3 needs m >= 2 (free boundary rows use H''(0))");
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("ex3 needs theta in [0, 1]");
  double c = require(p, "kernel_coeff");
  // Default slope cancels the potential's push at both support ends so the
  // boundaries can wait: c * mass = pi/2, i.e. c = 8/(4 - theta) for m = 2.
  if (c < 0.0) {
    if (m == 2.0) {
      c = 8.0 / (4.0 - theta);
    } else {
      const int n = 4096;
      const double h = kPi / n;
      double mass = 0.0;
      for (int i = 1; i < n; ++i) {
        const double s2 = std::sin(i * h) * std::sin(i * h);
        const double base = (m - 1.0) / m * ((1.0 - theta) * s2 + theta * s2 * s2);
        mass += (i % 2 ? 4.0 : 2.0) * std::pow(base, 1.0 / (m - 1.0));
      }
      mass *= h / 3.0;
      c = kPi / (2.0 * mass);
    }
  }

  ProblemSpec s;
  s.name = "ex3";
  s.domain = {-kPi, 0.0};
  s.support = s.domain;
  s.boundary_mode = BoundaryMode::free;
  s.mobility = linear_mobility();
  s.energy = power_energy(nu, m);
  s.potential.convex = zero_part();
  s.potential.concave = quadratic_part(1.0, -kPi / 2.0);
  s.V_reference = [](double x) { return -0.5 * (x + kPi / 2.0) * (x + kPi / 2.0); };

  s.kernel.convex.general = {[c](double r) { return c * std::abs(r); },
                             [c](double r) { return c * sign_of(r); },
                             [](double) { return 0.0; }};
  s.kernel.kink_at_zero = true;
  s.kernel.slope_left = -c;
  s.kernel.slope_right = c;
  s.W_reference = [c](double r) { return c * std::abs(r); };

  s.u0 = [m, theta](double x) {
    if (x <= -kPi || x >= 0.0) return 0.0;
    const double s2 = std::sin(x) * std::sin(x);
    const double base = (m - 1.0) / m * ((1.0 - theta) * s2 + theta * s2 * s2);
    return std::pow(std::max(base, 0.0), 1.0 / (m - 1.0));
  };
  return s;
}

ProblemSpec make_ex4(const ParamMap& p) {
  require_positive(p, "mass");
  require_positive(p, "beta");
  const double mass = p.at("mass"), beta = p.at("beta");
  ProblemSpec s;
  s.name = "ex4";
  s.domain = {-6.0, 6.0};
  s.support = s.domain;
  s.boundary_mode = BoundaryMode::pinned;
  s.mobility = {[](double u) { return u * (1.0 + u * u * u); }, 1.0};
  s.energy = {boson::H, boson::H_prime, boson::H_double_prime};
  s.potential.convex = quadratic_part(beta);
  s.potential.concave = zero_part();
  s.V_reference = [beta](double x) { return 0.5 * beta * x * x; };
  s.W_reference = [](double) { return 0.0; };
  const double norm = mass / (2.0 * std::sqrt(2.0 * kPi));
  s.u0 = [norm](double x) {
    return norm * (std::exp(-0.5 * (x - 2.0) * (x - 2.0)) + std::exp(-0.5 * (x + 2.0) * (x + 2.0)));
  };
  return s;
}

ProblemSpec make_ex5(const ParamMap& p) {
  for (const char* k : {"m", "nu", "sigma"}) require_positive(p, k);
  const double m = p.at("m"), nu = p.at("nu"), sigma = p.at("sigma");
  if (!(m > 1.0)) throw std::invalid_argument("ex5 needs m > 1");
  ProblemSpec s;
  s.name = "ex5";
  s.domain = {-6.0, 6.0};
  s.support = s.domain;
  s.boundary_mode = BoundaryMode::pinned;
  s.mobility = linear_mobility();
  s.energy = power_energy(nu, m);
  s.potential.convex = zero_part();
  s.potential.concave = zero_part();
  s.V_reference = [](double) { return 0.0; };

  // W = -G with G the normalized Gaussian. W_c = a r^2, W_e = a r^2 + G.
  const double s2 = sigma * sigma;
  const double g0 = 1.0 / std::sqrt(2.0 * kPi * s2);
  const double a = g0 / s2;
  s.kernel.convex.quadratic = a;
  s.kernel.concave.quadratic = a;
  s.kernel.concave.general = {
      [g0, s2](double r) { return g0 * std::exp(-r * r / (2.0 * s2)); },
      [g0, s2](double r) { return -r / s2 * g0 * std::exp(-r * r / (2.0 * s2)); },
      [g0, s2](double r) { return (r * r / s2 - 1.0) / s2 * g0 * std::exp(-r * r / (2.0 * s2)); }};
  s.kernel.concave.general_value_d1 = [g0, s2](double r) {
    const double g = g0 * std::exp(-r * r / (2.0 * s2));
    return std::pair{g, -r / s2 * g};
  };
  s.W_reference = [g0, s2](double r) { return -g0 * std::exp(-r * r / (2.0 * s2)); };

  const double norm = 1.0 / (2.0 * std::sqrt(2.0 * kPi));
  s.u0 = [norm](double x) {
    return norm * (std::exp(-0.5 * (x - 2.5) * (x - 2.5)) + std::exp(-0.5 * (x + 2.5) * (x + 2.5)));
  };
  return s;
}

}  // namespace

double SplitPotential::value(double x) const {
  double v = convex.present() ? convex.value(x) : 0.0;
  if (concave.present()) v -= concave.value(x);
  return v;
}

double SplitPotential::d1(double x) const {
  double v = convex.present() ? convex.d1(x) : 0.0;
  if (concave.present()) v -= concave.d1(x);
  return v;
}

double KernelPart::value(double r) const {
  double v = quadratic * r * r;
  if (general.present()) v += general.value(r);
  return v;
}

double KernelPart::d1(double r) const {
  if (r == 0.0) return 0.0;
  double v = 2.0 * quadratic * r;
  if (general.present()) v += general.d1(r);
  return v;
}

double KernelPart::d2(double r, bool kink_at_zero) const {
  double v = 2.0 * quadratic;
  if (general.present() && !(kink_at_zero && r == 0.0)) v += general.d2(r);
  return v;
}

ExampleId parse_example_id(const std::string& id) {
  if (id == "ex1") return ExampleId::ex1;
  if (id == "ex2") return ExampleId::ex2;
  if (id == "ex3") return ExampleId::ex3;
  if (id == "ex4") return ExampleId::ex4;
  if (id == "ex5") return ExampleId::ex5;
  throw std::invalid_argument("unknown example id '" + id + "'");
}

std::string to_string(ExampleId id) {
  switch (id) {
    case ExampleId::ex1: return "ex1";
    case ExampleId::ex2: return "ex2";
    case ExampleId::ex3: return "ex3";
    case ExampleId::ex4: return "ex4";
    case ExampleId::ex5: return "ex5";
  }
  return "?";
}

ParamMap default_params(ExampleId id) {
  switch (id) {
    case ExampleId::ex1: return {{"m", 2.0}};
    case ExampleId::ex2:
      return {{"m", 2.0}, {"nu", 1.0}, {"mass", 4.2517e-2}, {"sigma", std::sqrt(0.2)}};
    // kernel_coeff < 0 selects 8/(4 - theta).
    case ExampleId::ex3:
      return {{"m", 2.0}, {"nu", 2.0}, {"theta", 0.25}, {"kernel_coeff", -1.0}};
    case ExampleId::ex4: return {{"mass", 1.0}, {"beta", 1.0}};
    case ExampleId::ex5: return {{"m", 1.5}, {"nu", 0.28}, {"sigma", 1.0}};
  }
  return {};
}

ProblemSpec build_example(ExampleId id, const ParamMap& params) {
  const ParamMap p = merged(id, params);
  ProblemSpec spec;
  switch (id) {
    case ExampleId::ex1: spec = make_ex1(p); break;
    case ExampleId::ex2: spec = make_ex2(p); break;
    case ExampleId::ex3: spec = make_ex3(p); break;
    case ExampleId::ex4: spec = make_ex4(p); break;
    case ExampleId::ex5: spec = make_ex5(p); break;
  }
  const ValidationReport report = validate_spec(spec, 1000);
  for (const auto& c : report.checks)
    if (!c.passed)
      throw std::invalid_argument(spec.name + ": validation check '" + c.name +
                                  "' failed (worst " + std::to_string(c.worst) + ")");
  return spec;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_spec(const ProblemSpec& spec, int samples) {
  ValidationReport report;
  const int n = std::max(samples, 2);
  constexpr double slack = 1e-13;

  auto sample = [n](double lo, double hi, int k) { return lo + (hi - lo) * k / (n - 1); };

  // Minimum of fn over a sampled interval.
  auto sweep_min = [&](double lo, double hi, auto&& fn) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) worst = std::min(worst, fn(sample(lo, hi, k)));
    return worst;
  };
  auto sweep_max = [&](double lo, double hi, auto&& fn) {
    double worst = 0.0;
    for (int k = 0; k < n; ++k) worst = std::max(worst, fn(sample(lo, hi, k)));
    return worst;
  };
  auto add_min_check = [&](const std::string& name, double worst, double bound) {
    report.checks.push_back({name, worst >= bound, worst});
  };
  auto add_max_check = [&](const std::string& name, double worst, double bound) {
    report.checks.push_back({name, worst <= bound, worst});
  };

  const Interval dom = spec.domain;
  const double u0_max = sweep_max(dom.lo, dom.hi, [&](double x) { return spec.u0(x); });
  const double u_max = 10.0 * std::max(u0_max, 1e-300);

  // Mobility.
  const double f0 = spec.mobility.f(0.0);
  report.checks.push_back({"mobility f(0)=0", f0 == 0.0, f0});
  {
    double worst = std::numeric_limits<double>::infinity();
    double prev = spec.mobility.f(0.0);
    for (int k = 1; k < n; ++k) {
      const double cur = spec.mobility.f(sample(0.0, u_max, k));
      worst = std::min(worst, cur - prev);
      prev = cur;
    }
    add_min_check("mobility nondecreasing", worst, 0.0);
  }
  report.checks.push_back(
      {"mobility f'(0)!=0", spec.mobility.f_prime_zero != 0.0, spec.mobility.f_prime_zero});

  // Internal energy on (0, u_max].
  add_min_check("H''>0",
                sweep_min(u_max / n, u_max, [&](double u) { return spec.energy.H_double_prime(u); }),
                std::numeric_limits<double>::min());
  {
    double worst = 0.0;
    const double lo = std::max(1e-3, u_max * 1e-3);
    for (int k = 0; k < n; ++k) {
      const double u = sample(lo, u_max, k);
      const double du = 1e-5 * u;
      const double fd = (spec.energy.H(u + du) - spec.energy.H(u - du)) / (2.0 * du);
      const double exact = spec.energy.H_prime(u);
      worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1.0));
    }
    add_max_check("H' matches dH/du", worst, 1e-6);
  }
  if (spec.boundary_mode == BoundaryMode::free) {
    const double h2 = spec.energy.H_double_prime(0.0);
    report.checks.push_back({"H''(0) finite", std::isfinite(h2), h2});
  }

  // External potential.
  auto part_d2_min = [&](const ConvexPart& part, double lo, double hi) {
    if (!part.present()) return 0.0;
    return sweep_min(lo, hi, [&](double x) { return part.d2(x); });
  };
  add_min_check("V_c''>=0", part_d2_min(spec.potential.convex, dom.lo, dom.hi), -slack);
  add_min_check("V_e''>=0", part_d2_min(spec.potential.concave, dom.lo, dom.hi), -slack);
  if (spec.V_reference) {
    add_max_check("V_c-V_e=V", sweep_max(dom.lo, dom.hi, [&](double x) {
                    const double ref = spec.V_reference(x);
                    return std::abs(spec.potential.value(x) - ref) / (1.0 + std::abs(ref));
                  }),
                  1e-12);
  }

  // Interaction kernel on [-|Omega|, |Omega|].
  const double R = dom.length();
  auto kernel_d2_min = [&](const KernelPart& part) {
    if (!part.present()) return 0.0;
    return sweep_min(-R, R, [&](double r) {
      if (spec.kernel.kink_at_zero && r == 0.0) return 0.0;
      return part.d2(r, spec.kernel.kink_at_zero);
    });
  };
  add_min_check("W_c''>=0", kernel_d2_min(spec.kernel.convex), -slack);
  add_min_check("W_e''>=0", kernel_d2_min(spec.kernel.concave), -slack);
  auto evenness = [&](const KernelPart& part) {
    if (!part.present()) return 0.0;
    return sweep_max(0.0, R, [&](double r) { return std::abs(part.value(r) - part.value(-r)); });
  };
  add_max_check("W_c even", evenness(spec.kernel.convex), 1e-12);
  add_max_check("W_e even", evenness(spec.kernel.concave), 1e-12);
  if (spec.W_reference) {
    add_max_check("W_c-W_e=W", sweep_max(-R, R, [&](double r) {
                    const double ref = spec.W_reference(r);
                    return std::abs(spec.kernel.value(r) - ref) / (1.0 + std::abs(ref));
                  }),
                  1e-12);
  }

  // Initial density sign pattern.
  if (spec.boundary_mode == BoundaryMode::pinned) {
    add_min_check("u0>0 on domain", sweep_min(dom.lo, dom.hi, [&](double x) { return spec.u0(x); }),
                  std::numeric_limits<double>::min());
  } else {
    const Interval sup = spec.support;
    const double ends = std::max(std::abs(spec.u0(sup.lo)), std::abs(spec.u0(sup.hi)));
    report.checks.push_back({"u0=0 at support ends", ends == 0.0, ends});
    double inner = std::numeric_limits<double>::infinity();
    for (int k = 1; k < n - 1; ++k) inner = std::min(inner, spec.u0(sample(sup.lo, sup.hi, k)));
    add_min_check("u0>0 inside support", inner, std::numeric_limits<double>::min());
  }
  return report;
}

namespace boson {

double inverse_cubic_integral(double u) {
  // d/du [ ln(1+u)/3 - ln(u^2-u+1)/6 + atan((2u-1)/sqrt3)/sqrt3 ] = 1/(1+u^3)
  const double s3 = std::sqrt(3.0);
  return std::log1p(u) / 3.0 - std::log(u * u - u + 1.0) / 6.0 +
         (std::atan((2.0 * u - 1.0) / s3) + kPi / 6.0) / s3;
}

double H_prime(double u) {
  // log(u / cbrt(1+u^3)), rewritten to avoid cancellation for large u.
  if (u > 1.0) return -std::log1p(1.0 / (u * u * u)) / 3.0;
  return std::log(u) - std::log1p(u * u * u) / 3.0;
}

// Integrating H' by parts gives H(u) = u H'(u) - int_0^u ds/(1+s^3).
double H(double u) {
  if (u == 0.0) return 0.0;
  return u * H_prime(u) - inverse_cubic_integral(u);
}

double H_double_prime(double u) { return 1.0 / (u * (1.0 + u * u * u)); }

}  // namespace boson

}  // namespace envara
