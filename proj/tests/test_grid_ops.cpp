#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "envara/grid_ops.hpp"

using namespace envara;

namespace {

std::vector<double> random_field(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("forward_diff and cell_div on small fields") {
  const std::vector<double> l{0.0, 1.0, 4.0, 9.0};
  const CellField D = forward_diff(l, 0.5);
  REQUIRE(D.size() == 3);
  CHECK(D[0] == doctest::Approx(2.0));
  CHECK(D[1] == doctest::Approx(6.0));
  CHECK(D[2] == doctest::Approx(10.0));

  const NodeField d = cell_div(D, 0.5);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == doctest::Approx(8.0));
  CHECK(d[1] == doctest::Approx(8.0));

  CHECK_THROWS_AS(forward_diff(l, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(forward_diff(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("centered_diff is exact for linear data and one-sided at the ends") {
  const std::vector<double> l{1.0, 3.0, 5.0, 7.0, 9.0};
  for (double v : centered_diff(l, 0.25)) CHECK(v == doctest::Approx(8.0));

  const std::vector<double> q{0.0, 1.0, 4.0};
  const NodeField c = centered_diff(q, 1.0);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(2.0));
  CHECK(c[2] == doctest::Approx(3.0));
}

TEST_CASE("centered_diff averages adjacent forward differences") {
  std::mt19937_64 rng(7);
  for (int M : {2, 5, 17}) {
    const auto l = random_field(rng, M + 1);
    const double h = 1.0 / M;
    const CellField D = forward_diff(l, h);
    const NodeField c = centered_diff(l, h);
    for (int i = 1; i < M; ++i) CHECK(std::abs(c[i] - 0.5 * (D[i - 1] + D[i])) <= 1e-14 * (1.0 + std::abs(c[i])) * M);
  }
}

TEST_CASE("inner products") {
  CHECK(inner_node(std::vector<double>{1, 1, 1}, std::vector<double>{1, 1, 1}, 1.0) == 2.0);
  CHECK(inner_node(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}, 1.0) == 4.0);
  CHECK(inner_cell(std::vector<double>{1, 1}, std::vector<double>{1, 1}, 1.0) == 2.0);
  CHECK(inner_cell(std::vector<double>{2, 4}, std::vector<double>{1, 1}, 0.5) == 3.0);
  CHECK_THROWS_AS(inner_node(std::vector<double>{1, 2}, std::vector<double>{1}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(inner_cell(std::vector<double>{1, 2}, std::vector<double>{1}, 1.0),
                  std::invalid_argument);

  std::mt19937_64 rng(11);
  const auto l = random_field(rng, 9), g = random_field(rng, 9);
  CHECK(inner_node(l, g, 0.125) == doctest::Approx(inner_node(g, l, 0.125)));
  const auto p = random_field(rng, 8), s = random_field(rng, 8);
  std::vector<double> p3 = p;
  for (auto& v : p3) v *= 3.0;
  CHECK(inner_cell(p3, s, 0.125) == doctest::Approx(3.0 * inner_cell(p, s, 0.125)));
}

TEST_CASE("summation by parts") {
  std::mt19937_64 rng(3);
  for (int M : {2, 4, 8, 16, 32, 64}) {
    const double h = 2.0 / M;
    for (int trial = 0; trial < 100; ++trial) {
      auto l = random_field(rng, M + 1);
      l.front() = 0.0;
      l.back() = 0.0;
      const auto phi = random_field(rng, M);
      const NodeField d = cell_div(phi, h);
      double lhs = 0.0;
      for (int i = 1; i < M; ++i) lhs += h * l[i] * d[i - 1];
      const double rhs = inner_cell(forward_diff(l, h), phi, h);
      CHECK(std::abs(lhs + rhs) <= 1e-12 * norm2(l) * norm2(phi));
    }
  }
}

TEST_CASE("operators are linear") {
  std::mt19937_64 rng(5);
  const int M = 12;
  const double h = 0.1, a = 1.7, b = -0.3;
  const auto l = random_field(rng, M + 1), g = random_field(rng, M + 1);
  std::vector<double> comb(M + 1);
  for (int i = 0; i <= M; ++i) comb[i] = a * l[i] + b * g[i];
  const auto Dl = forward_diff(l, h), Dg = forward_diff(g, h), Dc = forward_diff(comb, h);
  for (int k = 0; k < M; ++k) CHECK(std::abs(Dc[k] - (a * Dl[k] + b * Dg[k])) <= 1e-13 * 100);
  const auto cl = centered_diff(l, h), cg = centered_diff(g, h), cc = centered_diff(comb, h);
  for (int i = 0; i <= M; ++i) CHECK(std::abs(cc[i] - (a * cl[i] + b * cg[i])) <= 1e-13 * 100);
}

TEST_CASE("nonuniform overloads reduce to the uniform ones") {
  const LagrangianGrid grid = LagrangianGrid::uniform({0.0, 1.0}, 8, [](double x) { return 1.0 + x; });
  std::mt19937_64 rng(13);
  const auto l = random_field(rng, 9);
  const auto phi = random_field(rng, 8);
  const auto a = forward_diff(l, grid), b = forward_diff(l, 0.125);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]));
  const auto c = cell_div(phi, grid), d = cell_div(phi, 0.125);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == doctest::Approx(d[k]));
  CHECK(inner_node(l, l, grid) == doctest::Approx(inner_node(l, l, 0.125)));
  CHECK(inner_cell(phi, phi, grid) == doctest::Approx(inner_cell(phi, phi, 0.125)));
  CHECK(grid.weight(0) == doctest::Approx(0.0625));
  CHECK(grid.weight(4) == doctest::Approx(0.125));
  CHECK(grid.u0_cells[0] == doctest::Approx(1.0625));
}

TEST_CASE("error_norms") {
  const ErrorNorms z = error_norms(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1});
  CHECK(z.L1 == 0.0);
  CHECK(z.L2 == 0.0);
  CHECK(z.Linf == 0.0);

  const int M = 10;
  const double h = 0.1;
  const ErrorNorms c = error_norms(std::vector<double>(M + 1, 1.0), std::vector<double>(M + 1, h));
  CHECK(c.L1 == doctest::Approx(M * h));
  CHECK(c.Linf == 1.0);

  const ErrorNorms e = error_norms(std::vector<double>{1, 2}, std::vector<double>{1, 1});
  CHECK(e.L2 == doctest::Approx(std::sqrt(2.5)));
  CHECK(e.L1 == doctest::Approx(1.5));
  CHECK(e.Linf == 2.0);

  CHECK_THROWS_AS(error_norms(std::vector<double>{1, 2}, std::vector<double>{1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(error_norms(std::vector<double>{1, 2}, std::vector<double>{1, -1}),
                  std::invalid_argument);
}

TEST_CASE("moving mesh widths") {
  const NodeField w = moving_mesh_widths(std::vector<double>{0.0, 1.0, 3.0, 6.0});
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 1.5);
  CHECK(w[2] == 2.5);
  CHECK(w[3] == 3.0);
}
