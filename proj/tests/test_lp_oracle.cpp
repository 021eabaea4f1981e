// Finite-grid ground truth: the generic dense simplex, the midpoint
// discretization, and the recovered menus are pinned against hand-solved
// programs, closed-form grid optima, and an independently built
// untransposed formulation.
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "epsmech/delayed.hpp"
#include "epsmech/distribution.hpp"
#include "epsmech/lp_oracle.hpp"

using namespace epsmech;
using doctest::Approx;

TEST_SUITE("lp_oracle") {

TEST_CASE("two-phase simplex agrees with hand-solved programs") {
  SUBCASE("maximize with mixed inequality directions") {
    // max x1 + x2  s.t.  x1 <= 2, x2 <= 3, x1 + x2 >= 1   ->  5 at (2, 3)
    LpResult r = simplex_solve({1.0, 1.0}, true,
                               {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                               {Rel::le, Rel::le, Rel::ge}, {2.0, 3.0, 1.0});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == Approx(5.0).epsilon(1e-12));
    CHECK(r.x[0] == Approx(2.0).epsilon(1e-12));
    CHECK(r.x[1] == Approx(3.0).epsilon(1e-12));
    // each cap binds with unit price; the floor is slack
    CHECK(r.row_dual[0] == Approx(1.0).epsilon(1e-12));
    CHECK(r.row_dual[1] == Approx(1.0).epsilon(1e-12));
    CHECK(r.row_dual[2] == Approx(0.0));
  }
  SUBCASE("minimize over a covering constraint") {
    // min 3x1 + 2x2  s.t.  x1 + x2 >= 4, x1 <= 10   ->  8 at (0, 4)
    LpResult r = simplex_solve({3.0, 2.0}, false, {{1.0, 1.0}, {1.0, 0.0}},
                               {Rel::ge, Rel::le}, {4.0, 10.0});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == Approx(8.0).epsilon(1e-12));
    CHECK(r.x[0] == Approx(0.0));
    CHECK(r.x[1] == Approx(4.0).epsilon(1e-12));
    CHECK(r.row_dual[0] == Approx(2.0).epsilon(1e-12));
    CHECK(r.row_dual[1] == Approx(0.0));
  }
  SUBCASE("equality row priced through an artificial") {
    // min x1 + 2x2  s.t.  x1 + x2 = 3, x1 <= 1   ->  5 at (1, 2)
    LpResult r = simplex_solve({1.0, 2.0}, false, {{1.0, 1.0}, {1.0, 0.0}},
                               {Rel::eq, Rel::le}, {3.0, 1.0});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == Approx(5.0).epsilon(1e-12));
    CHECK(r.x[0] == Approx(1.0).epsilon(1e-12));
    CHECK(r.x[1] == Approx(2.0).epsilon(1e-12));
    // marginal unit of demand costs 2 (x2 absorbs it); relaxing the cap on
    // the cheap variable saves 1
    CHECK(r.row_dual[0] == Approx(2.0).epsilon(1e-12));
    CHECK(r.row_dual[1] == Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("negative right-hand side is renormalized") {
    // min x1  s.t.  -x1 <= -2  (x1 >= 2)  ->  2, shadow price -1
    LpResult r = simplex_solve({1.0}, false, {{-1.0}}, {Rel::le}, {-2.0});
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == Approx(2.0).epsilon(1e-12));
    CHECK(r.row_dual[0] == Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("unbounded ray is reported") {
    // max x1  s.t.  x1 - x2 <= 1  with x2 free to grow
    LpResult r = simplex_solve({1.0, 0.0}, true, {{1.0, -1.0}}, {Rel::le},
                               {1.0});
    CHECK(r.status == LpStatus::unbounded);
  }
  SUBCASE("contradictory bounds are reported infeasible") {
    LpResult r = simplex_solve({1.0}, false, {{1.0}, {1.0}},
                               {Rel::le, Rel::ge}, {1.0, 2.0});
    CHECK(r.status == LpStatus::infeasible);
  }
}

TEST_CASE("midpoint discretization carries the exact cell masses") {
  auto dist = make_uniform(1.0);
  LPInstance inst = discretize(dist, 4, 0.01);
  REQUIRE(inst.values.size() == 4);
  const double want[4] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) {
    CHECK(inst.values[i] == Approx(want[i]).epsilon(1e-15));
    CHECK(inst.masses[i] == Approx(0.25).epsilon(1e-14));
  }
  CHECK(inst.eps == 0.01);
  CHECK(inst.v_bar == 1.0);
  CHECK_THROWS_AS(discretize(dist, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(discretize(dist, 10, -1e-9), std::domain_error);

  auto env = make_envelope_dist(2.0, 0.6, 0.25, 1.0);
  LPInstance fine = discretize(env, 137, 0.0);
  double total = 0.0;
  for (double f : fine.masses) total += f;
  CHECK(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("best grid posted price matches the closed form on the uniform") {
  auto dist = make_uniform(1.0);
  LPInstance inst = discretize(dist, 100, 0.0);
  // price 0.505 sells to the 50 cells above it: 0.505 * 0.50 = 0.2525
  CHECK(best_grid_posted_price(inst) == Approx(0.2525).epsilon(1e-13));
  CHECK(best_grid_posted_price(inst) >=
        dist.optimal_price().revenue - 1.0 / 100);
}

TEST_CASE("single-type instance sells outright") {
  LPInstance inst;
  inst.values = {1.0};
  inst.masses = {1.0};
  inst.eps = 0.0;
  inst.v_bar = 1.0;
  LPSolution sol = lp_solve(inst);
  REQUIRE(sol.status == "optimal");
  CHECK(sol.value == Approx(1.0).epsilon(1e-12));
  CHECK(sol.x[0] == Approx(1.0).epsilon(1e-12));
  CHECK(sol.t[0] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact truthfulness reduces the grid optimum to a posted price") {
  for (int which = 0; which < 2; ++which) {
    auto dist = which == 0 ? make_uniform(1.0)
                           : make_envelope_dist(2.0, 0.6, 0.25, 1.0);
    CAPTURE(which);
    LPInstance inst = discretize(dist, 25, 0.0);
    LPSolution sol = lp_solve(inst);
    REQUIRE(sol.status == "optimal");
    CHECK(sol.value == Approx(best_grid_posted_price(inst)).epsilon(1e-10));
  }
}

TEST_CASE("grid optimum is nondecreasing in the truthfulness slack") {
  auto dist = make_uniform(1.0);
  const double eps_grid[4] = {0.0, 1e-3, 1e-2, 3e-2};
  double prev = -1.0;
  for (double eps : eps_grid) {
    CAPTURE(eps);
    LPSolution sol = lp_solve(discretize(dist, 40, eps));
    REQUIRE(sol.status == "optimal");
    CHECK(sol.value >= prev - 1e-10);
    prev = sol.value;
  }
}

TEST_CASE("positive slack buys strictly more than any posted price") {
  auto dist = make_uniform(1.0);
  const double eps = 1e-2;
  LPInstance inst = discretize(dist, 100, eps);
  LPSolution sol = lp_solve(inst);
  REQUIRE(sol.status == "optimal");
  CHECK(sol.max_ir_violation <= 1e-9);
  CHECK(sol.max_ic_violation <= 1e-9);
  CHECK(sol.objective_gap <= 1e-9);

  // The grid optimum must dominate the continuum construction up to the
  // O(1/n) discretization allowance.
  MuChoice mc = choose_mu(dist, eps);
  double lower = delayed_revenue(mc.dm, dist).value_direct;
  double slack = 2.0 * dist.v_bar() * dist.pdf_sup() / 100;
  CHECK(sol.value >= lower - slack);
  CHECK(sol.value > best_grid_posted_price(inst) + 1e-3);

  // Randomization onset: the optimal menu screens with interior lotteries.
  int interior = 0;
  for (double xi : sol.x) {
    if (xi > 1e-6 && xi < 1.0 - 1e-6) ++interior;
  }
  CHECK(interior >= 1);
}

// Untransposed formulation built independently: variables (x_i, tp_i, tm_i)
// with t_i = tp_i - tm_i, rows for participation, pairwise truthfulness,
// and the allocation cap.  Must match the transposed solve's value.
static double untransposed_value(const LPInstance& inst) {
  const std::size_t n = inst.values.size();
  const std::size_t n_cols = 3 * n;
  std::vector<double> c(n_cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    c[n + i] = inst.masses[i];
    c[2 * n + i] = -inst.masses[i];
  }
  std::vector<std::vector<double>> rows;
  std::vector<Rel> rels;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n_cols, 0.0);
    row[i] = inst.values[i];
    row[n + i] = -1.0;
    row[2 * n + i] = 1.0;
    rows.push_back(row);
    rels.push_back(Rel::ge);
    rhs.push_back(0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<double> row(n_cols, 0.0);
      row[i] = inst.values[i];
      row[n + i] = -1.0;
      row[2 * n + i] = 1.0;
      row[j] -= inst.values[i];
      row[n + j] += 1.0;
      row[2 * n + j] -= 1.0;
      rows.push_back(row);
      rels.push_back(Rel::ge);
      rhs.push_back(-inst.eps);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n_cols, 0.0);
    row[i] = 1.0;
    rows.push_back(row);
    rels.push_back(Rel::le);
    rhs.push_back(1.0);
  }
  LpResult r = simplex_solve(c, true, rows, rels, rhs);
  REQUIRE(r.status == LpStatus::optimal);
  return r.objective;
}

TEST_CASE("transposed and untransposed formulations agree") {
  auto dist = make_envelope_dist(1.5, 0.5, 0.2, 1.0);
  for (double eps : {0.0, 5e-3}) {
    CAPTURE(eps);
    LPInstance inst = discretize(dist, 12, eps);
    LPSolution sol = lp_solve(inst);
    REQUIRE(sol.status == "optimal");
    CHECK(sol.value == Approx(untransposed_value(inst)).epsilon(1e-8));
  }
}

TEST_CASE("revenue chain holds on the uniform at one percent slack") {
  auto dist = make_uniform(1.0);
  SandwichReport rep = sandwich_check(dist, 1e-2, 150);
  CHECK(rep.passed);
  CHECK(rep.lower_ok);
  CHECK(rep.upper_ok);
  CHECK(rep.message.empty());
  CHECK(rep.lower > 0.25);
  CHECK(rep.middle > 0.25);
  CHECK(rep.upper >= 0.25 - 1e-8);
  CHECK(rep.slack == Approx(2.0 / 150));

  SandwichReport degenerate = sandwich_check(dist, 0.0, 60);
  CHECK(degenerate.passed);
  CHECK(degenerate.lower == Approx(0.25).epsilon(1e-9));
  CHECK(degenerate.upper == Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(degenerate.middle - 0.25) <= degenerate.slack);
}

}  // TEST_SUITE
