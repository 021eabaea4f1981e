#pragma once
// Exact finite-grid ground truth.  A value distribution is collapsed onto n
// cell midpoints, and the seller's problem -- maximize expected transfer
// subject to participation, eps-truthfulness between every ordered pair of
// grid types, and allocation bounds -- becomes a linear program that a dense
// two-phase simplex solves exactly.  The solver works on the transposed
// (row-light) orientation and recovers the menu (x, t) from the shadow
// prices, so the tableau stays at 2n rows regardless of the n^2 constraints.

#include <string>
#include <vector>

#include "epsmech/distribution.hpp"

namespace epsmech {

enum class Rel { le, eq, ge };

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

// Outcome of a generic dense LP solve.  `row_dual` holds one shadow price
// per constraint row in the caller's orientation (the derivative of the
// optimal objective in that row's right-hand side), which for a problem fed
// in transposed from lets the caller read off the untransposed solution.
struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_dual;
  long iterations = 0;
};

// Minimizes (or maximizes) c.x over { x >= 0 : rows[r].x (rels[r]) rhs[r] }
// with a dense two-phase tableau.  Pivoting is deterministic: most-negative
// entering column with smallest-index ties, switching to Bland's
// smallest-index rule (which provably cannot cycle) whenever the objective
// stalls, so every run is bit-reproducible and terminates.
LpResult simplex_solve(const std::vector<double>& c, bool maximize,
                       const std::vector<std::vector<double>>& rows,
                       const std::vector<Rel>& rels,
                       const std::vector<double>& rhs,
                       long max_iterations = 200000);

// One finite instance of the seller's problem on a value grid.
struct LPInstance {
  std::vector<double> values;  // ascending cell midpoints
  std::vector<double> masses;  // nonnegative, summing to one
  double eps = 0.0;
  double v_bar = 0.0;
};

// Collapses dist onto the midpoints of an n-cell uniform partition of
// [0, v_bar]; each midpoint carries its cell's probability mass.
LPInstance discretize(const ValueDistribution& dist, int n, double eps);

// Revenue of the best single posted price restricted to the grid.
double best_grid_posted_price(const LPInstance& inst);

// Exact optimum of the finite problem.  The reported menu is re-checked
// against its own constraints at 1e-9 without trusting the solver state;
// any breach downgrades the status to "numerical-failure".
struct LPSolution {
  double value = 0.0;
  std::vector<double> x;  // allocation per grid type, in [0, 1]
  std::vector<double> t;  // transfer per grid type
  std::string status;     // "optimal" | "infeasible" | "numerical-failure"
  long iterations = 0;
  double max_ir_violation = 0.0;   // worst participation breach (>= 0)
  double max_ic_violation = 0.0;   // worst eps-truthfulness breach (>= 0)
  double objective_gap = 0.0;      // |sum f_i t_i - value|
};

LPSolution lp_solve(const LPInstance& inst);

// Jointly runs the three revenue estimates -- the constructed randomized
// mechanism from below, the grid optimum in the middle, and the dual
// certificate from above -- and asserts the chain with an O(1/n)
// discretization allowance c = 2 v_bar sup f.  At eps = 0 the construction
// and the certificate both degenerate to the best posted price.
struct SandwichReport {
  double eps = 0.0;
  int n = 0;
  double lower = 0.0;   // randomized-mechanism revenue
  double middle = 0.0;  // grid LP optimum
  double upper = 0.0;   // dual certificate bound
  double slack = 0.0;   // 2 v_bar sup(f) / n
  bool lower_ok = false;
  bool upper_ok = false;
  bool passed = false;
  std::string message;
};

SandwichReport sandwich_check(const ValueDistribution& dist, double eps, int n);

}  // namespace epsmech
