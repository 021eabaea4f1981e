#include "epsmech/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "epsmech/delayed.hpp"
#include "epsmech/dual_bound.hpp"
#include "epsmech/mechanism.hpp"
#include "epsmech/numerics.hpp"

namespace epsmech {

namespace {

constexpr double kCostTol = 1e-9;    // reduced-cost entering threshold
constexpr double kPivotTol = 1e-10;  // smallest acceptable pivot element
constexpr double kFeasTol = 1e-8;    // phase-one residual declaring feasible
constexpr double kRatioTie = 1e-12;  // ratio-test tie window

// Dense tableau in minimize orientation with nonnegative right-hand sides.
// Rows 0..m-1 hold constraints; row m the running reduced costs; row m+1 the
// phase-one costs.  The last column is the right-hand side.
struct Tableau {
  std::size_t m = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;
  std::vector<double> a;
  std::vector<int> basis;
  std::vector<char> artificial;

  double* row(std::size_t r) { return a.data() + r * stride; }
  double& at(std::size_t r, std::size_t c) { return a[r * stride + c]; }
};

void pivot(Tableau& tb, std::size_t pr, std::size_t pc) {
  double* prow = tb.row(pr);
  double inv = 1.0 / prow[pc];
  for (std::size_t j = 0; j <= tb.cols; ++j) prow[j] *= inv;
  prow[pc] = 1.0;
  for (std::size_t r = 0; r < tb.m + 2; ++r) {
    if (r == pr) continue;
    double* rr = tb.row(r);
    double f = rr[pc];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= tb.cols; ++j) rr[j] -= f * prow[j];
    rr[pc] = 0.0;
  }
  tb.basis[pr] = static_cast<int>(pc);
}

// Rebuilds a cost row's reduced costs and objective cell exactly from the
// current tableau, basis, and original costs, clearing whatever drift the
// incremental pivot updates have accumulated.
void refresh_cost_row(Tableau& tb, std::size_t cost_row,
                      const std::vector<double>& cost) {
  double* cr = tb.row(cost_row);
  for (std::size_t j = 0; j < tb.cols; ++j) cr[j] = cost[j];
  cr[tb.cols] = 0.0;
  for (std::size_t r = 0; r < tb.m; ++r) {
    double cb = cost[tb.basis[r]];
    if (cb == 0.0) continue;
    const double* rr = tb.row(r);
    for (std::size_t j = 0; j <= tb.cols; ++j) cr[j] -= cb * rr[j];
  }
  for (std::size_t r = 0; r < tb.m; ++r) cr[tb.basis[r]] = 0.0;
}

// Runs the pivot loop against the given cost row.  The entering column is
// normally the most negative reduced cost (smallest index on exact ties);
// after 2(m+1) consecutive pivots without objective progress the choice
// drops to Bland's smallest-index rule, which provably cannot cycle, and
// stays there until the objective strictly improves again.  The leaving row
// is always minimum-ratio with ties broken on the smallest basic variable
// index.  Every choice is a deterministic function of the tableau, so
// repeated runs are bit-identical.  The loop also returns as soon as the
// objective cell reaches rhs_stop; phase one passes its known optimum so
// that an instance that starts feasible does not churn through degenerate
// pivots it cannot profit from.
LpStatus run_simplex(Tableau& tb, std::size_t cost_row, bool allow_artificial,
                     long& iter, long max_iterations,
                     double rhs_stop = std::numeric_limits<double>::infinity()) {
  const long stall_limit = 2 * static_cast<long>(tb.m + 1);
  long stall = 0;
  bool bland = false;
  for (;;) {
    if (iter >= max_iterations) return LpStatus::iteration_limit;
    if (tb.at(cost_row, tb.cols) >= rhs_stop) return LpStatus::optimal;
    const double* cr = tb.row(cost_row);
    std::size_t enter = tb.cols;
    if (bland) {
      for (std::size_t j = 0; j < tb.cols; ++j) {
        if (!allow_artificial && tb.artificial[j]) continue;
        if (cr[j] < -kCostTol) {
          enter = j;
          break;
        }
      }
    } else {
      double most = -kCostTol;
      for (std::size_t j = 0; j < tb.cols; ++j) {
        if (!allow_artificial && tb.artificial[j]) continue;
        if (cr[j] < most) {
          most = cr[j];
          enter = j;
        }
      }
    }
    if (enter == tb.cols) return LpStatus::optimal;

    std::size_t leave = tb.m;
    if (!allow_artificial) {
      // Any artificial still basic after phase one sits at level ~zero, and
      // the plain ratio test would let it grow through a negative entry in
      // the entering column -- silently leaving the original feasible
      // region.  If the entering column touches such a row at all, evict
      // the artificial right there with a zero-length step.
      for (std::size_t r = 0; r < tb.m; ++r) {
        int b = tb.basis[r];
        if (b < 0 || !tb.artificial[b]) continue;
        if (std::abs(tb.at(r, enter)) > kPivotTol &&
            std::abs(tb.at(r, tb.cols)) <= kFeasTol) {
          leave = r;
          break;
        }
      }
    }
    if (leave == tb.m) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < tb.m; ++r) {
        double arj = tb.at(r, enter);
        if (arj <= kPivotTol) continue;
        // negative dust on a right-hand side must not drive the step backwards
        double ratio = std::max(0.0, tb.at(r, tb.cols) / arj);
        if (ratio < best - kRatioTie) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + kRatioTie && leave < tb.m &&
                   tb.basis[r] < tb.basis[leave]) {
          leave = r;
          if (ratio < best) best = ratio;
        }
      }
      if (leave == tb.m) return LpStatus::unbounded;
    }

    // The cost row's right-hand cell tracks minus the current objective, so
    // a strict increase there is strict objective progress.
    double before = tb.at(cost_row, tb.cols);
    pivot(tb, leave, enter);
    ++iter;
    double after = tb.at(cost_row, tb.cols);
    if (after > before + 1e-14 * (1.0 + std::abs(before))) {
      stall = 0;
      bland = false;
    } else if (++stall >= stall_limit) {
      bland = true;
    }
  }
}

}  // namespace

LpResult simplex_solve(const std::vector<double>& c, bool maximize,
                       const std::vector<std::vector<double>>& rows,
                       const std::vector<Rel>& rels,
                       const std::vector<double>& rhs,
                       long max_iterations) {
  const std::size_t m = rows.size();
  const std::size_t n_struct = c.size();
  if (rels.size() != m || rhs.size() != m) {
    throw std::invalid_argument("simplex_solve: inconsistent row counts");
  }
  for (const auto& r : rows) {
    if (r.size() != n_struct) {
      throw std::invalid_argument("simplex_solve: ragged constraint matrix");
    }
  }

  // Normalize every row to a nonnegative right-hand side, remembering the
  // flip so shadow prices can be reported in the caller's orientation.
  std::vector<double> sign(m, 1.0);
  std::vector<Rel> rel(rels);
  for (std::size_t r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) {
      sign[r] = -1.0;
      if (rel[r] == Rel::le) {
        rel[r] = Rel::ge;
      } else if (rel[r] == Rel::ge) {
        rel[r] = Rel::le;
      }
    }
  }

  std::vector<int> slack_col(m, -1), art_col(m, -1);
  std::size_t next = n_struct;
  for (std::size_t r = 0; r < m; ++r) {
    if (rel[r] != Rel::eq) slack_col[r] = static_cast<int>(next++);
  }
  std::size_t n_art_start = next;
  for (std::size_t r = 0; r < m; ++r) {
    if (rel[r] != Rel::le) art_col[r] = static_cast<int>(next++);
  }

  Tableau tb;
  tb.m = m;
  tb.cols = next;
  tb.stride = tb.cols + 1;
  tb.a.assign((m + 2) * tb.stride, 0.0);
  tb.basis.assign(m, -1);
  tb.artificial.assign(tb.cols, 0);
  for (std::size_t j = n_art_start; j < tb.cols; ++j) tb.artificial[j] = 1;

  for (std::size_t r = 0; r < m; ++r) {
    double* row = tb.row(r);
    for (std::size_t j = 0; j < n_struct; ++j) row[j] = sign[r] * rows[r][j];
    if (slack_col[r] >= 0) row[slack_col[r]] = (rel[r] == Rel::le) ? 1.0 : -1.0;
    if (art_col[r] >= 0) row[art_col[r]] = 1.0;
    row[tb.cols] = sign[r] * rhs[r];
    tb.basis[r] = (rel[r] == Rel::le) ? slack_col[r] : art_col[r];
  }
  std::vector<double> cmin(tb.cols, 0.0);
  for (std::size_t j = 0; j < n_struct; ++j) cmin[j] = maximize ? -c[j] : c[j];

  LpResult res;
  long iter = 0;
  bool need_phase1 = n_art_start < tb.cols;
  if (need_phase1) {
    std::vector<double> p1cost(tb.cols, 0.0);
    for (std::size_t j = n_art_start; j < tb.cols; ++j) p1cost[j] = 1.0;
    refresh_cost_row(tb, m + 1, p1cost);

    // The artificial mass actually left in the basis; the sole trustworthy
    // feasibility measure once the objective cell has drifted.
    auto true_infeasibility = [&]() {
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        int b = tb.basis[r];
        if (b >= 0 && tb.artificial[b]) s += std::max(0.0, tb.at(r, tb.cols));
      }
      return s;
    };

    double infeas;
    for (;;) {
      long before = iter;
      LpStatus s =
          run_simplex(tb, m + 1, true, iter, max_iterations, -kFeasTol);
      if (s != LpStatus::optimal) {
        // the phase-one objective is bounded below by zero, so unbounded
        // here can only mean numerical breakdown; fold it into the limit
        // status
        res.status = LpStatus::iteration_limit;
        res.iterations = iter;
        return res;
      }
      infeas = true_infeasibility();
      tb.at(m + 1, tb.cols) = -infeas;
      if (infeas <= kFeasTol) break;
      if (iter == before) break;  // genuinely optimal yet still infeasible
    }
    if (infeas > kFeasTol) {
      res.status = LpStatus::infeasible;
      res.iterations = iter;
      return res;
    }
    // Pivot any zero-level artificial out of the basis, picking the largest
    // available element like partial-pivoting elimination would.
    for (std::size_t r = 0; r < m; ++r) {
      int b = tb.basis[r];
      if (b < 0 || !tb.artificial[b]) continue;
      std::size_t pc = tb.cols;
      double biggest = kPivotTol;
      for (std::size_t j = 0; j < n_art_start; ++j) {
        double mag = std::abs(tb.at(r, j));
        if (mag > biggest) {
          biggest = mag;
          pc = j;
        }
      }
      if (pc < tb.cols) pivot(tb, r, pc);
    }
  }
  // Exact reduced costs for the phase the solution quality depends on:
  // everything before this point only had to reach feasibility.
  refresh_cost_row(tb, m, cmin);

  {
    LpStatus s = run_simplex(tb, m, false, iter, max_iterations);
    if (s != LpStatus::optimal) {
      res.status = s;
      res.iterations = iter;
      return res;
    }
  }

  res.status = LpStatus::optimal;
  res.iterations = iter;
  res.x.assign(n_struct, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    int b = tb.basis[r];
    if (b >= 0 && static_cast<std::size_t>(b) < n_struct) {
      res.x[b] = tb.at(r, tb.cols);
    }
  }
  KahanSum obj;
  for (std::size_t j = 0; j < n_struct; ++j) obj.add(c[j] * res.x[j]);
  res.objective = obj.value();

  // Shadow prices from the reduced costs of each row's identity column.
  res.row_dual.assign(m, 0.0);
  const double* cost = tb.row(m);
  for (std::size_t r = 0; r < m; ++r) {
    double pi;
    if (rel[r] == Rel::le) {
      pi = -cost[slack_col[r]];
    } else if (rel[r] == Rel::ge) {
      pi = cost[slack_col[r]];
    } else {
      pi = -cost[art_col[r]];
    }
    if (maximize) pi = -pi;
    res.row_dual[r] = sign[r] * pi;
  }
  return res;
}

LPInstance discretize(const ValueDistribution& dist, int n, double eps) {
  if (n < 2) throw std::domain_error("discretize: need at least two cells");
  if (eps < 0.0) throw std::domain_error("discretize: eps must be >= 0");
  LPInstance inst;
  inst.eps = eps;
  inst.v_bar = dist.v_bar();
  inst.values.resize(n);
  inst.masses.resize(n);
  double h = inst.v_bar / n;
  for (int i = 0; i < n; ++i) {
    inst.values[i] = (i + 0.5) * h;
    inst.masses[i] = dist.cdf((i + 1) * h) - dist.cdf(i * h);
  }
  KahanSum total;
  for (double f : inst.masses) {
    if (f < 0.0) throw std::runtime_error("discretize: negative cell mass");
    total.add(f);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw std::runtime_error("discretize: cell masses do not sum to one");
  }
  return inst;
}

double best_grid_posted_price(const LPInstance& inst) {
  double best = 0.0;
  double tail = 0.0;
  for (std::size_t i = inst.values.size(); i-- > 0;) {
    tail += inst.masses[i];
    best = std::max(best, inst.values[i] * tail);
  }
  return best;
}

LPSolution lp_solve(const LPInstance& inst) {
  const std::size_t n = inst.values.size();
  if (n == 0 || inst.masses.size() != n) {
    throw std::invalid_argument("lp_solve: empty or inconsistent instance");
  }
  const std::vector<double>& v = inst.values;
  const double eps = inst.eps;

  // Transposed orientation: one variable per constraint of the seller's
  // problem (participation, ordered-pair truthfulness, allocation cap) and
  // one row per seller variable.  Rows come in two bands: the allocation
  // rows (inequalities) and the transfer rows (equalities carrying the
  // probability masses).  The seller's menu is read back from the shadow
  // prices of these rows.
  auto ir_col = [&](std::size_t i) { return i; };
  auto ic_col = [&](std::size_t i, std::size_t j) {
    return n + i * (n - 1) + (j > i ? j - 1 : j);
  };
  auto ub_col = [&](std::size_t i) { return n + n * (n - 1) + i; };
  const std::size_t n_cols = n + n * (n - 1) + n;

  std::vector<double> cost(n_cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cost[ub_col(i)] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cost[ic_col(i, j)] = eps;
    }
  }

  std::vector<std::vector<double>> rows(2 * n,
                                        std::vector<double>(n_cols, 0.0));
  std::vector<Rel> rels(2 * n);
  std::vector<double> rhs(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double>& ax = rows[i];  // allocation row, as <= 0
    ax[ir_col(i)] = v[i];
    ax[ub_col(i)] = -1.0;
    std::vector<double>& at = rows[n + i];  // transfer row, equality
    at[ir_col(i)] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ax[ic_col(i, j)] = v[i];
      ax[ic_col(j, i)] -= v[j];
      at[ic_col(i, j)] = 1.0;
      at[ic_col(j, i)] -= 1.0;
    }
    rels[i] = Rel::le;
    rels[n + i] = Rel::eq;
    rhs[n + i] = inst.masses[i];
  }

  LpResult lr = simplex_solve(cost, false, rows, rels, rhs, 500000);

  LPSolution sol;
  sol.iterations = lr.iterations;
  if (lr.status == LpStatus::infeasible) {
    sol.status = "infeasible";
    return sol;
  }
  if (lr.status != LpStatus::optimal) {
    sol.status = "numerical-failure";
    return sol;
  }
  sol.value = lr.objective;
  sol.x.resize(n);
  sol.t.resize(n);
  double clamp_drift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double xi = -lr.row_dual[i];
    clamp_drift = std::max({clamp_drift, -xi, xi - 1.0});
    sol.x[i] = std::min(1.0, std::max(0.0, xi));
    sol.t[i] = lr.row_dual[n + i];
  }

  // Independent feasibility re-check of the recovered menu.
  for (std::size_t i = 0; i < n; ++i) {
    double ui = v[i] * sol.x[i] - sol.t[i];
    sol.max_ir_violation = std::max(sol.max_ir_violation, -ui);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double dev = v[i] * sol.x[j] - sol.t[j] - eps;
      sol.max_ic_violation = std::max(sol.max_ic_violation, dev - ui);
    }
  }
  sol.max_ir_violation = std::max(0.0, sol.max_ir_violation);
  sol.max_ic_violation = std::max(0.0, sol.max_ic_violation);
  KahanSum rev;
  for (std::size_t i = 0; i < n; ++i) rev.add(inst.masses[i] * sol.t[i]);
  sol.objective_gap = std::abs(rev.value() - sol.value);

  bool ok = sol.max_ir_violation <= 1e-9 && sol.max_ic_violation <= 1e-9 &&
            clamp_drift <= 1e-9 && sol.objective_gap <= 1e-9;
  sol.status = ok ? "optimal" : "numerical-failure";
  return sol;
}

SandwichReport sandwich_check(const ValueDistribution& dist, double eps,
                              int n) {
  SandwichReport rep;
  rep.eps = eps;
  rep.n = n;
  rep.slack = 2.0 * dist.v_bar() * dist.pdf_sup() / n;
  std::ostringstream msg;

  LPInstance inst = discretize(dist, n, eps);
  LPSolution sol = lp_solve(inst);
  rep.middle = sol.value;
  bool lp_ok = sol.status == "optimal";
  if (!lp_ok) msg << "grid solve status: " << sol.status << "; ";

  PriceOpt opt = dist.optimal_price();
  bool legs_ok = true;
  if (eps == 0.0) {
    // Degenerate chain: both outer legs collapse to the best posted price.
    rep.lower = opt.revenue;
    rep.upper = opt.revenue;
    if (std::abs(rep.middle - opt.revenue) > rep.slack) {
      legs_ok = false;
      msg << "grid optimum strays from the posted-price value; ";
    }
  } else {
    MuChoice mc = choose_mu(dist, eps);
    VerificationReport vr = verify(mc.dm.mech, dist, eps, 1e-8, 2000, 2000);
    if (!vr.passed) {
      legs_ok = false;
      msg << "constructed mechanism failed verification; ";
    }
    rep.lower = delayed_revenue(mc.dm, dist).value_direct;
    rep.upper = optimize_beta(dist, eps).bound;
  }

  rep.lower_ok = rep.lower - rep.slack <= rep.middle + 1e-12;
  rep.upper_ok = rep.middle <= rep.upper + rep.slack + 1e-12;
  if (!rep.lower_ok) msg << "lower leg exceeds grid optimum plus slack; ";
  if (!rep.upper_ok) msg << "grid optimum exceeds certificate plus slack; ";
  rep.passed = rep.lower_ok && rep.upper_ok && lp_ok && legs_ok;
  rep.message = msg.str();
  return rep;
}

}  // namespace epsmech
