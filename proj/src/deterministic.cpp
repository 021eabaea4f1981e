#include "epsmech/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epsmech {

HardSoftFloor build_hard_soft(double hard, double soft, double v_bar) {
  if (!(0.0 <= hard && hard <= soft && soft <= v_bar)) {
    throw std::domain_error("build_hard_soft: need 0 <= hard <= soft <= v_bar");
  }
  HardSoftFloor out;
  out.hard = hard;
  out.soft = soft;
  out.mech.kind = "hard-soft-floor";
  out.mech.v_bar = v_bar;
  out.mech.params["hard"] = hard;
  out.mech.params["soft"] = soft;
  auto zero = [](double) { return 0.0; };
  auto one = [](double) { return 1.0; };
  auto id = [](double v) { return v; };
  auto cap = [soft](double) { return soft; };
  if (hard > 0.0) out.mech.segments.push_back({0.0, hard, zero, zero});
  if (soft > hard) out.mech.segments.push_back({hard, soft, one, id});
  out.mech.segments.push_back({soft, v_bar, one, cap});
  return out;
}

double det_revenue(const ValueDistribution& dist, double r, double eps,
                   double tol) {
  if (r < 0.0 || r > dist.v_bar()) {
    throw std::domain_error("det_revenue: r outside [0, v_bar]");
  }
  if (eps < 0.0) throw std::domain_error("det_revenue: eps must be >= 0");
  double hi = std::min(r + eps, dist.v_bar());
  double tail = integrate_piecewise([&](double v) { return dist.surv(v); }, r,
                                    hi, dist.breakpoints(), tol);
  return r * dist.surv(r) + tail;
}

DetOpt optimal_det(const ValueDistribution& dist, double eps) {
  if (eps < 0.0) throw std::domain_error("optimal_det: eps must be >= 0");
  double v_bar = dist.v_bar();
  auto value_at = [&](double r) { return det_revenue(dist, r, eps); };
  // d/dr of det_revenue while r + eps stays inside the support
  auto deriv = [&](double r) {
    return dist.surv(std::min(r + eps, v_bar)) - r * dist.pdf(r);
  };

  const int n = 4096;
  std::vector<double> grid = linspace(0.0, v_bar, n + 1);
  for (double k : dist.breakpoints()) {
    grid.push_back(k);
    // the objective's derivative also kinks where r + eps crosses a breakpoint
    if (k - eps > 0.0) grid.push_back(k - eps);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> val(grid.size());
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    val[i] = value_at(grid[i]);
    best = std::max(best, val[i]);
  }
  double sel_tol = 1e-7 * (1.0 + best);
  DetOpt out;
  out.value = -1.0;
  auto consider = [&](double r) {
    double g = value_at(r);
    if (g > out.value) out = {r, g, 0.0};
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (val[i] < best - sel_tol) continue;
    consider(grid[i]);
    double lo = grid[i > 0 ? i - 1 : 0];
    double hi = grid[std::min(i + 1, grid.size() - 1)];
    if (hi <= lo) continue;
    // cells are smooth between (possibly shifted) kinks, so interior maxima
    // force a derivative sign change; edges are already grid candidates
    double dlo = deriv(lo), dmid = deriv(0.5 * (lo + hi)), dhi = deriv(hi);
    if ((dlo > 0.0) != (dmid > 0.0) || dlo == 0.0 || dmid == 0.0) {
      consider(bisect(deriv, lo, 0.5 * (lo + hi), 1e-15 * v_bar));
    }
    if ((dmid > 0.0) != (dhi > 0.0) || dhi == 0.0) {
      consider(bisect(deriv, 0.5 * (lo + hi), hi, 1e-15 * v_bar));
    }
  }
  out.gain = out.value - dist.optimal_price().revenue;
  return out;
}

}  // namespace epsmech
