#pragma once

#include <map>
#include <string>
#include <vector>

#include "epsmech/distribution.hpp"
#include "epsmech/numerics.hpp"

namespace epsmech {

// One piecewise-analytic piece of a direct mechanism on [lo, hi).
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  Fn alloc;
  Fn transfer;
};

// Direct mechanism (x, t) on [0, v_bar] as ordered closed-form segments.
// Segments are half-open [lo, hi); the last one also owns its right endpoint.
struct Mechanism {
  std::string kind;  // posted-price | hard-soft-floor | perturbed-delayed |
                     // lp-discrete | custom
  double v_bar = 0.0;
  std::vector<Segment> segments;
  std::map<std::string, double> params;
  // dense samples for grid-backed kinds (lp-discrete / custom)
  std::vector<double> grid_v, grid_x, grid_t;

  double alloc(double v) const;
  double transfer(double v) const;
  double utility(double value, double report) const {
    return value * alloc(report) - transfer(report);
  }
  std::vector<double> breakpoints() const;
};

Mechanism make_posted_price(double price, double v_bar);

// Step mechanism through the given samples (piecewise-constant,
// right-continuous); used for lp-discrete and custom deserialized grids.
Mechanism make_step_mechanism(const std::string& kind,
                              const std::vector<double>& v,
                              const std::vector<double>& x,
                              const std::vector<double>& t, double v_bar);

struct BestResponse {
  double report = 0.0;
  double utility = 0.0;
};

// Maximizes value * x(w) - t(w) over a dense report grid plus all segment
// endpoints (and their one-ulp neighbors, so open-ended suprema are seen).
// Ties resolve to the smallest report.
BestResponse best_response(const Mechanism& mech, double value,
                           int grid_n = 10000);

struct VerificationReport {
  bool passed = false;
  double min_ir_slack = 0.0;
  double min_ic_slack = 0.0;
  double worst_value = 0.0;
  double worst_report = 0.0;
};

// Grid check of individual rationality and eps-incentive compatibility:
//   IR slack:  v x(v) - t(v)
//   IC slack:  [v x(v) - t(v)] - [max_w (v x(w) - t(w)) - eps]
// Deterministic: fixed grids, fixed reduction order.
VerificationReport verify(const Mechanism& mech, const ValueDistribution& dist,
                          double eps, double tol = 1e-8,
                          int value_grid_n = 10000, int report_grid_n = 10000);

// E[t(v)] by piecewise adaptive quadrature against the value density.
double expected_revenue(const Mechanism& mech, const ValueDistribution& dist,
                        double tol = 1e-9);

struct MonotonicityReport {
  double worst = 0.0;  // min over grid pairs of (v-v')(x(v)-x(v')) + 2 eps
  double worst_v = 0.0;
  double worst_v_prime = 0.0;
};

// Necessary condition for eps-IC: allocations cannot decrease by more than
// 2 eps relative to the value gap.  Negative `worst` flags infeasibility.
MonotonicityReport approximate_monotonicity_check(const Mechanism& mech,
                                                  double eps,
                                                  int grid_n = 500);

// Best-response map v -> v*(v) with its inverse-threshold companion w.
struct ReportingMap {
  Fn forward;
  Fn inverse;
  std::vector<double> breakpoints;
};

// Max residual of the utility envelope identity
//   u(v) = u(0) + integral_0^v x(v*(s)) ds
// with u from grid best responses and the integral by cumulative trapezoid.
double envelope_utility_check(const Mechanism& mech, const ReportingMap& map,
                              int grid_n = 10000);

// Upper bound on the eps-IC revenue gain over the exact-IC optimum r_star:
// 2 sqrt(eps) r_star + sqrt(eps).  Requires 0 <= eps <= 1/4.
double nisan_bound(double eps, double r_star);

}  // namespace epsmech
