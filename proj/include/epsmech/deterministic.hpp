#pragma once

#include "epsmech/distribution.hpp"
#include "epsmech/mechanism.hpp"

namespace epsmech {

// Hard floor at `hard` (allocation threshold) with soft cap `soft`: buyers in
// [hard, soft) pay their report, buyers above pay soft.
struct HardSoftFloor {
  double hard = 0.0;
  double soft = 0.0;
  Mechanism mech;
};

HardSoftFloor build_hard_soft(double hard, double soft, double v_bar);

// Revenue of the hard/soft pair (r, r + eps):
//   r F_bar(r) + integral_r^{min(r+eps, v_bar)} F_bar(v) dv.
double det_revenue(const ValueDistribution& dist, double r, double eps,
                   double tol = 1e-12);

struct DetOpt {
  double r = 0.0;      // optimal hard floor
  double value = 0.0;  // revenue at the optimum
  double gain = 0.0;   // value - r_star
};

// Best hard/soft floor for the given eps; gain measured against the cached
// exact-IC optimum of the distribution.
DetOpt optimal_det(const ValueDistribution& dist, double eps);

}  // namespace epsmech
