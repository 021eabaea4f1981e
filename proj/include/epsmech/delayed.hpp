#pragma once

#include "epsmech/distribution.hpp"
#include "epsmech/mechanism.hpp"

namespace epsmech {

// Geometry of the randomized mechanism that perturbs the posted price p_star
// by a window [p_star - delta, p_star + delta] and shades reports by mu.
struct DelayedParams {
  double eps = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  double p_star = 0.0;
  double v_bar = 0.0;
  double z = 0.0;  // 2 delta / mu, the scaled window width
};

struct DeltaSolve {
  double delta = 0.0;
  double z = 0.0;
  double residual = 0.0;  // | Gamma(z) - (mu/(e eps)) e^{-z} | at the root
  int iterations = 0;
};

// Solves Gamma(2 delta / mu) = (mu / (e eps)) e^{-2 delta / mu} for delta.
// Requires mu > e * eps (otherwise no positive root exists; domain_error).
// The returned delta always lies in [max(0, mu^2/(4 eps) - mu), mu^2/(4 eps)].
DeltaSolve solve_delta(double eps, double mu);

// Closed-form allocation of the delayed mechanism:
//   eps / (p_star - delta - v)                         on [0, p_star-delta-mu]
//   (eps/mu) e^{t+1} Gamma(t), t = (v-p_star+delta)/mu on (.., p_star+delta)
//   1                                                  on [p_star+delta, v_bar]
double delayed_alloc(const DelayedParams& p, double v);

struct DelayedMechanism {
  DelayedParams params;
  Mechanism mech;
  ReportingMap map;  // best-response family v*(v) and its inverse w
};

// Builds the full mechanism (allocation, transfers, reporting map) for the
// given shading width mu.  Throws domain_error when the perturbation window
// [p_star - delta - mu, p_star + delta + mu] escapes (0, v_bar).
DelayedMechanism build_delayed(const ValueDistribution& dist, double eps,
                               double mu);

// Rebuild from serialized parameters (no distribution needed).
DelayedMechanism build_delayed_from_params(const DelayedParams& p);

struct DdeReport {
  double max_deviation = 0.0;
  double max_deviation_v = 0.0;
};

// Independent check of the closed form: integrates the defining delay
// equation x'(v) = (x(v) - x(v*(v))) / (w(v) - v) forward with a 4th-order
// one-step method (method of steps, cubic-Hermite history) and reports the
// max deviation from delayed_alloc on [0, p_star + delta].
DdeReport dde_oracle(const DelayedParams& p, int steps_per_interval = 400);

struct DelayedRevenue {
  double value_direct = 0.0;   // E[t(v)] by quadrature of the transfers
  double value_formula = 0.0;  // delayed-virtual-value decomposition
};

// Expected revenue two ways; the decomposition route is
//   int_0^{p*+delta} x(v) (v f(v) - F_bar(v+mu) wdot(v)) dv
//   + R(p*+delta) + int_{p*+delta}^{p*+delta+mu} F_bar(v) dv.
DelayedRevenue delayed_revenue(const DelayedMechanism& dm,
                               const ValueDistribution& dist);

struct MuChoice {
  double K = 0.0;
  double mu = 0.0;
  double gain = 0.0;  // measured revenue - r_star
  DelayedMechanism dm;
};

// Scans K in {1, 1/2, 1/4, ...} for mu = K eps^{alpha/(2 alpha - 1)} (alpha
// from the distribution's envelope) and returns the largest K that is
// admissible: mu > e eps, the window stays inside the support, the
// strict-positivity margin F_bar(p*+delta+mu) K > kappa_U ((K^2/4)^alpha +
// (K^2/2)^alpha) holds, and the measured gain is positive.
MuChoice choose_mu(const ValueDistribution& dist, double eps);

}  // namespace epsmech
