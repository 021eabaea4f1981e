#pragma once

#include <vector>

#include "epsmech/distribution.hpp"

namespace epsmech {

// Piecewise-linear inverse reporting path w used to certify an upper bound on
// the eps-IC revenue.  w maps [0, nu0] onto [mu, v_bar], runs at distance
// eps^{1-beta} above the diagonal at p_star, with slope m > 1 above p_star
// and 2 - m < 1 below:
//   w(v) = m (v - p_star) + p_star + eps^{1-beta}        (v >= p_star)
//   w(v) = (2 - m)(v - p_star) + p_star + eps^{1-beta}   (v <= p_star)
//   m = (v_bar - p_star - eps^{1-beta}) / (nu0 - p_star),  nu0 = v_bar - eps^beta
struct DualPath {
  double eps = 0.0;
  double beta = 0.0;
  double p_star = 0.0;
  double v_bar = 0.0;
  double eps_low = 0.0;   // eps^beta: outer margin at the top of the support
  double eps_high = 0.0;  // eps^{1-beta}: distance to the diagonal at p_star
  double m = 0.0;
  double mu = 0.0;   // w(0), bottom of the multiplier's domain
  double nu0 = 0.0;  // w(nu0) = v_bar
  // nu_0 > nu_1 > ... > nu_K defined by nu_{k} = w(nu_{k+1}); the last entry
  // is the first one <= mu.
  std::vector<double> thresholds;
  // p_star, w^{-1}(p_star), ... while they stay above mu (descending); the
  // IC multiplier is non-smooth exactly at these points and the thresholds.
  std::vector<double> p_star_preimages;

  double w(double v) const;
  double w_dot(double v) const;  // m above p_star, 2 - m below
  double w_inv(double y) const;
  int K() const { return static_cast<int>(thresholds.size()) - 1; }
  // k with v in [nu_k, nu_{k-1}) (nu_{-1} = v_bar); requires v >= mu.
  int bracket(double v) const;
};

// Builds the path for the given shape parameter.  Throws domain_error when
// the geometry is invalid: beta outside (0, 1/2), eps^beta >= 0.999 (v_bar -
// p_star) (the top margin would swallow the peak), or m >= 2 (the lower
// branch of w would not be increasing).
DualPath build_path(const ValueDistribution& dist, double eps, double beta);

// IC multiplier in quasi-closed form: on [nu_k, nu_{k-1}),
//   lambda(v) = sum_{j=0}^{k} f(w^j(v)) prod_{i<j} w_dot(w^i(v)),
// which is d/dv of lambda_cumulative.  Throws domain_error below mu.
double lambda_ic(const DualPath& path, const ValueDistribution& dist,
                 double v);

// H_k(v) = sum_{j=0}^{k} F(w^j(v)) with k the bracket of v.
double lambda_cumulative(const DualPath& path, const ValueDistribution& dist,
                         double v);

struct PathCertificate {
  double eps = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double m_slope = 0.0;
  double nu0 = 0.0;
  int K = 0;
  double phi1 = 0.0;   // eps * integral of the IC multiplier
  double phi2 = 0.0;   // integral of the positive part of the virtual slack
  double bound = 0.0;  // phi1 + phi2, a certified cap on eps-IC revenue
  double gain_bound = 0.0;  // bound - r_star
  std::vector<double> thresholds;
};

// Evaluates the certificate by bracket-pinned adaptive quadrature:
//   phi1 = eps int_mu^{v_bar} lambda(v) dv
//   phi2 = int_0^{v_bar} ( v f(v)
//            - w_dot(v) (w(v) - v) lambda(w(v)) 1{v <= nu0} )^+ dv
PathCertificate dual_value(const DualPath& path,
                           const ValueDistribution& dist);

// Independent evaluation of phi1: integrating the multiplier bracket by
// bracket telescopes to eps * [ sum_{k<K} (1 - F(nu_k)) + H_K(nu_{K-1})
// - H_K(mu) ], which needs no quadrature at all.
double phi1_telescope(const DualPath& path, const ValueDistribution& dist);

// Scans 21 evenly spaced beta values in [seed - 0.1, seed + 0.1] clipped to
// (0.02, 0.48), seed = (alpha - 1)/(2 alpha - 1) with alpha from the
// distribution's envelope (2 when absent); returns the smallest bound among
// the geometrically valid ones.  Throws if none is valid.
PathCertificate optimize_beta(const ValueDistribution& dist, double eps);

}  // namespace epsmech
