#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epsmech/numerics.hpp"

namespace epsmech {

// Local power-envelope parameters for the revenue curve around its peak:
//   kappa_lower * |v - p|^alpha <= R(p) - R(v) <= kappa_upper * |v - p|^alpha
// on (p - ell, p + ell), together with the matching derivative-side form.
struct EnvelopeParams {
  double alpha = 0.0;
  double kappa_lower = 0.0;
  double kappa_upper = 0.0;
  double ell = 0.0;
};

struct PriceOpt {
  double price = 0.0;
  double revenue = 0.0;
};

// Buyer value distribution on [0, v_bar] with density.  Constructed through
// the factory functions below; carries closed-form cdf/pdf plus cached
// derived quantities (monopoly price, revenue peak, density sup).
class ValueDistribution {
 public:
  double cdf(double v) const;
  double pdf(double v) const;
  double surv(double v) const { return 1.0 - cdf(v); }

  // R(v) = v * (1 - F(v)) and its analytic derivative R'(v) = F_bar(v) - v f(v).
  double revenue_curve(double v) const { return v * surv(v); }
  double revenue_deriv(double v) const { return surv(v) - v * pdf(v); }

  // psi(v) = v - F_bar(v) / f(v); throws std::domain_error where f vanishes.
  double virtual_value(double v) const;

  // Smallest global maximizer of R with its value, cached after first call.
  PriceOpt optimal_price() const;

  double v_bar() const { return v_bar_; }
  const std::string& kind() const { return kind_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<double>& breakpoints() const { return kinks_; }
  const std::optional<EnvelopeParams>& envelope() const { return envelope_; }
  const std::vector<double>& tab_values() const { return tab_v_; }
  const std::vector<double>& tab_cdf() const { return tab_c_; }

  // Grid sup of the density (10^4 cells plus breakpoints), cached.
  double pdf_sup() const;

 private:
  friend ValueDistribution make_uniform(double v_bar);
  friend ValueDistribution make_exponential_truncated(double rate,
                                                      double v_bar);
  friend ValueDistribution make_envelope_dist(double alpha, double p_star,
                                              double r_star, double v_bar);
  friend ValueDistribution make_tabulated(const std::vector<double>& values,
                                          const std::vector<double>& cdf);

  std::string kind_;
  double v_bar_ = 0.0;
  Fn cdf_fn_;
  Fn pdf_fn_;
  std::vector<double> kinks_;
  std::optional<EnvelopeParams> envelope_;
  std::map<std::string, double> params_;
  std::vector<double> tab_v_, tab_c_;

  mutable std::optional<PriceOpt> opt_cache_;
  mutable std::optional<double> pdf_sup_cache_;
};

ValueDistribution make_uniform(double v_bar);
ValueDistribution make_exponential_truncated(double rate, double v_bar);

// Distribution engineered so that R(v) = r_star - kappa |v - p_star|^alpha
// near p_star, extended by straight revenue segments so R(0) = R(v_bar) = 0
// and the cdf stays atom-free.  kappa and the junction points are derived;
// throws std::runtime_error when the requested (alpha, p_star, r_star, v_bar)
// cannot yield a monotone atom-free cdf.
ValueDistribution make_envelope_dist(double alpha, double p_star,
                                     double r_star, double v_bar);

// User-supplied piecewise-linear cdf through (values[i], cdf[i]); density is
// piecewise constant.  Requires values[0] = 0, cdf front/back = 0/1.
ValueDistribution make_tabulated(const std::vector<double>& values,
                                 const std::vector<double>& cdf);

enum class EnvelopeForm { value, derivative };

struct EnvelopeReport {
  bool passed = false;
  double worst_lower_margin = 0.0;  // min over grid of (side - bound), >= 0 ok
  double worst_upper_margin = 0.0;
};

// Checks the two-sided power envelope on a uniform grid over
// (p_star - ell, p_star + ell); both margins must stay above -1e-9 (scaled).
EnvelopeReport envelope_check(const ValueDistribution& dist, double alpha,
                              double kappa_lower, double kappa_upper,
                              double ell, EnvelopeForm form,
                              int grid_n = 1000);

struct DistValidation {
  bool passed = false;
  double cdf_at_zero = 0.0;
  double cdf_at_vbar = 0.0;
  double pdf_mass = 0.0;
  double min_pdf = 0.0;
  double max_cdf_decrease = 0.0;
  std::string message;
};

// Grid sanity: cdf pinned at 0/1, nondecreasing, pdf >= 0 integrating to 1.
DistValidation validate_distribution(const ValueDistribution& dist,
                                     int grid_n = 4000);

}  // namespace epsmech
