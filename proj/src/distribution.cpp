#include "epsmech/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epsmech {

namespace {

constexpr double kPdfFloor = 1e-12;

}  // namespace

double ValueDistribution::cdf(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= v_bar_) return 1.0;
  return cdf_fn_(v);
}

double ValueDistribution::pdf(double v) const {
  if (v < 0.0 || v > v_bar_) return 0.0;
  return pdf_fn_(v);
}

double ValueDistribution::virtual_value(double v) const {
  if (v < 0.0 || v > v_bar_) {
    throw std::domain_error("virtual_value: v outside [0, v_bar]");
  }
  double f = pdf(v);
  if (f <= kPdfFloor) {
    throw std::domain_error("virtual_value: density vanishes at v");
  }
  return v - surv(v) / f;
}

PriceOpt ValueDistribution::optimal_price() const {
  if (opt_cache_) return *opt_cache_;

  const int n = 4096;
  std::vector<double> grid = linspace(0.0, v_bar_, n + 1);
  for (double k : kinks_) {
    if (k > 0.0 && k < v_bar_) grid.push_back(k);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> rv(grid.size());
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rv[i] = revenue_curve(grid[i]);
    best = std::max(best, rv[i]);
  }

  // Refine every near-optimal grid cell, then keep the smallest maximizer.
  double sel_tol = 1e-7 * (1.0 + std::abs(best));
  PriceOpt out{v_bar_, -1.0};
  double tie_tol = 1e-11 * (1.0 + std::abs(best));
  auto consider = [&](double p) {
    double r = revenue_curve(p);
    if (r > out.revenue + tie_tol ||
        (r > out.revenue - tie_tol && p < out.price)) {
      out = {p, std::max(r, out.revenue)};
    }
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (rv[i] < best - sel_tol) continue;
    double lo = grid[i > 0 ? i - 1 : 0];
    double hi = grid[std::min(i + 1, grid.size() - 1)];
    consider(grid[i]);
    if (hi <= lo) continue;
    // Grid cells are delimited by kinks, so each cell is smooth: an interior
    // max forces a derivative sign change.  Locate it to machine precision
    // (value-based search cannot do better than sqrt(ulp) in the argument).
    auto deriv = [this](double v) { return revenue_deriv(v); };
    double dlo = revenue_deriv(lo), dmid = revenue_deriv(0.5 * (lo + hi)),
           dhi = revenue_deriv(hi);
    if ((dlo > 0.0) != (dmid > 0.0) || dlo == 0.0 || dmid == 0.0) {
      consider(bisect(deriv, lo, 0.5 * (lo + hi), 1e-15 * v_bar_));
    }
    if ((dmid > 0.0) != (dhi > 0.0) || dhi == 0.0) {
      consider(bisect(deriv, 0.5 * (lo + hi), hi, 1e-15 * v_bar_));
    }
    // otherwise the cell is monotone and its edges are already candidates
  }
  out.revenue = revenue_curve(out.price);
  opt_cache_ = out;
  return out;
}

double ValueDistribution::pdf_sup() const {
  if (pdf_sup_cache_) return *pdf_sup_cache_;
  std::vector<double> grid = linspace(0.0, v_bar_, 10001);
  for (double k : kinks_) {
    if (k > 0.0 && k < v_bar_) {
      grid.push_back(k);
      grid.push_back(std::nextafter(k, 0.0));
      grid.push_back(std::nextafter(k, v_bar_));
    }
  }
  double sup = 0.0;
  for (double v : grid) sup = std::max(sup, pdf(v));
  pdf_sup_cache_ = sup;
  return sup;
}

ValueDistribution make_uniform(double v_bar) {
  if (v_bar <= 0.0) throw std::runtime_error("make_uniform: v_bar must be > 0");
  ValueDistribution d;
  d.kind_ = "uniform";
  d.v_bar_ = v_bar;
  d.cdf_fn_ = [v_bar](double v) { return v / v_bar; };
  d.pdf_fn_ = [v_bar](double) { return 1.0 / v_bar; };
  d.params_["v_bar"] = v_bar;
  // R(v) = v - v^2 / v_bar is exactly quadratic around p* = v_bar / 2.
  EnvelopeParams env;
  env.alpha = 2.0;
  env.kappa_lower = env.kappa_upper = 1.0 / v_bar;
  env.ell = 0.4 * v_bar;
  d.envelope_ = env;
  return d;
}

ValueDistribution make_exponential_truncated(double rate, double v_bar) {
  if (rate <= 0.0 || v_bar <= 0.0) {
    throw std::runtime_error("make_exponential_truncated: rate, v_bar > 0");
  }
  double z = -std::expm1(-rate * v_bar);  // 1 - e^{-rate v_bar}
  ValueDistribution d;
  d.kind_ = "exponential-truncated";
  d.v_bar_ = v_bar;
  d.cdf_fn_ = [rate, z](double v) { return -std::expm1(-rate * v) / z; };
  d.pdf_fn_ = [rate, z](double v) { return rate * std::exp(-rate * v) / z; };
  d.params_["rate"] = rate;
  d.params_["v_bar"] = v_bar;
  return d;
}

ValueDistribution make_envelope_dist(double alpha, double p_star,
                                     double r_star, double v_bar) {
  if (!(alpha > 1.0)) {
    throw std::runtime_error("make_envelope_dist: alpha must be > 1");
  }
  if (!(0.0 < r_star && r_star < p_star && p_star < v_bar)) {
    throw std::runtime_error(
        "make_envelope_dist: need 0 < r_star < p_star < v_bar");
  }

  // Left junction a: revenue follows the slope-1 segment R(v) = v on [0, a]
  // (slope exactly 1 keeps the cdf atom-free at 0), then the power arc.  The
  // tangent junction exists iff r_star >= p_star / alpha; otherwise join with
  // a kink, which only makes the density jump.
  double a = (alpha * r_star - p_star) / (alpha - 1.0);
  if (a < 0.0) a = 0.5 * r_star;
  double kappa = (r_star - a) / std::pow(p_star - a, alpha);
  double join_slope = alpha * kappa * std::pow(p_star - a, alpha - 1.0);
  if (join_slope > 1.0 + 1e-9) {
    throw std::runtime_error(
        "make_envelope_dist: nonmonotone cdf on [" + std::to_string(a) + ", " +
        std::to_string(p_star) + "] (arc slope exceeds entry segment)");
  }

  // Right junction b (measured from p_star): tangent line down to (v_bar, 0)
  // when the arc reaches zero inside the support, else a steeper kinked line.
  double endv = v_bar - p_star;
  double arc_at_end = r_star - kappa * std::pow(endv, alpha);
  double b;
  if (std::abs(arc_at_end) < 1e-12 * r_star) {
    b = endv;  // arc lands exactly on (v_bar, 0)
  } else if (arc_at_end < 0.0) {
    double l0 = std::pow(r_star / kappa, 1.0 / alpha);  // arc zero crossing
    auto h = [&](double l) {
      return alpha * kappa * std::pow(l, alpha - 1.0) * (endv - l) -
             (r_star - kappa * std::pow(l, alpha));
    };
    b = bisect(h, 1e-12 * v_bar, std::min(l0, endv), 1e-14 * v_bar);
  } else {
    b = 0.75 * endv;
  }
  double right_v = p_star + b;
  double arc_at_b = r_star - kappa * std::pow(b, alpha);
  double right_slope = (right_v < v_bar) ? arc_at_b / (v_bar - right_v) : 0.0;

  auto rev = [=](double v) {
    if (v <= a) return v;
    if (v < right_v) return r_star - kappa * std::pow(std::abs(v - p_star), alpha);
    return right_slope * (v_bar - v);
  };
  auto rev_d = [=](double v) {
    if (v <= a) return 1.0;
    if (v < right_v) {
      double d = v - p_star;
      double mag = alpha * kappa * std::pow(std::abs(d), alpha - 1.0);
      return d <= 0.0 ? mag : -mag;
    }
    return -right_slope;
  };

  ValueDistribution d;
  d.kind_ = "envelope-designed";
  d.v_bar_ = v_bar;
  d.cdf_fn_ = [=](double v) { return 1.0 - rev(v) / v; };
  d.pdf_fn_ = [=](double v) {
    if (v <= 0.0) {
      if (a > 0.0) return 0.0;
      // a == 0 limit: f(0+) = -R''(0)/2 on the arc
      return 0.5 * alpha * (alpha - 1.0) * kappa * std::pow(p_star, alpha - 2.0);
    }
    return (rev(v) - v * rev_d(v)) / (v * v);
  };
  if (a > 0.0) d.kinks_.push_back(a);
  d.kinks_.push_back(p_star);
  if (right_v < v_bar) d.kinks_.push_back(right_v);
  d.params_["alpha"] = alpha;
  d.params_["p_star"] = p_star;
  d.params_["r_star"] = r_star;
  d.params_["v_bar"] = v_bar;
  d.params_["kappa"] = kappa;
  d.params_["a_left"] = a;
  d.params_["b_right"] = b;

  EnvelopeParams env;
  env.alpha = alpha;
  env.kappa_lower = env.kappa_upper = kappa;
  env.ell = std::min({p_star - a, b, 0.999 * p_star, 0.999 * (v_bar - p_star)});
  env.ell *= (1.0 - 1e-9);
  d.envelope_ = env;

  DistValidation val = validate_distribution(d);
  if (!val.passed) {
    throw std::runtime_error("make_envelope_dist: " + val.message);
  }
  return d;
}

ValueDistribution make_tabulated(const std::vector<double>& values,
                                 const std::vector<double>& cdf) {
  if (values.size() != cdf.size() || values.size() < 2) {
    throw std::runtime_error("make_tabulated: need >= 2 paired nodes");
  }
  if (values.front() != 0.0 || std::abs(cdf.front()) > 1e-12 ||
      std::abs(cdf.back() - 1.0) > 1e-12) {
    throw std::runtime_error("make_tabulated: endpoints must pin F(0)=0, F(v_bar)=1");
  }
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] <= values[i]) {
      throw std::runtime_error("make_tabulated: values must be increasing");
    }
    if (cdf[i + 1] < cdf[i]) {
      throw std::runtime_error("make_tabulated: cdf must be nondecreasing");
    }
  }
  ValueDistribution d;
  d.kind_ = "user-supplied";
  d.v_bar_ = values.back();
  d.tab_v_ = values;
  d.tab_c_ = cdf;
  std::vector<double> v = values, c = cdf;
  d.cdf_fn_ = [v, c](double x) {
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t i = static_cast<std::size_t>(it - v.begin());
    if (i == 0) return c.front();
    if (i == v.size()) return c.back();
    double w = (x - v[i - 1]) / (v[i] - v[i - 1]);
    return c[i - 1] + w * (c[i] - c[i - 1]);
  };
  d.pdf_fn_ = [v, c](double x) {
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t i = static_cast<std::size_t>(it - v.begin());
    if (i == 0) i = 1;
    if (i == v.size()) i = v.size() - 1;
    return (c[i] - c[i - 1]) / (v[i] - v[i - 1]);
  };
  d.kinks_.assign(values.begin() + 1, values.end() - 1);
  return d;
}

EnvelopeReport envelope_check(const ValueDistribution& dist, double alpha,
                              double kappa_lower, double kappa_upper,
                              double ell, EnvelopeForm form, int grid_n) {
  PriceOpt opt = dist.optimal_price();
  double p = opt.price, r = opt.revenue;
  if (!(ell > 0.0) || p - ell <= 0.0 || p + ell >= dist.v_bar()) {
    throw std::domain_error("envelope_check: (p-ell, p+ell) must sit inside (0, v_bar)");
  }
  EnvelopeReport rep;
  rep.worst_lower_margin = rep.worst_upper_margin = 1e300;
  std::vector<double> grid = linspace(p - ell, p + ell, grid_n);
  for (double v : grid) {
    double d = std::abs(v - p);
    double lhs, lo_bound, up_bound;
    if (form == EnvelopeForm::value) {
      lhs = r - dist.revenue_curve(v);
      lo_bound = kappa_lower * std::pow(d, alpha);
      up_bound = kappa_upper * std::pow(d, alpha);
    } else {
      lhs = (p - v) * dist.revenue_deriv(v);
      lo_bound = kappa_lower * alpha * std::pow(d, alpha);
      up_bound = kappa_upper * alpha * std::pow(d, alpha);
    }
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, lhs - lo_bound);
    rep.worst_upper_margin = std::min(rep.worst_upper_margin, up_bound - lhs);
  }
  double tol = 1e-9 * (1.0 + r);
  rep.passed = rep.worst_lower_margin >= -tol && rep.worst_upper_margin >= -tol;
  return rep;
}

DistValidation validate_distribution(const ValueDistribution& dist,
                                     int grid_n) {
  DistValidation out;
  out.cdf_at_zero = dist.cdf(0.0);
  out.cdf_at_vbar = dist.cdf(dist.v_bar());
  out.min_pdf = 1e300;
  out.max_cdf_decrease = 0.0;
  std::vector<double> grid = linspace(0.0, dist.v_bar(), grid_n + 1);
  double prev = dist.cdf(grid[0]);
  for (double v : grid) {
    double c = dist.cdf(v);
    out.max_cdf_decrease = std::max(out.max_cdf_decrease, prev - c);
    prev = c;
    out.min_pdf = std::min(out.min_pdf, dist.pdf(v));
  }
  out.pdf_mass = integrate_piecewise([&](double v) { return dist.pdf(v); },
                                     0.0, dist.v_bar(), dist.breakpoints(),
                                     1e-9);
  bool ok = std::abs(out.cdf_at_zero) <= 1e-9 &&
            std::abs(out.cdf_at_vbar - 1.0) <= 1e-9 &&
            std::abs(out.pdf_mass - 1.0) <= 1e-6 && out.min_pdf >= -1e-12 &&
            out.max_cdf_decrease <= 1e-12;
  out.passed = ok;
  if (!ok) {
    out.message = "distribution sanity failed: cdf(0)=" +
                  std::to_string(out.cdf_at_zero) +
                  " cdf(v_bar)=" + std::to_string(out.cdf_at_vbar) +
                  " mass=" + std::to_string(out.pdf_mass) +
                  " min_pdf=" + std::to_string(out.min_pdf) +
                  " max_cdf_decrease=" + std::to_string(out.max_cdf_decrease);
  }
  return out;
}

}  // namespace epsmech
