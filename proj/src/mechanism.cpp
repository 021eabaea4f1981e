#include "epsmech/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epsmech {

namespace {

const Segment& locate(const std::vector<Segment>& segments, double v) {
  if (segments.empty()) throw std::runtime_error("mechanism has no segments");
  // first segment whose hi exceeds v; the last segment is right-closed
  for (const Segment& s : segments) {
    if (v < s.hi) return s;
  }
  return segments.back();
}

std::vector<double> report_candidates(const Mechanism& mech, int grid_n) {
  std::vector<double> w = linspace(0.0, mech.v_bar, grid_n);
  for (double b : mech.breakpoints()) {
    if (b < 0.0 || b > mech.v_bar) continue;
    w.push_back(b);
    double lo = std::nextafter(b, -1.0);
    double hi = std::nextafter(b, mech.v_bar + 1.0);
    if (lo >= 0.0) w.push_back(lo);
    if (hi <= mech.v_bar) w.push_back(hi);
  }
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  return w;
}

}  // namespace

double Mechanism::alloc(double v) const {
  if (v < 0.0 || v > v_bar * (1.0 + 1e-12)) {
    throw std::domain_error("alloc: report outside [0, v_bar]");
  }
  return locate(segments, v).alloc(v);
}

double Mechanism::transfer(double v) const {
  if (v < 0.0 || v > v_bar * (1.0 + 1e-12)) {
    throw std::domain_error("transfer: report outside [0, v_bar]");
  }
  return locate(segments, v).transfer(v);
}

std::vector<double> Mechanism::breakpoints() const {
  std::vector<double> out;
  for (const Segment& s : segments) {
    out.push_back(s.lo);
    out.push_back(s.hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mechanism make_posted_price(double price, double v_bar) {
  if (price < 0.0 || price > v_bar) {
    throw std::domain_error("make_posted_price: price outside [0, v_bar]");
  }
  Mechanism m;
  m.kind = "posted-price";
  m.v_bar = v_bar;
  m.params["price"] = price;
  auto zero = [](double) { return 0.0; };
  auto one = [](double) { return 1.0; };
  auto pay = [price](double) { return price; };
  if (price > 0.0) m.segments.push_back({0.0, price, zero, zero});
  m.segments.push_back({price, v_bar, one, pay});
  return m;
}

Mechanism make_step_mechanism(const std::string& kind,
                              const std::vector<double>& v,
                              const std::vector<double>& x,
                              const std::vector<double>& t, double v_bar) {
  if (v.empty() || v.size() != x.size() || v.size() != t.size()) {
    throw std::invalid_argument("make_step_mechanism: ragged sample arrays");
  }
  Mechanism m;
  m.kind = kind;
  m.v_bar = v_bar;
  m.grid_v = v;
  m.grid_x = x;
  m.grid_t = t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double lo = (i == 0) ? 0.0 : v[i];
    double hi = (i + 1 < v.size()) ? v[i + 1] : v_bar;
    double xi = x[i], ti = t[i];
    m.segments.push_back({lo, hi, [xi](double) { return xi; },
                          [ti](double) { return ti; }});
  }
  m.segments.back().hi = v_bar;
  return m;
}

BestResponse best_response(const Mechanism& mech, double value, int grid_n) {
  std::vector<double> reports = report_candidates(mech, grid_n);
  BestResponse best{0.0, -1e300};
  for (double w : reports) {
    double u = value * mech.alloc(w) - mech.transfer(w);
    if (u > best.utility) best = {w, u};
  }
  return best;
}

VerificationReport verify(const Mechanism& mech, const ValueDistribution& dist,
                          double eps, double tol, int value_grid_n,
                          int report_grid_n) {
  if (eps < 0.0) throw std::domain_error("verify: eps must be >= 0");
  std::vector<double> reports = report_candidates(mech, report_grid_n);
  std::vector<double> rx(reports.size()), rt(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    rx[i] = mech.alloc(reports[i]);
    rt[i] = mech.transfer(reports[i]);
  }
  std::vector<double> values = linspace(0.0, dist.v_bar(), value_grid_n);
  for (double b : mech.breakpoints()) {
    if (b >= 0.0 && b <= dist.v_bar()) values.push_back(b);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  VerificationReport rep;
  rep.min_ir_slack = rep.min_ic_slack = 1e300;
  double worst_combined = 1e300;
  for (double v : values) {
    double truthful = v * mech.alloc(v) - mech.transfer(v);
    double u = -1e300;
    double u_report = 0.0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      double g = v * rx[i] - rt[i];
      if (g > u) {
        u = g;
        u_report = reports[i];
      }
    }
    double ir = truthful;
    double ic = truthful - (u - eps);
    rep.min_ir_slack = std::min(rep.min_ir_slack, ir);
    rep.min_ic_slack = std::min(rep.min_ic_slack, ic);
    double combined = std::min(ir, ic);
    if (combined < worst_combined) {
      worst_combined = combined;
      rep.worst_value = v;
      rep.worst_report = u_report;
    }
  }
  rep.passed = rep.min_ir_slack >= -tol && rep.min_ic_slack >= -tol;
  return rep;
}

double expected_revenue(const Mechanism& mech, const ValueDistribution& dist,
                        double tol) {
  std::vector<double> cuts = mech.breakpoints();
  for (double b : dist.breakpoints()) cuts.push_back(b);
  return integrate_piecewise(
      [&](double v) { return mech.transfer(v) * dist.pdf(v); }, 0.0,
      dist.v_bar(), cuts, tol);
}

MonotonicityReport approximate_monotonicity_check(const Mechanism& mech,
                                                  double eps, int grid_n) {
  std::vector<double> v = linspace(0.0, mech.v_bar, grid_n);
  std::vector<double> x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = mech.alloc(v[i]);
  MonotonicityReport rep;
  rep.worst = 1e300;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      double q = (v[j] - v[i]) * (x[j] - x[i]) + 2.0 * eps;
      if (q < rep.worst) {
        rep.worst = q;
        rep.worst_v = v[j];
        rep.worst_v_prime = v[i];
      }
    }
  }
  return rep;
}

double envelope_utility_check(const Mechanism& mech, const ReportingMap& map,
                              int grid_n) {
  std::vector<double> values = linspace(0.0, mech.v_bar, grid_n);
  for (double b : map.breakpoints) {
    if (b > 0.0 && b < mech.v_bar) values.push_back(b);
  }
  for (double b : mech.breakpoints()) {
    if (b > 0.0 && b < mech.v_bar) values.push_back(b);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> reports = report_candidates(mech, grid_n);
  std::vector<double> rx(reports.size()), rt(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    rx[i] = mech.alloc(reports[i]);
    rt[i] = mech.transfer(reports[i]);
  }
  auto u_of = [&](double v) {
    double u = -1e300;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      u = std::max(u, v * rx[i] - rt[i]);
    }
    return u;
  };

  double u0 = u_of(0.0);
  double residual = std::abs(u_of(values[0]) - u0);
  double integral = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    double lo = values[i - 1], hi = values[i];
    // One-sided limits: the integrand may jump exactly at a node, so nudge
    // the endpoint samples into the open cell to keep trapezoid at O(h^2).
    double eta = std::min(1e-12 * mech.v_bar, 0.125 * (hi - lo));
    double g_lo = mech.alloc(map.forward(lo + eta));
    double g_hi = mech.alloc(map.forward(hi - eta));
    integral += 0.5 * (g_lo + g_hi) * (hi - lo);
    residual = std::max(residual, std::abs(u_of(hi) - u0 - integral));
  }
  return residual;
}

double nisan_bound(double eps, double r_star) {
  if (!(eps >= 0.0 && eps <= 0.25)) {
    throw std::domain_error("nisan_bound: requires 0 <= eps <= 1/4");
  }
  double root = std::sqrt(eps);
  return 2.0 * root * r_star + root;
}

}  // namespace epsmech
