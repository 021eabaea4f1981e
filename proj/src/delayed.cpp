#include "epsmech/delayed.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "epsmech/gamma.hpp"

namespace epsmech {

namespace {

constexpr double kE = 2.718281828459045235;

// int_0^s exp_gamma, in closed form: exp_gamma is one plus a renewal mean,
// and each unit of elapsed time adds exactly (mean at the right end minus
// one) to the mean's running integral, with an elementary expression below
// one.  Unrolling that recursion avoids quadrature entirely — important
// because the alternating series behind exp_gamma carries ulp-level noise
// that adaptive refinement would chase forever.
double exp_gamma_prefix(double s) {
  if (s <= 0.0) return 0.0;
  double tau = s + 1.0;
  int n = static_cast<int>(std::ceil(tau)) - 1;  // tau - n lands in (0, 1]
  if (n < 0) n = 0;
  double frac = tau - n;
  KahanSum acc;
  acc.add(std::exp(frac) - frac - 1.0);  // mean's integral over [0, frac]
  for (int j = 0; j < n; ++j) acc.add(renewal_mean(tau - j) - 1.0);
  acc.add(-(kE - 2.0));  // remove the mean's integral over [0, 1]
  acc.add(s);
  return acc.value();
}

struct DelayedShape {
  DelayedParams p;

  explicit DelayedShape(const DelayedParams& params) : p(params) {}

  double x(double v) const { return delayed_alloc(p, v); }

  // int_{p*-delta-mu}^{a} x(u) du
  double cum_x(double a) const {
    double b = p.p_star - p.delta;
    double s = (a - b) / p.mu;
    if (s <= 0.0) return p.eps * (std::exp(s + 1.0) - 1.0);
    return p.eps * (kE - 1.0) + p.eps * exp_gamma_prefix(s);
  }

  // int_0^v x(v*(s)) ds: the buyer's equilibrium utility at value v
  double big_i(double v) const {
    double b = p.p_star - p.delta;
    double top = p.p_star + p.delta + p.mu;
    if (v <= b) return v * p.eps / b;
    if (v <= top) return p.eps + cum_x(v - p.mu);
    return p.eps + cum_x(p.p_star + p.delta) + (v - top);
  }

  double transfer(double v) const {
    double b = p.p_star - p.delta;
    if (v < b) return v * x(v);
    return v * x(v) - big_i(v) + p.eps;
  }
};

}  // namespace

DeltaSolve solve_delta(double eps, double mu) {
  if (!(eps > 0.0)) throw std::domain_error("solve_delta: eps must be > 0");
  if (!(mu > kE * eps)) {
    throw std::domain_error("solve_delta: requires mu > e * eps");
  }
  double c = mu / eps;
  // Gamma(z) = (mu/(e eps)) e^{-z} rescaled by e^{z+1} keeps both sides O(z).
  auto scaled = [c](double z) { return exp_gamma(z) - c; };
  double z_hi = c;  // twice the bracket ceiling z <= mu/(2 eps)
  if (scaled(z_hi) <= 0.0) z_hi *= 2.0;  // analytic guarantee; belt+braces
  int iters = 0;
  auto counting = [&](double z) {
    ++iters;
    return scaled(z);
  };
  double z = bisect(counting, 0.0, z_hi, 1e-13 * std::max(1.0, z_hi));
  DeltaSolve out;
  out.z = z;
  out.delta = 0.5 * z * mu;
  out.iterations = iters;
  out.residual = std::abs(std::exp(-(z + 1.0)) * scaled(z));
  if (out.residual > 1e-12) {
    throw std::runtime_error("solve_delta: residual above 1e-12");
  }
  double hi = mu * mu / (4.0 * eps);
  double lo = std::max(0.0, hi - mu);
  double slack = 1e-9 * std::max(1.0, hi);
  if (out.delta < lo - slack || out.delta > hi + slack) {
    throw std::runtime_error("solve_delta: delta escaped its bracket");
  }
  return out;
}

double delayed_alloc(const DelayedParams& p, double v) {
  double a = p.p_star - p.delta - p.mu;
  double b = p.p_star - p.delta;
  double c = p.p_star + p.delta;
  if (v < 0.0 || v > p.v_bar) {
    throw std::domain_error("delayed_alloc: v outside [0, v_bar]");
  }
  if (v <= a) return p.eps / (b - v);
  if (v >= c) return 1.0;
  return (p.eps / p.mu) * exp_gamma((v - b) / p.mu);
}

DelayedMechanism build_delayed(const ValueDistribution& dist, double eps,
                               double mu) {
  DeltaSolve ds = solve_delta(eps, mu);
  PriceOpt opt = dist.optimal_price();
  DelayedParams p;
  p.eps = eps;
  p.mu = mu;
  p.delta = ds.delta;
  p.z = ds.z;
  p.p_star = opt.price;
  p.v_bar = dist.v_bar();
  double margin = 1e-9 * p.v_bar;
  if (p.p_star - p.delta - p.mu <= margin ||
      p.p_star + p.delta + p.mu >= p.v_bar - margin) {
    throw std::domain_error(
        "build_delayed: perturbation window escapes the support; reduce mu");
  }
  return build_delayed_from_params(p);
}

DelayedMechanism build_delayed_from_params(const DelayedParams& p) {
  auto shape = std::make_shared<DelayedShape>(p);
  double a = p.p_star - p.delta - p.mu;
  double b = p.p_star - p.delta;
  double c = p.p_star + p.delta;
  double top = c + p.mu;

  DelayedMechanism out;
  out.params = p;
  out.mech.kind = "perturbed-delayed";
  out.mech.v_bar = p.v_bar;
  out.mech.params = {{"eps", p.eps},       {"mu", p.mu},
                     {"delta", p.delta},   {"p_star", p.p_star},
                     {"v_bar", p.v_bar},   {"z", p.z}};
  auto xf = [shape](double v) { return shape->x(v); };
  auto tf = [shape](double v) { return shape->transfer(v); };
  out.mech.segments.push_back({0.0, a, xf, tf});
  out.mech.segments.push_back({a, b, xf, tf});
  out.mech.segments.push_back({b, c, xf, tf});
  out.mech.segments.push_back({c, top, xf, tf});
  out.mech.segments.push_back({top, p.v_bar, xf, tf});

  double p_star = p.p_star, delta = p.delta, mu = p.mu, v_bar = p.v_bar;
  out.map.forward = [=](double v) {
    if (v < b) return 0.0;
    if (v <= top) return v - mu;
    return c;
  };
  out.map.inverse = [=](double v) {
    if (v <= a) return b;
    return std::min(v + mu, v_bar);
  };
  (void)p_star;
  (void)delta;
  out.map.breakpoints = {a, b, c, top};
  return out;
}

DdeReport dde_oracle(const DelayedParams& p, int steps_per_interval) {
  double a = p.p_star - p.delta - p.mu;
  double b = p.p_star - p.delta;
  double c = p.p_star + p.delta;
  if (a < 0.0) throw std::domain_error("dde_oracle: window escapes support");

  std::vector<double> vs, xs, ds;
  vs.reserve(1 << 16);
  auto push = [&](double v, double x, double d) {
    vs.push_back(v);
    xs.push_back(x);
    ds.push_back(d);
  };
  // cubic Hermite on the stored dense solution
  auto hist = [&](double v) {
    auto it = std::upper_bound(vs.begin(), vs.end(), v);
    std::size_t i = static_cast<std::size_t>(it - vs.begin());
    if (i == 0) return xs.front();
    if (i >= vs.size()) return xs.back();
    double h = vs[i] - vs[i - 1];
    double tau = (v - vs[i - 1]) / h;
    double t2 = tau * tau, t3 = t2 * tau;
    return xs[i - 1] * (2 * t3 - 3 * t2 + 1) + xs[i] * (3 * t2 - 2 * t3) +
           ds[i - 1] * h * (t3 - 2 * t2 + tau) + ds[i] * h * (t3 - t2);
  };

  DdeReport rep;
  auto record = [&](double v, double x) {
    double dev = std::abs(x - delayed_alloc(p, v));
    if (dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.max_deviation_v = v;
    }
  };
  auto rk4 = [&](double v, double x, double h, const auto& f) {
    double k1 = f(v, x);
    double k2 = f(v + 0.5 * h, x + 0.5 * h * k1);
    double k3 = f(v + 0.5 * h, x + 0.5 * h * k2);
    double k4 = f(v + h, x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  double x = p.eps / b;
  // region 1, x' = x / (b - v): geometric mesh keeps h ~ (b - v) resolved
  auto f1 = [&](double v, double y) { return y / (b - v); };
  if (a > 0.0) {
    int octaves = std::max(1, static_cast<int>(std::ceil(std::log2(b / p.mu))));
    int n1 = steps_per_interval * octaves;
    push(0.0, x, f1(0.0, x));
    double prev = 0.0;
    for (int i = 1; i <= n1; ++i) {
      double v = b - b * std::pow(p.mu / b, static_cast<double>(i) / n1);
      if (i == n1) v = a;
      x = rk4(prev, x, v - prev, f1);
      push(v, x, f1(v, x));
      record(v, x);
      prev = v;
    }
  } else {
    push(0.0, x, f1(0.0, x));
  }
  // region 2, w(v) = v + mu so x' = x / mu
  auto f2 = [&](double, double y) { return y / p.mu; };
  {
    double h = (b - a) / steps_per_interval;
    for (int i = 1; i <= steps_per_interval; ++i) {
      double v0 = a + (i - 1) * h;
      x = rk4(v0, x, h, f2);
      double v = a + i * h;
      push(v, x, f2(v, x));
      record(v, x);
    }
  }
  // region 3, method of steps: x'(v) = (x(v) - x(v - mu)) / mu
  auto f3 = [&](double v, double y) { return (y - hist(v - p.mu)) / p.mu; };
  double start = b;
  while (start < c - 1e-15 * p.v_bar) {
    double stop = std::min(start + p.mu, c);
    double h = (stop - start) / steps_per_interval;
    std::vector<double> nvs, nxs, nds;
    for (int i = 1; i <= steps_per_interval; ++i) {
      double v0 = start + (i - 1) * h;
      x = rk4(v0, x, h, f3);
      double v = start + i * h;
      nvs.push_back(v);
      nxs.push_back(x);
      nds.push_back(f3(v, x));
      record(v, x);
    }
    // append after the interval completes so history stays frozen during it
    for (std::size_t i = 0; i < nvs.size(); ++i) {
      push(nvs[i], nxs[i], nds[i]);
    }
    start = stop;
  }
  return rep;
}

DelayedRevenue delayed_revenue(const DelayedMechanism& dm,
                               const ValueDistribution& dist) {
  const DelayedParams& p = dm.params;
  double a = p.p_star - p.delta - p.mu;
  double b = p.p_star - p.delta;
  double c = p.p_star + p.delta;

  DelayedRevenue out;
  out.value_direct = expected_revenue(dm.mech, dist, 1e-10);

  std::vector<double> cuts = {a, b, p.p_star};
  for (double v = b + p.mu; v < c; v += p.mu) cuts.push_back(v);
  for (double k : dist.breakpoints()) cuts.push_back(k);

  double term1 = integrate_piecewise(
      [&](double v) { return delayed_alloc(p, v) * v * dist.pdf(v); }, 0.0, c,
      cuts, 1e-10);
  double term2 = -integrate_piecewise(
      [&](double v) { return delayed_alloc(p, v) * dist.surv(v + p.mu); }, a,
      c, cuts, 1e-10);
  double term3 = dist.revenue_curve(c);
  double term4 = integrate_piecewise([&](double v) { return dist.surv(v); },
                                     c, c + p.mu, dist.breakpoints(), 1e-12);
  out.value_formula = term1 + term2 + term3 + term4;
  return out;
}

MuChoice choose_mu(const ValueDistribution& dist, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("choose_mu: eps must be > 0");
  if (!dist.envelope()) {
    throw std::domain_error("choose_mu: distribution has no envelope data");
  }
  const EnvelopeParams& env = *dist.envelope();
  double alpha = env.alpha;
  double k_u = env.kappa_upper;
  PriceOpt opt = dist.optimal_price();
  double v_bar = dist.v_bar();
  double rate = std::pow(eps, alpha / (2.0 * alpha - 1.0));

  for (double K = 1.0; K >= std::ldexp(1.0, -12); K *= 0.5) {
    double mu = K * rate;
    if (mu <= kE * eps * (1.0 + 1e-12)) break;  // shrinking K only lowers mu
    DeltaSolve ds;
    try {
      ds = solve_delta(eps, mu);
    } catch (const std::domain_error&) {
      break;
    }
    double margin = 1e-6 * v_bar;
    if (opt.price - ds.delta - mu <= margin ||
        opt.price + ds.delta + mu >= v_bar - margin) {
      continue;
    }
    double lhs = dist.surv(opt.price + ds.delta + mu) * K;
    double rhs = k_u * (std::pow(K * K / 4.0, alpha) +
                        std::pow(K * K / 2.0, alpha));
    if (lhs <= rhs) continue;
    MuChoice out;
    out.K = K;
    out.mu = mu;
    out.dm = build_delayed(dist, eps, mu);
    out.gain = delayed_revenue(out.dm, dist).value_direct - opt.revenue;
    if (out.gain <= 0.0) continue;
    return out;
  }
  throw std::domain_error(
      "choose_mu: no admissible K at this eps for this distribution");
}

}  // namespace epsmech
