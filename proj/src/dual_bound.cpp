#include "epsmech/dual_bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epsmech/numerics.hpp"

namespace epsmech {

double DualPath::w(double v) const {
  double s = (v >= p_star) ? m : 2.0 - m;
  return s * (v - p_star) + p_star + eps_high;
}

double DualPath::w_dot(double v) const { return (v >= p_star) ? m : 2.0 - m; }

double DualPath::w_inv(double y) const {
  double knee = p_star + eps_high;  // w(p_star)
  double s = (y >= knee) ? m : 2.0 - m;
  return p_star + (y - knee) / s;
}

int DualPath::bracket(double v) const {
  if (v < mu - 1e-12 * v_bar) {
    throw std::domain_error("DualPath::bracket: v below mu");
  }
  // smallest k with thresholds[k] <= v (thresholds descend)
  int lo = 0, hi = static_cast<int>(thresholds.size());
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (thresholds[mid] <= v) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return std::min(lo, K());
}

DualPath build_path(const ValueDistribution& dist, double eps, double beta) {
  if (!(eps > 0.0)) throw std::domain_error("build_path: eps must be > 0");
  if (!(beta > 0.0 && beta < 0.5)) {
    throw std::domain_error("build_path: beta must lie in (0, 1/2)");
  }
  DualPath p;
  p.eps = eps;
  p.beta = beta;
  PriceOpt opt = dist.optimal_price();
  p.p_star = opt.price;
  p.v_bar = dist.v_bar();
  p.eps_low = std::pow(eps, beta);
  p.eps_high = std::pow(eps, 1.0 - beta);
  if (p.eps_low >= 0.999 * (p.v_bar - p.p_star)) {
    throw std::domain_error(
        "build_path: eps^beta margin would swallow the revenue peak");
  }
  p.nu0 = p.v_bar - p.eps_low;
  p.m = (p.v_bar - p.p_star - p.eps_high) / (p.nu0 - p.p_star);
  if (p.m >= 2.0) {
    throw std::domain_error(
        "build_path: slope m >= 2, lower branch of w not increasing");
  }
  p.mu = p.w(0.0);

  double cur = p.nu0;
  p.thresholds.push_back(cur);
  const int kMaxSteps = 2000000;
  for (int i = 0; cur > p.mu; ++i) {
    if (i >= kMaxSteps) {
      throw std::runtime_error("build_path: threshold iteration stalled");
    }
    cur = p.w_inv(cur);
    p.thresholds.push_back(cur);
  }

  cur = p.p_star;
  p.p_star_preimages.push_back(cur);
  while (cur >= p.mu && cur > 0.0) {
    cur = p.w_inv(cur);
    if (cur <= 0.0) break;
    p.p_star_preimages.push_back(cur);
  }
  return p;
}

namespace {

// lambda on a pinned bracket: sum_{j<=k} f(w^j(v)) prod_{i<j} w_dot(w^i(v))
double lambda_on_bracket(const DualPath& p, const ValueDistribution& dist,
                         double v, int k) {
  double sum = 0.0;
  double prod = 1.0;
  double cur = v;
  for (int j = 0; j <= k; ++j) {
    sum += prod * dist.pdf(std::min(cur, p.v_bar));
    if (j < k) {
      prod *= p.w_dot(cur);
      cur = p.w(cur);
    }
  }
  return sum;
}

// H_k(v) = sum_{j<=k} F(w^j(v)) on a pinned bracket
double cumulative_on_bracket(const DualPath& p, const ValueDistribution& dist,
                             double v, int k) {
  double sum = 0.0;
  double cur = v;
  for (int j = 0; j <= k; ++j) {
    sum += dist.cdf(std::min(cur, p.v_bar));
    if (j < k) cur = p.w(cur);
  }
  return sum;
}

std::vector<double> panel_cuts(const DualPath& p,
                               const ValueDistribution& dist, double lo,
                               double hi) {
  std::vector<double> cuts = {lo, hi};
  auto add = [&](double v) {
    if (v > lo && v < hi) cuts.push_back(v);
  };
  for (double t : p.thresholds) add(t);
  for (double t : p.p_star_preimages) add(t);
  add(p.p_star);
  add(p.mu);
  add(p.nu0);
  for (double t : dist.breakpoints()) {
    add(t);
    if (t >= p.mu && t <= p.v_bar) add(p.w_inv(t));  // kink of f(w(v))
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

double lambda_ic(const DualPath& path, const ValueDistribution& dist,
                 double v) {
  if (v > path.v_bar * (1.0 + 1e-12)) {
    throw std::domain_error("lambda_ic: v above v_bar");
  }
  return lambda_on_bracket(path, dist, v, path.bracket(v));
}

double lambda_cumulative(const DualPath& path, const ValueDistribution& dist,
                         double v) {
  if (v > path.v_bar * (1.0 + 1e-12)) {
    throw std::domain_error("lambda_cumulative: v above v_bar");
  }
  return cumulative_on_bracket(path, dist, v, path.bracket(v));
}

PathCertificate dual_value(const DualPath& path,
                           const ValueDistribution& dist) {
  PathCertificate cert;
  cert.eps = path.eps;
  cert.beta = path.beta;
  cert.mu = path.mu;
  cert.m_slope = path.m;
  cert.nu0 = path.nu0;
  cert.K = path.K();
  cert.thresholds = path.thresholds;

  // phi1: the multiplier jumps at thresholds, so each panel pins the bracket
  // of its midpoint; panels never straddle a threshold by construction.
  {
    std::vector<double> cuts = panel_cuts(path, dist, path.mu, path.v_bar);
    KahanSum acc;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      double lo = cuts[i - 1], hi = cuts[i];
      int k = path.bracket(0.5 * (lo + hi));
      acc.add(adaptive_simpson(
          [&](double v) { return lambda_on_bracket(path, dist, v, k); }, lo,
          hi, 1e-11));
    }
    cert.phi1 = path.eps * acc.value();
  }

  // phi2: below nu0 the integrand subtracts the pulled-back multiplier, so
  // the bracket of w(v) is pinned per panel as well.
  {
    std::vector<double> cuts = panel_cuts(path, dist, 0.0, path.v_bar);
    KahanSum acc;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      double lo = cuts[i - 1], hi = cuts[i];
      double mid = 0.5 * (lo + hi);
      if (mid > path.nu0) {
        acc.add(adaptive_simpson(
            [&](double v) {
              return std::max(v * dist.pdf(v), 0.0);
            },
            lo, hi, 1e-11));
        continue;
      }
      int kw = path.bracket(path.w(mid));
      acc.add(adaptive_simpson(
          [&](double v) {
            double pull = path.w_dot(v) * (path.w(v) - v) *
                          lambda_on_bracket(path, dist, path.w(v), kw);
            return std::max(v * dist.pdf(v) - pull, 0.0);
          },
          lo, hi, 1e-11));
    }
    cert.phi2 = acc.value();
  }

  cert.bound = cert.phi1 + cert.phi2;
  cert.gain_bound = cert.bound - dist.optimal_price().revenue;
  return cert;
}

double phi1_telescope(const DualPath& path, const ValueDistribution& dist) {
  // integral over bracket k of dH_k telescopes: H_k(nu_{k-1}) - H_k(nu_k)
  // collapses to 1 - F(nu_k); the last bracket is truncated at mu.
  int K = path.K();
  KahanSum acc;
  for (int k = 0; k < K; ++k) {
    acc.add(1.0 - dist.cdf(path.thresholds[k]));
  }
  double upper = (K == 0) ? path.v_bar : path.thresholds[K - 1];
  acc.add(cumulative_on_bracket(path, dist, upper, K) -
          cumulative_on_bracket(path, dist, path.mu, K));
  return path.eps * acc.value();
}

PathCertificate optimize_beta(const ValueDistribution& dist, double eps) {
  double alpha = dist.envelope() ? dist.envelope()->alpha : 2.0;
  double seed = (alpha - 1.0) / (2.0 * alpha - 1.0);
  double lo = std::max(0.02, seed - 0.1);
  double hi = std::min(0.48, seed + 0.1);
  bool found = false;
  PathCertificate best;
  for (double beta : linspace(lo, hi, 21)) {
    try {
      DualPath path = build_path(dist, eps, beta);
      PathCertificate cert = dual_value(path, dist);
      if (!found || cert.bound < best.bound) {
        best = cert;
        found = true;
      }
    } catch (const std::domain_error&) {
      continue;  // geometrically invalid beta for this eps
    }
  }
  if (!found) {
    throw std::domain_error(
        "optimize_beta: no valid path shape at this eps for this "
        "distribution");
  }
  return best;
}

}  // namespace epsmech
