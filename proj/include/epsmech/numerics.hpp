#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace epsmech {

using Fn = std::function<double(double)>;

// Compensated (Kahan) accumulator for long alternating/cancelling sums.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const Fn& f, double a, double b, double tol = 1e-10,
                        int max_depth = 48);

// Adaptive Simpson split at interior breakpoints (sorted or not; values
// outside (a, b) are ignored).  Tolerance is divided across pieces.
double integrate_piecewise(const Fn& f, double a, double b,
                           const std::vector<double>& breakpoints,
                           double tol = 1e-10);

// Bisection for a sign change of f on [lo, hi].  Requires f(lo), f(hi) of
// opposite sign (zero endpoint is returned directly).  Converges the bracket
// to xtol (absolute); returns the midpoint of the final bracket.
double bisect(const Fn& f, double lo, double hi, double xtol = 1e-14,
              int max_iter = 200);

// Golden-section maximizer of f on [lo, hi] (unimodal assumed).
double golden_max(const Fn& f, double lo, double hi, double xtol = 1e-12);

// Ordinary least squares y ~ intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// n log-spaced points from lo to hi inclusive (ascending).
std::vector<double> logspace(double lo, double hi, int n);

// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace epsmech
