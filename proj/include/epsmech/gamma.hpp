#pragma once

namespace epsmech {

// Gamma profile of the unit-lag decay equation y'(t) = -(1/e) y(t-1) with
// y = 1 on [-1, 0]:
//   Gamma(t) = sum_{j=0}^{floor(t)+1} ((-1)^j e^{-j} / j!) (t+1-j)^j.
// Finite alternating sum in 80-bit precision with compensated accumulation
// for t <= 30; beyond that the sum cancels catastrophically and the renewal
// asymptote (2(t+1) + 2/3) e^{-(t+1)} is exact to ~1e-19, so it takes over.
// Requires t >= 0.
double gamma_fn(double t);

// e^{t+1} Gamma(t) = 1 + renewal_mean(t+1), evaluated without the e^{t}
// amplification of Gamma's rounding error.  Defined for t >= -1.
double exp_gamma(double t);

// E[N(s)]: mean number of renewals by time s for i.i.d. uniform[0,1]
// inter-arrival times.  Requires s >= 0.
double renewal_mean(double s);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

// Monte-Carlo renewal count estimate of renewal_mean(t).  Deterministic for a
// fixed seed: the stream is seeded per 1024-sample block, independent of any
// work partitioning.
McEstimate renewal_oracle(double t, long long n_samples,
                          unsigned long long seed);

}  // namespace epsmech
