#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "epsmech/distribution.hpp"

using namespace epsmech;

TEST_SUITE("distribution") {

TEST_CASE("uniform: pointwise laws and the revenue peak") {
  ValueDistribution u = make_uniform(1.0);
  CHECK(u.cdf(0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(u.pdf(0.8) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(u.surv(0.25) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(u.cdf(-1.0) == 0.0);
  CHECK(u.cdf(2.0) == 1.0);
  CHECK(u.revenue_curve(0.4) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(u.revenue_deriv(0.4) == doctest::Approx(0.2).epsilon(1e-13));

  PriceOpt opt = u.optimal_price();
  CHECK(std::abs(opt.price - 0.5) < 1e-10);
  CHECK(std::abs(opt.revenue - 0.25) < 1e-10);
  CHECK(std::abs(u.virtual_value(0.5)) < 1e-10);
  CHECK(u.virtual_value(0.8) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("uniform scaled by v_bar") {
  ValueDistribution u = make_uniform(2.0);
  PriceOpt opt = u.optimal_price();
  CHECK(std::abs(opt.price - 1.0) < 1e-9);
  CHECK(std::abs(opt.revenue - 0.5) < 1e-10);
  CHECK(u.pdf(1.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("uniform satisfies its exact quadratic envelope in both forms") {
  ValueDistribution u = make_uniform(1.0);
  REQUIRE(u.envelope().has_value());
  const EnvelopeParams& env = *u.envelope();
  CHECK(env.alpha == 2.0);
  CHECK(env.kappa_lower == doctest::Approx(1.0));
  CHECK(env.kappa_upper == doctest::Approx(1.0));

  for (EnvelopeForm form : {EnvelopeForm::value, EnvelopeForm::derivative}) {
    EnvelopeReport rep = envelope_check(u, 2.0, 1.0, 1.0, 0.4, form);
    CHECK_MESSAGE(rep.passed, "form=", static_cast<int>(form),
                  " lower=", rep.worst_lower_margin,
                  " upper=", rep.worst_upper_margin);
  }
  // a kappa_lower that is too aggressive must fail on the lower side
  EnvelopeReport bad =
      envelope_check(u, 2.0, 1.5, 1.0, 0.4, EnvelopeForm::value);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_lower_margin < 0.0);
  // a kappa_upper that is too small must fail on the upper side
  EnvelopeReport bad2 =
      envelope_check(u, 2.0, 1.0, 0.5, 0.4, EnvelopeForm::derivative);
  CHECK_FALSE(bad2.passed);
  CHECK(bad2.worst_upper_margin < 0.0);
  // windows leaving the support are rejected
  CHECK_THROWS_AS(envelope_check(u, 2.0, 1.0, 1.0, 0.6, EnvelopeForm::value),
                  std::domain_error);
}

TEST_CASE("designed power-peak distribution: quadratic case is uniform") {
  ValueDistribution d = make_envelope_dist(2.0, 0.5, 0.25, 1.0);
  for (double v : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    CHECK(d.cdf(v) == doctest::Approx(v).epsilon(1e-10));
    CHECK(d.pdf(v) == doctest::Approx(1.0).epsilon(1e-8));
  }
  PriceOpt opt = d.optimal_price();
  CHECK(std::abs(opt.price - 0.5) < 1e-9);
  CHECK(std::abs(opt.revenue - 0.25) < 1e-10);
}

TEST_CASE("designed distributions hit the requested peak and exponent") {
  struct Case {
    double alpha, p_star, r_star, v_bar;
  };
  const Case cases[] = {
      {1.5, 0.5, 0.2, 1.0},   // kinked junction (r* < p*/alpha)
      {1.5, 0.4, 0.3, 1.0},   // tangent junction (r* >= p*/alpha)
      {2.0, 0.4, 0.2, 1.0},
      {2.0, 0.6, 0.25, 1.0},
      {3.0, 0.5, 0.3, 1.0},
      {3.0, 0.6, 0.3, 1.2},
  };
  for (const Case& c : cases) {
    CAPTURE(c.alpha);
    CAPTURE(c.p_star);
    ValueDistribution d =
        make_envelope_dist(c.alpha, c.p_star, c.r_star, c.v_bar);
    PriceOpt opt = d.optimal_price();
    CHECK(std::abs(opt.price - c.p_star) < 1e-8);
    CHECK(std::abs(opt.revenue - c.r_star) < 1e-10);

    REQUIRE(d.envelope().has_value());
    const EnvelopeParams& env = *d.envelope();
    CHECK(env.alpha == c.alpha);
    for (EnvelopeForm form : {EnvelopeForm::value, EnvelopeForm::derivative}) {
      EnvelopeReport rep = envelope_check(d, env.alpha, env.kappa_lower,
                                          env.kappa_upper, env.ell, form);
      CHECK_MESSAGE(rep.passed, "lower=", rep.worst_lower_margin,
                    " upper=", rep.worst_upper_margin);
    }

    DistValidation val = validate_distribution(d);
    CHECK_MESSAGE(val.passed, val.message);
  }
}

TEST_CASE("designed distribution rejects impossible geometry") {
  CHECK_THROWS_AS(make_envelope_dist(2.0, 0.5, 0.6, 1.0), std::runtime_error);
  CHECK_THROWS_AS(make_envelope_dist(2.0, 1.0, 0.25, 1.0), std::runtime_error);
  CHECK_THROWS_AS(make_envelope_dist(0.9, 0.5, 0.25, 1.0),
                  std::runtime_error);
}

TEST_CASE("truncated exponential: closed-form cdf and sane peak") {
  double rate = 2.0, v_bar = 1.0;
  ValueDistribution d = make_exponential_truncated(rate, v_bar);
  double norm = -std::expm1(-rate * v_bar);
  for (double v : {0.1, 0.5, 0.9}) {
    CHECK(d.cdf(v) ==
          doctest::Approx(-std::expm1(-rate * v) / norm).epsilon(1e-13));
    CHECK(d.pdf(v) ==
          doctest::Approx(rate * std::exp(-rate * v) / norm).epsilon(1e-13));
  }
  DistValidation val = validate_distribution(d);
  CHECK_MESSAGE(val.passed, val.message);
  PriceOpt opt = d.optimal_price();
  CHECK(opt.price > 0.3);
  CHECK(opt.price < 0.7);
  // interior first-order condition
  CHECK(std::abs(d.revenue_deriv(opt.price)) < 1e-9);
}

TEST_CASE("value-form envelope implies the derivative form with factor e") {
  // Empirically tightest value-form constants on a window, then the
  // derivative-form upper check with kappa_u inflated by e must pass.
  ValueDistribution d = make_exponential_truncated(2.0, 1.0);
  PriceOpt opt = d.optimal_price();
  double ell = 0.25;
  double alpha = 2.0;
  double k_lo = 1e300, k_hi = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    double v = opt.price - ell + (2.0 * ell) * i / 2000.0;
    double gap = std::abs(v - opt.price);
    if (gap < 1e-4) continue;
    double ratio = (opt.revenue - d.revenue_curve(v)) / std::pow(gap, alpha);
    k_lo = std::min(k_lo, ratio);
    k_hi = std::max(k_hi, ratio);
  }
  REQUIRE(k_lo > 0.0);
  EnvelopeReport val_rep = envelope_check(d, alpha, 0.999 * k_lo,
                                          1.001 * k_hi, ell,
                                          EnvelopeForm::value);
  CHECK(val_rep.passed);
  const double e = 2.718281828459045;
  EnvelopeReport der_rep = envelope_check(d, alpha, 0.0, e * 1.001 * k_hi,
                                          ell, EnvelopeForm::derivative);
  CHECK(der_rep.passed);
}

TEST_CASE("tabulated distribution interpolates its nodes") {
  ValueDistribution d =
      make_tabulated({0.0, 0.5, 1.0}, {0.0, 0.25, 1.0});
  CHECK(d.cdf(0.25) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(d.cdf(0.75) == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(d.pdf(0.25) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.pdf(0.75) == doctest::Approx(1.5).epsilon(1e-12));
  DistValidation val = validate_distribution(d);
  CHECK_MESSAGE(val.passed, val.message);
}

TEST_CASE("density sup covers spikes at breakpoints") {
  ValueDistribution d = make_tabulated({0.0, 0.9, 1.0}, {0.0, 0.1, 1.0});
  CHECK(d.pdf_sup() == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(make_uniform(2.0).pdf_sup() == doctest::Approx(0.5).epsilon(1e-12));
}

}  // TEST_SUITE
