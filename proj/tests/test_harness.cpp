// Round-trip serialization, slope fitting, and the scaling sweep: results
// must be exact under reload, independent of worker count, and byte-stable
// on re-emission.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "epsmech/delayed.hpp"
#include "epsmech/deterministic.hpp"
#include "epsmech/harness.hpp"

using namespace epsmech;
using doctest::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("distribution documents reload to the same law") {
  std::vector<ValueDistribution> dists;
  dists.push_back(make_uniform(1.0));
  dists.push_back(make_exponential_truncated(1.5, 2.0));
  dists.push_back(make_envelope_dist(2.5, 0.5, 0.22, 1.0));
  dists.push_back(make_tabulated({0.0, 0.4, 1.0}, {0.0, 0.25, 1.0}));
  for (const auto& d : dists) {
    CAPTURE(d.kind());
    nlohmann::json j = dist_to_json(d);
    ValueDistribution back = dist_from_json(j);
    CHECK(back.kind() == d.kind());
    CHECK(back.v_bar() == d.v_bar());
    for (int i = 0; i <= 20; ++i) {
      double v = d.v_bar() * i / 20.0;
      CHECK(back.cdf(v) == Approx(d.cdf(v)).epsilon(1e-14));
    }
  }
  CHECK_THROWS(dist_from_json(nlohmann::json{{"kind", "cauchy"}}));
}

TEST_CASE("mechanism documents rebuild the same menu") {
  auto dist = make_uniform(1.0);
  std::vector<Mechanism> mechs;
  mechs.push_back(make_posted_price(0.5, 1.0));
  mechs.push_back(build_hard_soft(0.5, 0.51, 1.0).mech);
  mechs.push_back(build_delayed(dist, 1e-3, 1e-2).mech);
  mechs.push_back(make_step_mechanism("lp-discrete", {0.25, 0.75}, {0.0, 1.0},
                                      {0.0, 0.6}, 1.0));
  for (const auto& m : mechs) {
    CAPTURE(m.kind);
    Mechanism back = mechanism_from_json(mechanism_to_json(m));
    CHECK(back.kind == m.kind);
    for (int i = 0; i <= 400; ++i) {
      double v = m.v_bar * (i + 0.5) / 401.0;  // dodge step discontinuities
      CHECK(back.alloc(v) == Approx(m.alloc(v)).epsilon(1e-12));
      CHECK(back.transfer(v) == Approx(m.transfer(v)).epsilon(1e-12));
    }
  }

  // a sampled grid is attached on demand
  nlohmann::json j = mechanism_to_json(mechs.front(), 11);
  REQUIRE(j.contains("grid"));
  CHECK(j["grid"]["v"].size() == 11);
  CHECK(j["grid"]["x"].back().get<double>() == 1.0);
}

TEST_CASE("verification and certificate documents carry every field") {
  auto dist = make_uniform(1.0);
  Mechanism pp = make_posted_price(0.5, 1.0);
  VerificationReport vr = verify(pp, dist, 1e-3, 1e-8, 300, 300);
  nlohmann::json jv = report_to_json(vr);
  CHECK(jv.at("passed").get<bool>() == vr.passed);
  CHECK(jv.at("min_ir_slack").get<double>() == vr.min_ir_slack);
  CHECK(jv.at("min_ic_slack").get<double>() == vr.min_ic_slack);

  PathCertificate cert = optimize_beta(dist, 1e-3);
  nlohmann::json jc = certificate_to_json(cert);
  CHECK(jc.at("bound").get<double>() == cert.bound);
  CHECK(jc.at("K").get<int>() == cert.K);
  CHECK(jc.at("thresholds").size() == cert.thresholds.size());
}

TEST_CASE("default grid is eight log-spaced points spanning the decade") {
  std::vector<double> g = default_eps_grid();
  REQUIRE(g.size() == 8);
  CHECK(g.front() == Approx(1e-5).epsilon(1e-12));
  CHECK(g.back() == Approx(1e-2).epsilon(1e-12));
  double ratio = g[1] / g[0];
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    CHECK(g[i + 1] / g[i] == Approx(ratio).epsilon(1e-12));
  }
}

TEST_CASE("log-log fit recovers an exact power law") {
  std::vector<double> xs, ys;
  for (int i = 1; i <= 6; ++i) {
    double x = std::pow(10.0, -i);
    xs.push_back(x);
    ys.push_back(3.0 * std::pow(x, 0.75));
  }
  CHECK(fit_loglog_slope(xs, ys) == Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog_slope({1.0}, {2.0}), std::domain_error);
  CHECK_THROWS_AS(fit_loglog_slope({1.0, 2.0}, {-1.0, -2.0}),
                  std::domain_error);
}

TEST_CASE("scaling sweep on the uniform behaves and is worker-invariant") {
  auto dist = make_uniform(1.0);
  ScalingOptions opt;
  opt.eps_grid = {1e-4, 3.162e-4, 1e-3, 3.162e-3, 1e-2};
  opt.workers = 1;
  ScalingReport rep = run_scaling(dist, opt);

  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.alpha == 2.0);
  CHECK(rep.predicted_slope == Approx(2.0 / 3.0));
  CHECK(rep.r_star == Approx(0.25).epsilon(1e-10));
  double prev = 0.0;
  for (const ScalingRow& r : rep.rows) {
    CAPTURE(r.eps);
    CHECK(r.eps > prev);
    prev = r.eps;
    CHECK(r.det_ok);
    CHECK(r.delayed_ok);
    CHECK(r.dual_ok);
    CHECK(r.note.empty());
    CHECK(r.det_gain >= -1e-8);
    CHECK(r.delayed_gain > 0.0);
    CHECK(r.dual_gain_bound >= -1e-8);
    CHECK(r.delayed_gain > r.det_gain);  // randomization helps at every eps
  }
  CHECK(rep.fitted_slopes.det == Approx(1.0).epsilon(0.05));
  CHECK(rep.fitted_slopes.delayed == Approx(2.0 / 3.0).epsilon(0.12));

  // Same sweep on a pool must produce identical bytes.
  ScalingOptions opt4 = opt;
  opt4.workers = 4;
  ScalingReport rep4 = run_scaling(dist, opt4);
  emit_plotdata(rep, "harness_scaling_a.csv");
  emit_plotdata(rep4, "harness_scaling_b.csv");
  emit_plotdata(rep, "harness_scaling_c.csv");
  std::string a = slurp("harness_scaling_a.csv");
  CHECK(a == slurp("harness_scaling_b.csv"));
  CHECK(a == slurp("harness_scaling_c.csv"));
  CHECK(!a.empty());
  CHECK(a.back() == '\n');
  CHECK(a.rfind("eps,det,delayed,dual,ref_linear,ref_rate,ref_sqrt,status",
                0) == 0);
  std::remove("harness_scaling_a.csv");
  std::remove("harness_scaling_b.csv");
  std::remove("harness_scaling_c.csv");

  // Reference-line anchoring: at the first row the rate line equals the
  // measured randomized gain exactly.
  std::istringstream lines(a);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  std::vector<std::string> cells;
  std::istringstream cs(first);
  for (std::string cell; std::getline(cs, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 8);
  CHECK(std::stod(cells[4]) == Approx(rep.rows[0].det_gain).epsilon(1e-10));
  CHECK(std::stod(cells[5]) ==
        Approx(rep.rows[0].delayed_gain).epsilon(1e-10));
  CHECK(std::stod(cells[6]) ==
        Approx(rep.rows[0].delayed_gain).epsilon(1e-10));
  CHECK(cells[7] == "ok");

  // summary document carries the fitted slopes
  nlohmann::json js = scaling_to_json(rep);
  CHECK(js.at("fitted_slopes").at("det").get<double>() ==
        rep.fitted_slopes.det);
  CHECK(js.at("rows").size() == 5);

  ScalingOptions bad;
  bad.eps_grid = {1e-3, 1e-2};
  CHECK_THROWS_AS(run_scaling(dist, bad), std::domain_error);
}

}  // TEST_SUITE
