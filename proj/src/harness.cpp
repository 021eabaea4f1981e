#include "epsmech/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "epsmech/delayed.hpp"
#include "epsmech/lp_oracle.hpp"

namespace epsmech {

using nlohmann::json;

// --- serialization -------------------------------------------------------

json dist_to_json(const ValueDistribution& dist) {
  json j;
  j["kind"] = dist.kind();
  j["v_bar"] = dist.v_bar();
  json p = json::object();
  for (const auto& [key, value] : dist.params()) p[key] = value;
  j["params"] = p;
  if (!dist.tab_values().empty()) {
    j["values"] = dist.tab_values();
    j["cdf"] = dist.tab_cdf();
  }
  return j;
}

ValueDistribution dist_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    return make_uniform(j.at("v_bar").get<double>());
  }
  if (kind == "exponential-truncated") {
    return make_exponential_truncated(j.at("params").at("rate").get<double>(),
                                      j.at("v_bar").get<double>());
  }
  if (kind == "envelope-designed") {
    const json& p = j.at("params");
    return make_envelope_dist(
        p.at("alpha").get<double>(), p.at("p_star").get<double>(),
        p.at("r_star").get<double>(), j.at("v_bar").get<double>());
  }
  if (kind == "user-supplied") {
    return make_tabulated(j.at("values").get<std::vector<double>>(),
                          j.at("cdf").get<std::vector<double>>());
  }
  throw std::runtime_error("unknown distribution kind: " + kind);
}

ValueDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file: " + path);
  json j;
  try {
    in >> j;
    return dist_from_json(j);
  } catch (const std::exception& e) {
    throw std::runtime_error("loading " + path + ": " + e.what());
  }
}

void save_distribution(const ValueDistribution& dist,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write distribution file: " + path);
  out << dist_to_json(dist).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

json mechanism_to_json(const Mechanism& mech, int grid_n) {
  json j;
  j["kind"] = mech.kind;
  j["v_bar"] = mech.v_bar;
  json p = json::object();
  for (const auto& [key, value] : mech.params) p[key] = value;
  j["params"] = p;
  std::vector<double> gv = mech.grid_v, gx = mech.grid_x, gt = mech.grid_t;
  if (gv.empty() && grid_n > 1) {
    gv.resize(grid_n);
    gx.resize(grid_n);
    gt.resize(grid_n);
    for (int i = 0; i < grid_n; ++i) {
      double v = mech.v_bar * i / (grid_n - 1);
      gv[i] = v;
      gx[i] = mech.alloc(v);
      gt[i] = mech.transfer(v);
    }
  }
  if (!gv.empty()) {
    j["grid"] = {{"v", gv}, {"x", gx}, {"t", gt}};
  }
  return j;
}

Mechanism mechanism_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double v_bar = j.at("v_bar").get<double>();
  const json& p = j.at("params");
  if (kind == "posted-price") {
    return make_posted_price(p.at("price").get<double>(), v_bar);
  }
  if (kind == "hard-soft-floor") {
    return build_hard_soft(p.at("hard").get<double>(),
                           p.at("soft").get<double>(), v_bar)
        .mech;
  }
  if (kind == "perturbed-delayed") {
    DelayedParams dp;
    dp.eps = p.at("eps").get<double>();
    dp.mu = p.at("mu").get<double>();
    dp.delta = p.at("delta").get<double>();
    dp.p_star = p.at("p_star").get<double>();
    dp.v_bar = v_bar;
    dp.z = p.at("z").get<double>();
    return build_delayed_from_params(dp).mech;
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    return make_step_mechanism(kind, g.at("v").get<std::vector<double>>(),
                               g.at("x").get<std::vector<double>>(),
                               g.at("t").get<std::vector<double>>(), v_bar);
  }
  throw std::runtime_error("unknown mechanism kind without grid: " + kind);
}

json report_to_json(const VerificationReport& rep) {
  return json{{"passed", rep.passed},
              {"min_ir_slack", rep.min_ir_slack},
              {"min_ic_slack", rep.min_ic_slack},
              {"worst_value", rep.worst_value},
              {"worst_report", rep.worst_report}};
}

json certificate_to_json(const PathCertificate& cert) {
  return json{{"eps", cert.eps},
              {"beta", cert.beta},
              {"mu", cert.mu},
              {"m_slope", cert.m_slope},
              {"nu0", cert.nu0},
              {"K", cert.K},
              {"phi1", cert.phi1},
              {"phi2", cert.phi2},
              {"bound", cert.bound},
              {"gain_bound", cert.gain_bound},
              {"thresholds", cert.thresholds}};
}

// --- scaling sweep -------------------------------------------------------

std::vector<double> default_eps_grid() {
  std::vector<double> grid(8);
  for (int i = 0; i < 8; ++i) {
    grid[i] = std::pow(10.0, -5.0 + 3.0 * i / 7.0);
  }
  return grid;
}

double fit_loglog_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("fit_loglog_slope: length mismatch");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) continue;
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::domain_error("fit_loglog_slope: need >= 2 points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// Slope over the rows where the selected leg succeeded with positive gain;
// NaN when fewer than two rows qualify.
template <typename GainOf, typename OkOf>
double fit_leg(const std::vector<ScalingRow>& rows, GainOf gain, OkOf ok) {
  std::vector<double> xs, ys;
  for (const ScalingRow& r : rows) {
    if (ok(r) && gain(r) > 0.0) {
      xs.push_back(r.eps);
      ys.push_back(gain(r));
    }
  }
  if (xs.size() < 2) return std::nan("");
  return fit_loglog_slope(xs, ys);
}

}  // namespace

ScalingReport run_scaling(const ValueDistribution& dist,
                          const ScalingOptions& opt) {
  std::vector<double> grid =
      opt.eps_grid.empty() ? default_eps_grid() : opt.eps_grid;
  if (grid.size() < 5) {
    throw std::domain_error("run_scaling: need at least 5 eps points");
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i] < grid[i + 1])) {
      throw std::domain_error("run_scaling: eps grid must increase strictly");
    }
  }
  if (!(grid.front() > 0.0)) {
    throw std::domain_error("run_scaling: eps must be positive");
  }

  ScalingReport rep;
  rep.alpha = dist.envelope() ? dist.envelope()->alpha : 2.0;
  rep.predicted_slope = rep.alpha / (2.0 * rep.alpha - 1.0);
  rep.with_lp = opt.with_lp;
  // Fill the lazily cached quantities once, before any worker can race on
  // them; everything after this point only reads the distribution.
  PriceOpt po = dist.optimal_price();
  dist.pdf_sup();
  rep.p_star = po.price;
  rep.r_star = po.revenue;
  rep.rows.assign(grid.size(), ScalingRow{});

  int workers = opt.workers;
  if (workers <= 0) {
    if (const char* env = std::getenv("EPSMECH_WORKERS")) {
      workers = std::atoi(env);
    }
  }
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  workers = std::max(1, std::min<int>(workers, grid.size()));

  auto work = [&](std::size_t i) {
    ScalingRow row;
    row.eps = grid[i];
    std::ostringstream note;
    try {
      DetOpt d = optimal_det(dist, row.eps);
      row.det_gain = d.gain;
      row.det_ok = true;
    } catch (const std::exception& e) {
      note << "det: " << e.what() << "; ";
    }
    try {
      MuChoice mc = choose_mu(dist, row.eps);
      VerificationReport vr = verify(mc.dm.mech, dist, row.eps, 1e-8, 2000,
                                     2000);
      if (vr.passed) {
        row.delayed_gain =
            delayed_revenue(mc.dm, dist).value_direct - rep.r_star;
        row.delayed_ok = true;
      } else {
        note << "delayed: failed verification; ";
      }
    } catch (const std::exception& e) {
      note << "delayed: " << e.what() << "; ";
    }
    try {
      PathCertificate cert = optimize_beta(dist, row.eps);
      row.dual_gain_bound = cert.gain_bound;
      row.dual_ok = true;
    } catch (const std::exception& e) {
      note << "dual: " << e.what() << "; ";
    }
    if (opt.with_lp) {
      try {
        LPSolution sol = lp_solve(discretize(dist, opt.lp_n, row.eps));
        if (sol.status == "optimal") {
          row.lp_gain = sol.value - rep.r_star;
          row.lp_ok = true;
        } else {
          note << "lp: " << sol.status << "; ";
        }
      } catch (const std::exception& e) {
        note << "lp: " << e.what() << "; ";
      }
    }
    row.note = note.str();
    rep.rows[i] = row;
  };

  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= grid.size()) return;
          work(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  rep.fitted_slopes.det =
      fit_leg(rep.rows, [](const ScalingRow& r) { return r.det_gain; },
              [](const ScalingRow& r) { return r.det_ok; });
  rep.fitted_slopes.delayed =
      fit_leg(rep.rows, [](const ScalingRow& r) { return r.delayed_gain; },
              [](const ScalingRow& r) { return r.delayed_ok; });
  rep.fitted_slopes.dual =
      fit_leg(rep.rows, [](const ScalingRow& r) { return r.dual_gain_bound; },
              [](const ScalingRow& r) { return r.dual_ok; });
  return rep;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

void emit_plotdata(const ScalingReport& rep, const std::string& path) {
  const double nan = std::nan("");
  double c_lin = nan, c_rate = nan, c_sqrt = nan;
  for (const ScalingRow& r : rep.rows) {
    if (r.det_ok && r.det_gain > 0.0) {
      c_lin = r.det_gain / r.eps;
      break;
    }
  }
  for (const ScalingRow& r : rep.rows) {
    if (r.delayed_ok && r.delayed_gain > 0.0) {
      c_rate = r.delayed_gain / std::pow(r.eps, rep.predicted_slope);
      c_sqrt = r.delayed_gain / std::sqrt(r.eps);
      break;
    }
  }

  std::ostringstream out;
  out << "eps,det,delayed,dual";
  if (rep.with_lp) out << ",lp";
  out << ",ref_linear,ref_rate,ref_sqrt,status\n";
  for (const ScalingRow& r : rep.rows) {
    bool ok = r.det_ok && r.delayed_ok && r.dual_ok &&
              (!rep.with_lp || r.lp_ok);
    out << num(r.eps) << ',' << num(r.det_ok ? r.det_gain : nan) << ','
        << num(r.delayed_ok ? r.delayed_gain : nan) << ','
        << num(r.dual_ok ? r.dual_gain_bound : nan);
    if (rep.with_lp) out << ',' << num(r.lp_ok ? r.lp_gain : nan);
    out << ',' << num(c_lin * r.eps) << ','
        << num(c_rate * std::pow(r.eps, rep.predicted_slope)) << ','
        << num(c_sqrt * std::sqrt(r.eps)) << ','
        << (ok ? "ok" : "failed") << '\n';
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write plot data: " + path);
  f << out.str();
  if (!f) throw std::runtime_error("write failed: " + path);
}

json scaling_to_json(const ScalingReport& rep) {
  auto finite_or_null = [](double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
  };
  json rows = json::array();
  for (const ScalingRow& r : rep.rows) {
    rows.push_back({{"eps", r.eps},
                    {"det_gain", r.det_ok ? json(r.det_gain) : json(nullptr)},
                    {"delayed_gain",
                     r.delayed_ok ? json(r.delayed_gain) : json(nullptr)},
                    {"dual_gain_bound",
                     r.dual_ok ? json(r.dual_gain_bound) : json(nullptr)},
                    {"lp_gain", r.lp_ok ? json(r.lp_gain) : json(nullptr)},
                    {"note", r.note}});
  }
  return json{{"alpha", rep.alpha},
              {"p_star", rep.p_star},
              {"r_star", rep.r_star},
              {"predicted_slope", rep.predicted_slope},
              {"with_lp", rep.with_lp},
              {"fitted_slopes",
               {{"det", finite_or_null(rep.fitted_slopes.det)},
                {"delayed", finite_or_null(rep.fitted_slopes.delayed)},
                {"dual", finite_or_null(rep.fitted_slopes.dual)}}},
              {"rows", rows}};
}

void emit_summary(const ScalingReport& rep, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write summary: " + path);
  f << scaling_to_json(rep).dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace epsmech
