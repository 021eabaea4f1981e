// epsmech: command-line frontend for the approximate-truthfulness revenue
// toolkit.  Every subcommand loads its inputs from JSON documents, prints
// CSV/JSON to stdout, and exits 0 exactly when its built-in assertions hold.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "epsmech/delayed.hpp"
#include "epsmech/deterministic.hpp"
#include "epsmech/distribution.hpp"
#include "epsmech/dual_bound.hpp"
#include "epsmech/gamma.hpp"
#include "epsmech/harness.hpp"
#include "epsmech/lp_oracle.hpp"
#include "epsmech/mechanism.hpp"

using namespace epsmech;
using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

int run_det_opt(const std::string& dist_path, double eps) {
  ValueDistribution dist = load_distribution(dist_path);
  DetOpt d = optimal_det(dist, eps);
  std::cout << "r,value,gain\n"
            << num(d.r) << ',' << num(d.value) << ',' << num(d.gain) << "\n";
  return d.gain >= -1e-12 && d.gain <= eps + 1e-12 ? 0 : 1;
}

int run_delayed_build(const std::string& dist_path, double eps, double mu) {
  ValueDistribution dist = load_distribution(dist_path);
  DelayedMechanism dm =
      mu > 0.0 ? build_delayed(dist, eps, mu) : choose_mu(dist, eps).dm;
  VerificationReport vr = verify(dm.mech, dist, eps);
  DelayedRevenue rev = delayed_revenue(dm, dist);
  double r_star = dist.optimal_price().revenue;
  json out{{"mechanism", mechanism_to_json(dm.mech)},
           {"verification", report_to_json(vr)},
           {"revenue",
            {{"value_direct", rev.value_direct},
             {"value_formula", rev.value_formula},
             {"gain", rev.value_direct - r_star}}}};
  std::cout << out.dump(2) << "\n";
  return vr.passed ? 0 : 1;
}

int run_gamma_point(double t) {
  std::cout << "t,gamma,renewal_mean\n"
            << num(t) << ',' << num(gamma_fn(t)) << ','
            << num(renewal_mean(t + 1.0)) << "\n";
  return 0;
}

int run_gamma_selftest() {
  bool all = true;
  auto line = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    all = all && ok;
  };

  line(gamma_fn(0.0) == 1.0, "gamma(0) equals 1 exactly");

  bool bounds = true;
  double worst = 1.0;
  for (double t = 0.0; t <= 30.0 + 1e-12; t += 1e-3) {
    double g = gamma_fn(t);
    double lo = 2.0 * (t + 1.0) * std::exp(-1.0 - t);
    double hi = 2.0 * (t + 2.0) * std::exp(-(t + 1.0));
    if (!(lo < g && g <= hi)) {
      bounds = false;
      worst = t;
      break;
    }
  }
  line(bounds, bounds ? "analytic bounds hold on [0,30] at step 1e-3"
                      : "analytic bounds fail first at t=" + num(worst));

  for (double t : {0.5, 1.5, 5.0}) {
    McEstimate mc = renewal_oracle(t + 1.0, 1000000, 12345);
    double mean = exp_gamma(t) - 1.0;
    double diff = std::abs(mean - mc.mean);
    line(diff <= 3.0 * mc.std_error,
         "renewal mean matches Monte Carlo at t=" + num(t) +
             " (|diff|=" + num(diff) + ", 3se=" + num(3.0 * mc.std_error) +
             ")");
  }
  return all ? 0 : 1;
}

int run_dual(const std::string& dist_path, double eps, double beta,
             bool auto_beta) {
  ValueDistribution dist = load_distribution(dist_path);
  PathCertificate cert = auto_beta
                             ? optimize_beta(dist, eps)
                             : dual_value(build_path(dist, eps, beta), dist);
  std::cout << certificate_to_json(cert).dump(2) << "\n";
  std::cout << "eps,beta,K,phi1,phi2,bound,gain_bound\n"
            << num(cert.eps) << ',' << num(cert.beta) << ',' << cert.K << ','
            << num(cert.phi1) << ',' << num(cert.phi2) << ','
            << num(cert.bound) << ',' << num(cert.gain_bound) << "\n";
  double r_star = dist.optimal_price().revenue;
  return cert.bound >= r_star - 1e-8 ? 0 : 1;
}

int run_lp(const std::string& dist_path, double eps, int n, bool menu) {
  ValueDistribution dist = load_distribution(dist_path);
  LPInstance inst = discretize(dist, n, eps);
  LPSolution sol = lp_solve(inst);
  std::cout << "value,status,iterations\n"
            << num(sol.value) << ',' << sol.status << ',' << sol.iterations
            << "\n";
  if (menu && sol.status == "optimal") {
    std::cout << "i,v,x,t\n";
    for (std::size_t i = 0; i < inst.values.size(); ++i) {
      std::cout << i << ',' << num(inst.values[i]) << ',' << num(sol.x[i])
                << ',' << num(sol.t[i]) << "\n";
    }
  }
  return sol.status == "optimal" ? 0 : 1;
}

int run_scaling(const std::string& dist_path, double alpha, double eps_min,
                double eps_max, int points, bool with_lp, int lp_n,
                const std::string& out_dir) {
  ValueDistribution dist = load_distribution(dist_path);
  double dist_alpha = dist.envelope() ? dist.envelope()->alpha : 2.0;
  if (std::abs(dist_alpha - alpha) > 1e-9) {
    std::cerr << "alpha mismatch: flag says " << alpha
              << " but the distribution declares " << dist_alpha << "\n";
    return 1;
  }
  ScalingOptions opt;
  opt.with_lp = with_lp;
  opt.lp_n = lp_n;
  opt.eps_grid.resize(points);
  double lg_min = std::log10(eps_min), lg_max = std::log10(eps_max);
  for (int i = 0; i < points; ++i) {
    opt.eps_grid[i] =
        std::pow(10.0, lg_min + (lg_max - lg_min) * i / (points - 1));
  }
  ScalingReport rep = epsmech::run_scaling(dist, opt);

  std::filesystem::create_directories(out_dir);
  std::string csv = out_dir + "/scaling.csv";
  std::string summary = out_dir + "/summary.json";
  emit_plotdata(rep, csv);
  emit_summary(rep, summary);

  bool rows_ok = true;
  for (const ScalingRow& r : rep.rows) {
    rows_ok = rows_ok && r.det_ok && r.delayed_ok && r.dual_ok &&
              (!with_lp || r.lp_ok);
  }
  bool slope_ok =
      std::isfinite(rep.fitted_slopes.delayed) &&
      std::abs(rep.fitted_slopes.delayed - rep.predicted_slope) <= 0.08;
  std::cout << "alpha,predicted_slope,det_slope,delayed_slope,dual_slope,"
               "rows,clean\n"
            << num(rep.alpha) << ',' << num(rep.predicted_slope) << ','
            << num(rep.fitted_slopes.det) << ','
            << num(rep.fitted_slopes.delayed) << ','
            << num(rep.fitted_slopes.dual) << ',' << rep.rows.size() << ','
            << (rows_ok ? "yes" : "no") << "\n";
  std::cout << "wrote " << csv << " and " << summary << "\n";
  return rows_ok && slope_ok ? 0 : 1;
}

int run_verify(const std::string& mech_path, const std::string& dist_path,
               double eps) {
  ValueDistribution dist = load_distribution(dist_path);
  Mechanism mech = mechanism_from_json(load_json(mech_path));
  VerificationReport vr = verify(mech, dist, eps);
  std::cout << report_to_json(vr).dump(2) << "\n";
  return vr.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Numerical toolkit for revenue-optimal selling mechanisms under "
      "approximate truthfulness"};
  app.require_subcommand(1);
  int rc = 0;

  std::string dist_path, mech_path, out_dir;
  double eps = 0.0, mu = -1.0, t_point = 0.0, beta = -1.0, alpha = 2.0;
  double eps_min = 1e-5, eps_max = 1e-2;
  int lp_n = 100, points = 8;
  bool with_lp = false, menu = false, auto_beta = false;

  CLI::App* det = app.add_subcommand(
      "det-opt", "Best deterministic floor pair for a given slack");
  det->add_option("--dist", dist_path, "distribution JSON")->required();
  det->add_option("--eps", eps, "truthfulness slack")->required();
  det->callback([&]() { rc = run_det_opt(dist_path, eps); });

  CLI::App* delayed = app.add_subcommand(
      "delayed", "Randomized price-perturbation mechanism");
  delayed->require_subcommand(1);
  CLI::App* dbuild = delayed->add_subcommand(
      "build", "Construct, verify, and price the mechanism");
  dbuild->add_option("--dist", dist_path, "distribution JSON")->required();
  dbuild->add_option("--eps", eps, "truthfulness slack")->required();
  dbuild->add_option("--mu", mu,
                     "shading width (omit to search the admissible ladder)");
  dbuild->callback([&]() { rc = run_delayed_build(dist_path, eps, mu); });

  CLI::App* gamma = app.add_subcommand(
      "gamma", "Unit-lag decay profile and its renewal oracle");
  CLI::Option* topt = gamma->add_option("--t", t_point, "evaluation point");
  CLI::App* selftest = gamma->add_subcommand(
      "selftest", "exactness, analytic bounds, and Monte Carlo agreement");
  selftest->callback([&]() { rc = run_gamma_selftest(); });
  gamma->callback([&]() {
    if (gamma->get_subcommands().empty()) {
      if (topt->count() == 0) {
        std::cerr << "gamma: need --t or the selftest subcommand\n";
        rc = 1;
      } else {
        rc = run_gamma_point(t_point);
      }
    }
  });

  CLI::App* dual = app.add_subcommand(
      "dual", "Path-based upper-bound certificate on the optimal revenue");
  dual->add_option("--dist", dist_path, "distribution JSON")->required();
  dual->add_option("--eps", eps, "truthfulness slack")->required();
  CLI::Option* bopt = dual->add_option("--beta", beta, "path shape exponent");
  CLI::Option* aopt =
      dual->add_flag("--auto-beta", auto_beta, "scan for the tightest shape");
  bopt->excludes(aopt);
  dual->callback([&]() {
    if (bopt->count() == 0 && !auto_beta) auto_beta = true;
    rc = run_dual(dist_path, eps, beta, auto_beta);
  });

  CLI::App* lp = app.add_subcommand(
      "lp", "Exact optimum of the value-grid relaxation");
  lp->add_option("--dist", dist_path, "distribution JSON")->required();
  lp->add_option("--eps", eps, "truthfulness slack")->required();
  lp->add_option("--n", lp_n, "grid cells")->required();
  lp->add_flag("--menu", menu, "also print the optimal (x, t) menu");
  lp->callback([&]() { rc = run_lp(dist_path, eps, lp_n, menu); });

  CLI::App* scaling = app.add_subcommand(
      "scaling", "Gain-versus-slack sweep with slope fits and plot data");
  scaling->add_option("--dist", dist_path, "distribution JSON")->required();
  scaling->add_option("--alpha", alpha, "declared envelope exponent")
      ->required();
  scaling->add_option("--eps-min", eps_min, "smallest slack");
  scaling->add_option("--eps-max", eps_max, "largest slack");
  scaling->add_option("--points", points, "grid size (>= 5)");
  scaling->add_flag("--with-lp", with_lp, "also solve the grid relaxation");
  scaling->add_option("--n", lp_n, "grid cells for --with-lp");
  scaling->add_option("--out", out_dir, "output directory")->required();
  scaling->callback([&]() {
    rc = run_scaling(dist_path, alpha, eps_min, eps_max, points, with_lp,
                     lp_n, out_dir);
  });

  CLI::App* ver = app.add_subcommand(
      "verify", "Check participation and eps-truthfulness of a mechanism");
  ver->add_option("--mech", mech_path, "mechanism JSON")->required();
  ver->add_option("--dist", dist_path, "distribution JSON")->required();
  ver->add_option("--eps", eps, "truthfulness slack")->required();
  ver->callback([&]() { rc = run_verify(mech_path, dist_path, eps); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
