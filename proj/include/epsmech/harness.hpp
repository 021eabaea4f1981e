#pragma once
// Experiment orchestration: JSON round-trips for configs and results, the
// rate sweep that measures how the revenue gain of each approach scales with
// the truthfulness slack, log-log slope fits, and bit-stable CSV emission.

#include <string>
#include <vector>

#include "json.hpp"

#include "epsmech/deterministic.hpp"
#include "epsmech/distribution.hpp"
#include "epsmech/dual_bound.hpp"
#include "epsmech/mechanism.hpp"

namespace epsmech {

// --- serialization -------------------------------------------------------

// Distribution config document: {kind, v_bar, params...}; the envelope kind
// keeps (alpha, p_star, r_star, kappa), tabulated kinds keep their nodes.
nlohmann::json dist_to_json(const ValueDistribution& dist);
ValueDistribution dist_from_json(const nlohmann::json& j);
ValueDistribution load_distribution(const std::string& path);
void save_distribution(const ValueDistribution& dist,
                       const std::string& path);

// Mechanism document: {kind, v_bar, params, optional sampled grid}.  A
// grid_n > 0 adds a dense (v, x, t) sampling.  Rebuilding dispatches on
// kind: posted-price and hard/soft floors from their parameters, the
// randomized perturbed mechanism from its geometry, grid-backed kinds from
// their samples.
nlohmann::json mechanism_to_json(const Mechanism& mech, int grid_n = 0);
Mechanism mechanism_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const VerificationReport& rep);
nlohmann::json certificate_to_json(const PathCertificate& cert);

// --- scaling sweep -------------------------------------------------------

struct ScalingOptions {
  std::vector<double> eps_grid;  // ascending; empty = default_eps_grid()
  bool with_lp = false;
  int lp_n = 100;   // grid size when with_lp
  int workers = 0;  // 0 = EPSMECH_WORKERS env var, else hardware threads
};

// One eps point of the sweep.  A failed leg carries ok = false plus a note
// and is excluded from the slope fits; the sweep itself never aborts.
struct ScalingRow {
  double eps = 0.0;
  double det_gain = 0.0;
  double delayed_gain = 0.0;
  double dual_gain_bound = 0.0;
  double lp_gain = 0.0;
  bool det_ok = false;
  bool delayed_ok = false;
  bool dual_ok = false;
  bool lp_ok = false;
  std::string note;
};

struct SlopeFit {
  double det = 0.0;
  double delayed = 0.0;
  double dual = 0.0;
};

struct ScalingReport {
  double alpha = 0.0;
  double p_star = 0.0;
  double r_star = 0.0;
  bool with_lp = false;
  std::vector<ScalingRow> rows;       // ordered by ascending eps
  SlopeFit fitted_slopes;             // least squares on (log eps, log gain)
  double predicted_slope = 0.0;       // alpha / (2 alpha - 1)
};

// 8 log-spaced points spanning [1e-5, 1e-2].
std::vector<double> default_eps_grid();

// Ordinary least squares slope of log(y) against log(x) over the points
// with y > 0; needs at least two such points (domain_error otherwise).
double fit_loglog_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys);

// Runs the full sweep: per eps the best deterministic floor, the verified
// randomized construction, the dual certificate, and optionally the grid
// optimum.  Gains are measured against the distribution's cached revenue
// peak.  Points are dispatched to a worker pool and reassembled in eps
// order, so results do not depend on the worker count.  Requires >= 5 grid
// points and a distribution with a declared envelope or uniform shape.
ScalingReport run_scaling(const ValueDistribution& dist,
                          const ScalingOptions& opt);

// CSV with stable column order
//   eps,det,delayed,dual[,lp],ref_linear,ref_rate,ref_sqrt,status
// where ref_linear anchors C*eps at the first clean deterministic gain and
// ref_rate / ref_sqrt anchor C*eps^{alpha/(2alpha-1)} and C*sqrt(eps) at
// the first clean randomized gain.  Newline-terminated; reruns on the same
// report are byte-identical.  I/O failures carry the path in the message.
void emit_plotdata(const ScalingReport& rep, const std::string& path);

// Companion summary (slopes, parameters, per-row detail) as JSON.
void emit_summary(const ScalingReport& rep, const std::string& path);

nlohmann::json scaling_to_json(const ScalingReport& rep);

}  // namespace epsmech
