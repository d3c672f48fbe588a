#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "nhgeo/core/riemannian.hpp"
#include "nhgeo/core/systems.hpp"
#include "nhgeo/core/vector_metric.hpp"

namespace nhgeo {

// The three equivalent statements of radial compatibility for a metric G on a
// star-shaped neighborhood of 0:
//   (gauss)  G_0(w)(w, z) = G_0(0)(w, z) for all w, z
//   (lines)  t -> t w is a geodesic of G for every w
//   (exp)    the exponential of G at 0 is the identity
// Each check reports its max residual over a grid; the three verdicts must
// agree (that equivalence is itself asserted by the caller).
struct EquivalenceCheck {
  std::string name;
  bool pass = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  Eigen::VectorXd argmax;
};

struct EquivalenceReport {
  std::vector<EquivalenceCheck> checks; // gauss, lines, exp
  bool pd_ok = true;
  Eigen::VectorXd pd_failure_at;
  bool all_pass() const;
  bool all_fail() const;
  bool consistent() const { return all_pass() || all_fail(); }
};

struct EquivalenceOptions {
  int grid_per_axis = 9;      // gauss grid density per axis
  int line_count = 8;         // rays checked for the line/exp stages
  int geodesic_steps = 80;    // integrator resolution for lines/exp
  double margin = 0.05;       // domain shrink for all grids
  MetricTolerances tol;       // residual thresholds per check
};

EquivalenceReport check_key_equivalence(const VectorMetric& G, const EquivalenceOptions& opts = {});

// The metric carried onto the radial chart image: the pushforward of a fiber
// metric G through the chart, expressed in the selected coordinates s that
// parametrize the image. At s the chart is inverted for w, and
//   g(s) = J_sel(w)^{-T} G(w) J_sel(w)^{-1}
// with J_sel the selected rows of the chart differential, so the chart
// becomes an isometry (U, G) -> (image, g) by construction and the radial
// trajectories inherit geodesy exactly when G passes the radial checks.
struct InducedMetricOptions {
  std::vector<int> selection;  // coordinate rows used to invert (default: patch's)
  double newton_tol = 1e-12;
  int newton_max_iter = 60;
  // Step for the second-difference stencil of the endpoint map that supplies
  // the metric's analytic partials. Second differences want a coarser step
  // than first ones: truncation ~h^2 against roundoff ~eps/h^2.
  double stencil_step = 3e-4;
};

VectorMetric induced_submanifold_metric(const ExpMapPatch& patch, const VectorMetric& fiber,
                                        const InducedMetricOptions& opts = {});

// The constant fiber metric induced by the system's kinetic metric at the
// base point: the Gram matrix of the chart basis. This is the natural "flat"
// choice of fiber metric for a system's radial chart.
VectorMetric fiber_gram_metric(const ExpMapPatch& patch);

// Full verification pipeline for one system + metric pair. Stages:
//   (a) the chart differential at 0 restores the fiber basis, and radial
//       rescaling exp(s w) = c_w(s) holds along sampled rays;
//   (b) construct the requested metric;
//   (c) three-way equivalence of the radial compatibility statements;
//   (d) push the fiber metric onto the chart image and confirm that its
//       Riemannian exponential in induced coordinates reproduces the
//       constrained endpoint map on a velocity grid (only when (c) passes);
//   (e) a length minimization over perturbed curves recovers the radial
//       segment (only when (c) passes and the metric is positive definite).
struct StageResult {
  std::string name;
  std::string status; // "pass" | "fail" | "skipped"
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  EquivalenceOptions equivalence;
  int exp_grid_rays = 8;        // stage (d) velocity directions
  double exp_grid_radius = 0.0; // 0: auto (0.55 * domain radius, capped at 1)
  int exp_steps = 16;           // stage (d) geodesic resolution (pushforward metric)
  int pushforward_steps = 250;  // endpoint-map resolution inside the pushforward
  double exp_tolerance = 1e-6;
  int minimize_nodes = 15;      // stage (e) curve discretization
  double minimize_bump = 0.12;  // stage (e) perturbation amplitude
  int minimize_max_iters = 4000;
  double minimize_tolerance = 1e-3;
  unsigned minimize_seed = 7;
  bool run_minimize = true;
  bool run_exp_grid = true;
};

struct VerifyReport {
  std::string system_id;
  std::string metric_spec;
  bool metric_expected_pass = true;
  std::vector<StageResult> stages;
  bool equivalence_consistent = true;
  bool overall_pass = false;   // every non-skipped stage passed
  bool as_expected = false;    // outcome matches the registry expectation
  nlohmann::json to_json() const;
};

VerifyReport verify_theorem(const SystemEntry& entry, const std::string& metric_spec,
                            const std::map<std::string, double>& params = {},
                            const VerifyOptions& opts = {});

} // namespace nhgeo
