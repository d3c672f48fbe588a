#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/metrics_catalog.hpp"
#include "nhgeo/core/systems.hpp"
#include "nhgeo/core/verify.hpp"

using namespace nhgeo;

namespace {

VerifyOptions cheap_options() {
  VerifyOptions opts;
  opts.equivalence.grid_per_axis = 5;
  opts.equivalence.line_count = 4;
  opts.equivalence.geodesic_steps = 30;
  opts.run_exp_grid = false;
  opts.run_minimize = false;
  return opts;
}

} // namespace

TEST_SUITE("verify") {

TEST_CASE("three-way equivalence: compatible and incompatible metrics agree with themselves") {
  EquivalenceOptions opts;
  opts.grid_per_axis = 7;
  opts.line_count = 4;
  opts.geodesic_steps = 40;

  const EquivalenceReport good = check_key_equivalence(make_metric("flat"), opts);
  CHECK(good.checks.size() == 3);
  CHECK(good.all_pass());
  CHECK(good.consistent());
  CHECK(good.checks[0].name == "gauss");
  CHECK(good.checks[1].name == "lines");
  CHECK(good.checks[2].name == "exp");

  const EquivalenceReport bad =
      check_key_equivalence(make_metric("pullback-ambient:particle"), opts);
  CHECK(bad.all_fail());
  CHECK(bad.consistent());
  for (const auto& c : bad.checks) CHECK(c.max_residual > c.tolerance);
}

TEST_CASE("equivalence is interrupted by loss of positive-definiteness") {
  // Stretching the pullback domain past the degeneracy radius makes the
  // sweep hit an indefinite node, which is an error, not a verdict.
  const VectorMetric G = make_metric("pullback-gmod", {{"radius", 2.5}});
  CHECK_THROWS_AS(check_key_equivalence(G), NumericalError);
}

TEST_CASE("fiber gram metrics carry the kinetic inner products") {
  {
    const ExpMapPatch patch = particle_system().make_patch();
    const VectorMetric G = fiber_gram_metric(patch);
    CHECK((G(Eigen::Vector2d(0.3, 0.3)) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() ==
          0.0);
  }
  {
    const ExpMapPatch patch = disk_system(2.0, 0.5).make_patch();
    const VectorMetric G = fiber_gram_metric(patch);
    Eigen::Matrix2d expected;
    expected << 3.0, 0.0, 0.0, 0.5; // diag(1 + I, J)
    CHECK((G(Eigen::Vector2d(0, 0)) - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(G.has_partials());
  }
}

TEST_CASE("induced chart metric matches the closed components") {
  const SystemEntry e = particle_system();
  const ExpMapPatch patch = e.make_patch();
  const VectorMetric gram = fiber_gram_metric(patch);
  const VectorMetric induced = induced_submanifold_metric(patch, gram);
  CHECK(induced.has_partials());
  CHECK(induced.profile() == FdProfile::Numeric);

  for (const Eigen::Vector2d& s : {Eigen::Vector2d(0.5, 0.8), Eigen::Vector2d(-0.4, -0.6),
                                   Eigen::Vector2d(0.2, 0.95)}) {
    const Eigen::MatrixXd g = induced(s);
    const Metric2 closed = particle_chart_metric_closed(s[0], s[1]);
    CHECK(std::abs(g(0, 0) - closed.E) < 1e-8);
    CHECK(std::abs(g(0, 1) - closed.F) < 1e-8);
    CHECK(std::abs(g(1, 1) - closed.G) < 1e-8);
  }
}

TEST_CASE("induced chart metric: assembled partials match finite differences") {
  const SystemEntry e = particle_system();
  const ExpMapPatch patch = e.make_patch();
  const VectorMetric induced = induced_submanifold_metric(patch, fiber_gram_metric(patch));

  const Eigen::Vector2d s(0.35, 0.6);
  const std::vector<Eigen::MatrixXd> dg = induced.partials_at(s, 0.0);
  REQUIRE(dg.size() == 2);
  const double h = 1e-4;
  for (int a = 0; a < 2; ++a) {
    Eigen::Vector2d sp = s, sm = s;
    sp[a] += h;
    sm[a] -= h;
    const Eigen::MatrixXd fd = (induced(sp) - induced(sm)) / (2.0 * h);
    CHECK((dg[a] - fd).cwiseAbs().maxCoeff() < 5e-6);
  }
}

TEST_CASE("induced metric interface validation") {
  const ExpMapPatch patch = particle_system().make_patch();
  CHECK_THROWS_AS(induced_submanifold_metric(patch, make_metric("flat:3")), InvalidArgument);
  InducedMetricOptions opts;
  opts.selection = {0};
  CHECK_THROWS_AS(induced_submanifold_metric(patch, make_metric("flat"), opts), InvalidArgument);
}

TEST_CASE("verification pipeline: compatible pair passes as expected") {
  const VerifyReport rep = verify_theorem(particle_system(), "flat", {}, cheap_options());
  CHECK(rep.system_id == "particle");
  CHECK(rep.metric_expected_pass);
  CHECK(rep.equivalence_consistent);
  CHECK(rep.overall_pass);
  CHECK(rep.as_expected);

  REQUIRE(rep.stages.size() == 6);
  CHECK(rep.stages[0].name == "differential-at-zero");
  CHECK(rep.stages[1].name == "radial-rescaling");
  CHECK(rep.stages[2].name == "metric-build");
  CHECK(rep.stages[3].name == "radial-equivalence");
  CHECK(rep.stages[4].name == "exp-map-match");
  CHECK(rep.stages[5].name == "length-minimization");
  for (int i = 0; i < 4; ++i) CHECK(rep.stages[i].status == "pass");
  CHECK(rep.stages[4].status == "skipped"); // disabled by the cheap options
  CHECK(rep.stages[5].status == "skipped");

  const nlohmann::json j = rep.to_json();
  CHECK(j["system"] == "particle");
  CHECK(j["metric"] == "flat");
  CHECK(j["overall_pass"] == true);
  CHECK(j["as_expected"] == true);
  CHECK(j["stages"].size() == 6);
  CHECK(j["stages"][0]["status"] == "pass");
}

TEST_CASE("verification pipeline: incompatible pair fails as expected") {
  const VerifyReport rep =
      verify_theorem(particle_system(), "pullback-ambient", {}, cheap_options());
  CHECK(!rep.metric_expected_pass);
  CHECK(rep.equivalence_consistent);
  CHECK(!rep.overall_pass); // the radial-equivalence stage fails
  CHECK(rep.as_expected);   // ...which is exactly what the registry predicts
  CHECK(rep.stages[3].status == "fail");
  CHECK(rep.stages[4].status == "skipped");
  CHECK(rep.stages[5].status == "skipped");
}

TEST_CASE("verification pipeline: bad metric spec fails the build stage") {
  const VerifyReport rep = verify_theorem(particle_system(), "warp-drive", {}, cheap_options());
  CHECK(!rep.overall_pass);
  CHECK(!rep.as_expected);
  CHECK(rep.stages[2].name == "metric-build");
  CHECK(rep.stages[2].status == "fail");
  CHECK(rep.stages[3].status == "skipped");
}

TEST_CASE("verification pipeline: full run on the flat pair stays cheap") {
  // Smallest full pipeline: one ray for the endpoint comparison, a coarse
  // minimization, shrunk equivalence grids.
  VerifyOptions opts = cheap_options();
  opts.run_exp_grid = true;
  opts.run_minimize = true;
  opts.exp_grid_rays = 2;
  opts.exp_steps = 12;
  opts.pushforward_steps = 150;
  opts.minimize_nodes = 9;
  opts.minimize_max_iters = 1500;

  const VerifyReport rep = verify_theorem(particle_system(), "flat", {}, opts);
  CHECK(rep.overall_pass);
  CHECK(rep.stages[4].status == "pass");
  CHECK(rep.stages[4].max_residual < rep.stages[4].tolerance);
  CHECK(rep.stages[5].status == "pass");
}

} // TEST_SUITE
