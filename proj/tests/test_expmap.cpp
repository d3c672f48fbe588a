#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/exp_map.hpp"
#include "nhgeo/core/systems.hpp"

using namespace nhgeo;

TEST_SUITE("expmap") {

TEST_CASE("endpoint map hits the closed-form oracle on both systems") {
  {
    const ExpMapPatch patch = particle_system().make_patch();
    const Eigen::Vector2d w(0.7, 0.9);
    const ChartPoint p = patch.exp(w);
    const Eigen::Vector3d oracle = particle_exp_closed(w[0], w[1]);
    CHECK((p.coords - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
  {
    const ExpMapPatch patch = disk_system().make_patch();
    const Eigen::Vector2d w(0.8, 1.3);
    const ChartPoint p = patch.exp(w);
    const Eigen::Vector4d oracle = disk_exp_closed(w[0], w[1]);
    CHECK((p.coords - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("zero fiber vector returns the base point without integrating") {
  const ExpMapPatch patch = particle_system().make_patch();
  const ChartPoint p = patch.exp(Eigen::Vector2d(0.0, 0.0));
  CHECK((p.coords - patch.chart().base.coords).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("radial rescaling holds along sampled rays") {
  const ExpMapPatch particle = particle_system().make_patch();
  CHECK(particle.rescaling_residual(Eigen::Vector2d(0.6, -0.8)) < 1e-8);
  const ExpMapPatch disk = disk_system().make_patch();
  CHECK(disk.rescaling_residual(Eigen::Vector2d(-0.5, 1.1)) < 1e-8);
}

TEST_CASE("fiber differential at zero restores the chart basis") {
  for (const SystemEntry& e : {particle_system(), disk_system(2.0, 0.5)}) {
    const ExpMapPatch patch = e.make_patch();
    const Eigen::MatrixXd J = patch.jacobian(Eigen::Vector2d(0.0, 0.0));
    CHECK((J - e.chart.basis).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("fiber differential contracts to the trajectory's final velocity") {
  // exp(s w) traverses the single ray trajectory, so d/ds exp(s w) at s = 1
  // equals the endpoint velocity: J(w) w = c_w'(1).
  const ExpMapPatch patch = particle_system().make_patch();
  const Eigen::Vector2d w(0.5, 0.7);
  const Eigen::MatrixXd J = patch.jacobian(w);
  const Trajectory traj = patch.trajectory(w);
  CHECK((J * w - traj.back().v).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("inversion round-trips the endpoint map") {
  const ExpMapPatch patch = particle_system().make_patch();
  const Eigen::Vector2d w(0.7, -0.4);
  const ChartPoint target = patch.exp(w);

  const ExpInverseResult res = patch.inverse(target);
  CHECK((res.w - w).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(res.selected_residual <= 1e-10);
  CHECK(res.full_residual < 1e-8); // target really lies on the chart image

  // Explicit selection and warm start behave identically.
  const ExpInverseResult res2 = patch.inverse(target, {0, 1}, 1e-10, 50, Eigen::Vector2d(0.6, -0.3));
  CHECK((res2.w - w).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("inversion flags points off the chart image") {
  // A target whose selected coordinates are reachable but whose remaining
  // coordinate is not: the full residual witnesses the mismatch.
  const ExpMapPatch patch = particle_system().make_patch();
  const Eigen::Vector2d w(0.5, 0.5);
  Eigen::VectorXd off = patch.exp(w).coords;
  off[2] += 0.25; // perturb the unselected coordinate
  const ExpInverseResult res = patch.inverse(ChartPoint(off));
  CHECK((res.w - w).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(res.full_residual > 0.2);
}

TEST_CASE("domain and argument validation") {
  const SystemEntry e = particle_system();
  const ExpMapPatch patch = e.make_patch();
  CHECK_THROWS_AS(patch.exp(Eigen::Vector2d(1.5, 0.0)), DomainError);
  CHECK_THROWS_AS(patch.exp(Eigen::Vector3d(0.1, 0.1, 0.1)), InvalidArgument);
  CHECK_THROWS_AS(patch.rescaling_residual(Eigen::Vector2d(0.1, 0.1), 1), InvalidArgument);

  ExpMapPatch copy = e.make_patch();
  CHECK_THROWS_AS(copy.set_default_selection({0}), InvalidArgument);
  CHECK_THROWS_AS(copy.set_default_selection({0, 0}), InvalidArgument);
  CHECK_THROWS_AS(copy.set_default_selection({0, 5}), InvalidArgument);

  // Basis violating the constraint at the base is rejected at construction.
  TangentChart bad = e.chart;
  bad.basis(2, 0) = 1.0; // add a d_z component: A (1,0,1) = 1
  CHECK_THROWS_AS(ExpMapPatch(e.system, bad, e.domain), InvalidArgument);

  PatchOptions zero_steps;
  zero_steps.steps = 0;
  CHECK_THROWS_AS(ExpMapPatch(e.system, e.chart, e.domain, zero_steps), InvalidArgument);
}

TEST_CASE("patch radius override keeps the domain family") {
  const SystemEntry e = disk_system();
  const ExpMapPatch patch = e.make_patch(0.5);
  CHECK(patch.domain().bounding_radius() == doctest::Approx(0.5));
  CHECK(patch.domain().kind() == DomainSpec::Kind::Cube);
  CHECK(patch.default_selection() == std::vector<int>{0, 3});
}

} // TEST_SUITE
