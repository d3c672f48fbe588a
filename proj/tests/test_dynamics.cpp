#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/dynamics.hpp"
#include "nhgeo/core/systems.hpp"

using namespace nhgeo;

TEST_SUITE("dynamics") {

TEST_CASE("strict policy rejects inadmissible velocities, projection repairs them") {
  const SystemEntry e = particle_system();
  const ChartPoint q0(Eigen::Vector3d(0.0, 1.0, 0.0)); // constraint row (-1, 0, 1)
  const Eigen::Vector3d bad(1.0, 0.0, 0.0);            // A v = -1

  CHECK_THROWS_AS(nh_acceleration_at(e.system, q0, bad), InvalidArgument);
  IntegrateOptions strict;
  CHECK_THROWS_AS(integrate_nh_geodesic(e.system, q0, bad, 1.0, strict), InvalidArgument);

  IntegrateOptions project;
  project.policy = VelocityPolicy::Project;
  project.steps = 200;
  const Trajectory traj = integrate_nh_geodesic(e.system, q0, bad, 1.0, project);
  CHECK(traj.front().constraint_residual < 1e-12);
  CHECK(traj.max_constraint_residual < 1e-9);
}

TEST_CASE("constrained acceleration: hand value at the particle base") {
  // At the base with v = (1, 1, 0): the reaction force must supply the full
  // acceleration (0, 0, 1) so that d/dt (z' - y x') stays zero.
  const SystemEntry e = particle_system();
  const TangentVector a = nh_acceleration_at(e.system, e.base, Eigen::Vector3d(1.0, 1.0, 0.0));
  CHECK(std::abs(a.comps[0]) < 1e-10);
  CHECK(std::abs(a.comps[1]) < 1e-10);
  CHECK(a.comps[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("acceleration keeps the constraint derivative zero along solutions") {
  // d/dt (A v) = (dA . v) v + A a must vanish for the chosen multiplier.
  for (const SystemEntry& e : {particle_system(), disk_system(2.0, 0.5)}) {
    const int n = e.system.dim();
    Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(n, 0.2, 0.8);
    // Build an admissible velocity from the kernel at q.
    Eigen::MatrixXd A = e.system.A.eval(q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    Eigen::MatrixXd K = lu.kernel();
    Eigen::VectorXd v = K * Eigen::VectorXd::LinSpaced(K.cols(), 1.0, 0.5);

    const Eigen::VectorXd a = nh_acceleration(e.system, q, v);
    const double h = 1e-6;
    Eigen::MatrixXd dAv = Eigen::MatrixXd::Zero(A.rows(), n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      dAv += ((e.system.A.eval(qp) - e.system.A.eval(qm)) / (2.0 * h)) * v[i];
    }
    const Eigen::VectorXd ddt = dAv * v + A * a;
    CHECK(ddt.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("trajectory sampling: structure and conservation diagnostics") {
  const SystemEntry e = disk_system();
  const Eigen::VectorXd v0 = e.chart.basis * Eigen::Vector2d(0.8, 1.3);
  IntegrateOptions opts;
  opts.steps = 500;
  const Trajectory traj = integrate_nh_geodesic(e.system, e.base, v0, 1.0, opts);

  CHECK(traj.size() == 501);
  CHECK(traj.front().t == 0.0);
  CHECK(traj.back().t == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((traj.front().q - e.base.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((traj.front().v - v0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.speed_drift < 1e-8);
  CHECK(traj.max_constraint_residual < 1e-9);

  const TrajectoryDiagnostics diag = trajectory_diagnostics(e.system, traj);
  CHECK(diag.speed_drift == doctest::Approx(traj.speed_drift).epsilon(1e-12));
  CHECK(diag.max_constraint_residual ==
        doctest::Approx(traj.max_constraint_residual).epsilon(1e-12));
  CHECK(diag.reparam_residual < 1e-7);
}

TEST_CASE("velocity scaling reparametrizes trajectories") {
  const SystemEntry e = particle_system();
  const Eigen::VectorXd v0 = e.chart.basis * Eigen::Vector2d(0.9, 0.7);
  for (double a : {0.5, 2.0, 3.0}) {
    const double r = homothety_residual(e.system, e.base, v0, a, 0.5, 400);
    CHECK(r < 1e-7);
  }
}

TEST_CASE("integrator endpoint converges at fourth order") {
  const SystemEntry e = particle_system();
  const Eigen::Vector3d v0(1.0, 1.0, 0.0);
  const Eigen::Vector3d exact = particle_exp_closed(1.0, 1.0);

  auto endpoint_err = [&](int steps) {
    Eigen::VectorXd q, v;
    detail::integrate_nh_endpoint(e.system, e.base.coords, v0, 1.0, steps, q, v);
    return (q - exact).cwiseAbs().maxCoeff();
  };
  const double e500 = endpoint_err(500);
  const double e1000 = endpoint_err(1000);
  CHECK(e1000 < 1e-7);
  // Halving the step divides the error by ~16.
  const double ratio = e500 / e1000;
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("integration argument validation") {
  const SystemEntry e = particle_system();
  IntegrateOptions opts;
  opts.steps = 0;
  CHECK_THROWS_AS(
      integrate_nh_geodesic(e.system, e.base, Eigen::Vector3d(1, 0, 0), 1.0, opts),
      InvalidArgument);
  CHECK_THROWS_AS(nh_acceleration_at(e.system, e.base, Eigen::Vector2d(1, 0)), InvalidArgument);
}

} // TEST_SUITE
