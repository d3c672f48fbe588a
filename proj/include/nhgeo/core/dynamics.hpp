#pragma once

#include <Eigen/Dense>

#include "nhgeo/core/chart.hpp"
#include "nhgeo/core/system.hpp"
#include "nhgeo/core/trajectory.hpp"

namespace nhgeo {

enum class VelocityPolicy {
  Strict, // reject v0 with |A(q0) v0|_inf above tolerance
  Project // replace v0 by P(q0) v0
};

struct IntegrateOptions {
  int steps = 1000;
  VelocityPolicy policy = VelocityPolicy::Strict;
  double d_tolerance = 1e-10; // admissibility gate for v0
  bool project_each_step = false;
  double fd_step = 0.0; // finite-difference step for field partials (0 = hints)
};

// Constrained geodesic acceleration at (q, v):
//   a = -Gamma(q)(v,v) + g^-1 A^T lambda,
//   lambda = (A g^-1 A^T)^-1 (A Gamma(q)(v,v) - (dA . v) v),
// the unique multiplier that keeps d/dt (A(q) v) = 0. Pure evaluation: no
// admissibility check, so integrator stages may call it freely.
Eigen::VectorXd nh_acceleration(const NonholonomicSystem& sys, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v, double fd_step = 0.0);

// Checked variant for direct use: validates shapes and applies the velocity
// policy before evaluating.
TangentVector nh_acceleration_at(const NonholonomicSystem& sys, const ChartPoint& q,
                                 const Eigen::VectorXd& v,
                                 VelocityPolicy policy = VelocityPolicy::Strict,
                                 double d_tolerance = 1e-10);

// Classical fixed-step RK4 on (q, v). Samples are stored at every step with
// g-speed and constraint residual; aggregate diagnostics are filled in.
Trajectory integrate_nh_geodesic(const NonholonomicSystem& sys, const ChartPoint& q0,
                                 const Eigen::VectorXd& v0, double T,
                                 const IntegrateOptions& opts = {});

namespace detail {
// Endpoint-only integration (no sample storage) for inner loops.
void integrate_nh_endpoint(const NonholonomicSystem& sys, const Eigen::VectorXd& q0,
                           const Eigen::VectorXd& v0, double T, int steps,
                           Eigen::VectorXd& q_out, Eigen::VectorXd& v_out);
} // namespace detail

struct TrajectoryDiagnostics {
  double speed_drift = 0.0;
  double max_constraint_residual = 0.0;
  double reparam_residual = 0.0;
};

// Recomputes the conservation diagnostics of a stored trajectory and checks
// the homothety property c_{a v}(t) = c_v(a t) against a re-integration with
// scaled initial velocity.
TrajectoryDiagnostics trajectory_diagnostics(const NonholonomicSystem& sys,
                                             const Trajectory& traj,
                                             double reparam_factor = 2.0);

// Sup-norm of c_{a v0}(t) - c_v0(a t) over a shared sample grid, t in [0, T].
double homothety_residual(const NonholonomicSystem& sys, const ChartPoint& q0,
                          const Eigen::VectorXd& v0, double a, double T, int steps);

} // namespace nhgeo
