#include "nhgeo/core/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/geometry.hpp"

namespace nhgeo {

Eigen::VectorXd nh_acceleration(const NonholonomicSystem& sys, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& v, double fd_step) {
  const int n = sys.dim();
  const int m = sys.A.corank;

  // -Gamma(q)(v, v), skipped entirely for constant metrics
  Eigen::VectorXd gv = Eigen::VectorXd::Zero(n);
  if (!sys.g.constant) {
    Christoffel gamma = christoffel_at(sys.g, ChartPoint(q), fd_step);
    gv = gamma.contract(v, v);
  }

  Eigen::MatrixXd Aq = detail::constraint_raw(sys.A, q);
  std::vector<Eigen::MatrixXd> dA = detail::constraint_partials(sys.A, q, fd_step);

  // (dA . v) v : derivative of A along the motion applied to v
  Eigen::MatrixXd Adot = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < n; ++i) Adot += v[i] * dA[i];

  Eigen::MatrixXd gm = detail::metric_sym(sys.g, q);
  Eigen::FullPivLU<Eigen::MatrixXd> gl(gm);
  if (!gl.isInvertible()) throw NumericalError("nh_acceleration: metric singular");
  Eigen::MatrixXd X = gl.solve(Aq.transpose()); // g^-1 A^T

  // lambda solves (A g^-1 A^T) lambda = A Gamma(v,v) - (dA.v) v
  Eigen::MatrixXd S = Aq * X;
  Eigen::FullPivLU<Eigen::MatrixXd> sl(S);
  if (!sl.isInvertible()) throw NumericalError("nh_acceleration: A g^-1 A^T singular");
  Eigen::VectorXd lambda = sl.solve(Aq * gv - Adot * v);

  return -gv + X * lambda;
}

TangentVector nh_acceleration_at(const NonholonomicSystem& sys, const ChartPoint& q,
                                 const Eigen::VectorXd& v, VelocityPolicy policy,
                                 double d_tolerance) {
  if (q.dim() != sys.dim()) throw InvalidArgument("nh_acceleration_at: point dimension mismatch");
  if (v.size() != sys.dim())
    throw InvalidArgument("nh_acceleration_at: velocity dimension mismatch");
  ensure_finite(v, "nh_acceleration_at: velocity");

  Eigen::MatrixXd Aq = constraint_at(sys.A, q);
  Eigen::VectorXd vv = v;
  const double res = (Aq * v).lpNorm<Eigen::Infinity>();
  if (policy == VelocityPolicy::Strict) {
    if (res > d_tolerance)
      throw InvalidArgument("nh_acceleration_at: velocity violates the constraint (|Av| = " +
                            std::to_string(res) + ")");
  } else {
    vv = orthogonal_projector_at(sys.g, sys.A, q) * v;
  }
  return TangentVector(q, nh_acceleration(sys, q.coords, vv, 0.0));
}

namespace {

struct Rk4Stepper {
  const NonholonomicSystem& sys;
  double fd_step;
  Eigen::VectorXd cq, cv;

  // Kahan-compensated accumulation: carrying the rounding remainder of each
  // state update into the next one keeps the accumulated roundoff at a few
  // ulps regardless of step count, so fourth-order truncation stays visible
  // at fine resolutions. The grouping must not be reassociated.
  static void accumulate(Eigen::VectorXd& x, const Eigen::VectorXd& dx, Eigen::VectorXd& comp) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = dx[i] - comp[i];
      const double t = x[i] + y;
      comp[i] = (t - x[i]) - y;
      x[i] = t;
    }
  }

  void step(Eigen::VectorXd& q, Eigen::VectorXd& v, double h) {
    if (cq.size() != q.size()) {
      cq = Eigen::VectorXd::Zero(q.size());
      cv = Eigen::VectorXd::Zero(v.size());
    }
    const Eigen::VectorXd k1q = v;
    const Eigen::VectorXd k1v = nh_acceleration(sys, q, v, fd_step);
    const Eigen::VectorXd k2q = v + 0.5 * h * k1v;
    const Eigen::VectorXd k2v = nh_acceleration(sys, q + 0.5 * h * k1q, k2q, fd_step);
    const Eigen::VectorXd k3q = v + 0.5 * h * k2v;
    const Eigen::VectorXd k3v = nh_acceleration(sys, q + 0.5 * h * k2q, k3q, fd_step);
    const Eigen::VectorXd k4q = v + h * k3v;
    const Eigen::VectorXd k4v = nh_acceleration(sys, q + h * k3q, k4q, fd_step);
    accumulate(q, (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q), cq);
    accumulate(v, (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v), cv);
  }
};

Eigen::VectorXd gate_velocity(const NonholonomicSystem& sys, const ChartPoint& q0,
                              const Eigen::VectorXd& v0, VelocityPolicy policy,
                              double d_tolerance) {
  Eigen::MatrixXd Aq = constraint_at(sys.A, q0);
  const double res = (Aq * v0).lpNorm<Eigen::Infinity>();
  if (policy == VelocityPolicy::Strict) {
    if (res > d_tolerance)
      throw InvalidArgument("integrate: initial velocity violates the constraint (|Av| = " +
                            std::to_string(res) + ")");
    return v0;
  }
  return orthogonal_projector_at(sys.g, sys.A, q0) * v0;
}

TrajectorySample make_sample(const NonholonomicSystem& sys, double t, const Eigen::VectorXd& q,
                             const Eigen::VectorXd& v) {
  TrajectorySample s;
  s.t = t;
  s.q = q;
  s.v = v;
  Eigen::MatrixXd gm = detail::metric_sym(sys.g, q);
  const double q2 = v.dot(gm * v);
  s.speed = q2 > 0 ? std::sqrt(q2) : 0.0;
  s.constraint_residual = (detail::constraint_raw(sys.A, q) * v).lpNorm<Eigen::Infinity>();
  return s;
}

} // namespace

Trajectory integrate_nh_geodesic(const NonholonomicSystem& sys, const ChartPoint& q0,
                                 const Eigen::VectorXd& v0, double T,
                                 const IntegrateOptions& opts) {
  if (q0.dim() != sys.dim()) throw InvalidArgument("integrate: point dimension mismatch");
  if (v0.size() != sys.dim()) throw InvalidArgument("integrate: velocity dimension mismatch");
  ensure_finite(v0, "integrate: velocity");
  if (!std::isfinite(T)) throw InvalidArgument("integrate: non-finite horizon");
  if (opts.steps <= 0) throw InvalidArgument("integrate: steps must be positive");

  Eigen::VectorXd v = gate_velocity(sys, q0, v0, opts.policy, opts.d_tolerance);
  Eigen::VectorXd q = q0.coords;

  Trajectory traj;
  traj.samples.reserve(opts.steps + 1);
  traj.samples.push_back(make_sample(sys, 0.0, q, v));

  Rk4Stepper stepper{sys, opts.fd_step, {}, {}};
  const double h = T / opts.steps;
  for (int i = 1; i <= opts.steps; ++i) {
    stepper.step(q, v, h);
    if (!q.allFinite() || !v.allFinite())
      throw NumericalError("integrate: state became non-finite at step " + std::to_string(i));
    if (opts.project_each_step)
      v = orthogonal_projector_at(sys.g, sys.A, ChartPoint(q)) * v;
    traj.samples.push_back(make_sample(sys, i * h, q, v));
  }

  const double s0 = traj.samples.front().speed;
  for (const auto& s : traj.samples) {
    traj.speed_drift = std::max(traj.speed_drift, std::abs(s.speed - s0));
    traj.max_constraint_residual = std::max(traj.max_constraint_residual, s.constraint_residual);
  }
  return traj;
}

namespace detail {

void integrate_nh_endpoint(const NonholonomicSystem& sys, const Eigen::VectorXd& q0,
                           const Eigen::VectorXd& v0, double T, int steps,
                           Eigen::VectorXd& q_out, Eigen::VectorXd& v_out) {
  if (steps <= 0) throw InvalidArgument("integrate: steps must be positive");
  Eigen::VectorXd q = q0, v = v0;
  Rk4Stepper stepper{sys, 0.0, {}, {}};
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) stepper.step(q, v, h);
  if (!q.allFinite() || !v.allFinite())
    throw NumericalError("integrate: state became non-finite");
  q_out = q;
  v_out = v;
}

} // namespace detail

TrajectoryDiagnostics trajectory_diagnostics(const NonholonomicSystem& sys,
                                             const Trajectory& traj, double reparam_factor) {
  if (traj.size() < 2) throw InvalidArgument("trajectory_diagnostics: too few samples");
  TrajectoryDiagnostics d;
  const TrajectorySample& s0 = traj.front();
  Eigen::MatrixXd g0 = detail::metric_sym(sys.g, s0.q);
  const double speed0 = std::sqrt(std::max(0.0, s0.v.dot(g0 * s0.v)));
  for (const auto& s : traj.samples) {
    Eigen::MatrixXd gm = detail::metric_sym(sys.g, s.q);
    const double sp = std::sqrt(std::max(0.0, s.v.dot(gm * s.v)));
    d.speed_drift = std::max(d.speed_drift, std::abs(sp - speed0));
    const double cr = (detail::constraint_raw(sys.A, s.q) * s.v).lpNorm<Eigen::Infinity>();
    d.max_constraint_residual = std::max(d.max_constraint_residual, cr);
  }
  const double T = traj.back().t - s0.t;
  if (!(reparam_factor > 0)) throw InvalidArgument("trajectory_diagnostics: bad reparam factor");
  d.reparam_residual = homothety_residual(sys, ChartPoint(s0.q), s0.v, reparam_factor,
                                          T / reparam_factor, traj.size() - 1);
  return d;
}

double homothety_residual(const NonholonomicSystem& sys, const ChartPoint& q0,
                          const Eigen::VectorXd& v0, double a, double T, int steps) {
  if (!(std::isfinite(a)) || a == 0.0) throw InvalidArgument("homothety_residual: bad factor");
  IntegrateOptions opts;
  opts.steps = steps;
  // c_{a v}(t) on [0, T] vs c_v(a t): sample i of the first lies at a * t_i
  Trajectory fast = integrate_nh_geodesic(sys, q0, a * v0, T, opts);
  Trajectory slow = integrate_nh_geodesic(sys, q0, v0, a * T, opts);
  double r = 0.0;
  for (int i = 0; i <= steps; ++i)
    r = std::max(r, (fast.samples[i].q - slow.samples[i].q).lpNorm<Eigen::Infinity>());
  return r;
}

} // namespace nhgeo
