#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nhgeo/core/chart.hpp"
#include "nhgeo/core/domain.hpp"
#include "nhgeo/core/metric_field.hpp"
#include "nhgeo/core/trajectory.hpp"

namespace nhgeo {

struct GeodesicOptions {
  int steps = 400;
  double fd_step = 0.0; // Christoffel partial step (0 = field hint)
};

// RK4 integration of the geodesic equation dq'' = -Gamma(q)(q',q').
Trajectory integrate_geodesic(const MetricField& g, const ChartPoint& q0,
                              const Eigen::VectorXd& v0, double T,
                              const GeodesicOptions& opts = {});

// Time-1 endpoint of the geodesic with initial velocity v.
Eigen::VectorXd riemannian_exp(const MetricField& g, const ChartPoint& base,
                               const Eigen::VectorXd& v, const GeodesicOptions& opts = {});

struct RadialFunctionOptions {
  GeodesicOptions geodesic;
  double tol = 1e-10;
  int max_iter = 50;
};

// r(p) = |exp_base^-1(p)|_{g(base)}, inverting the exponential by damped
// Newton with a finite-difference Jacobian.
double standard_radial_function(const MetricField& g, const ChartPoint& base,
                                const ChartPoint& p, const RadialFunctionOptions& opts = {});

// Piecewise-linear curve through chart points.
struct DiscreteCurve {
  std::vector<Eigen::VectorXd> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
};

using MetricEvalFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Midpoint-rule length: sum_i |q_{i+1} - q_i|_{g((q_i + q_{i+1})/2)}.
double curve_length(const MetricEvalFn& g, const DiscreteCurve& curve);

enum class MinimizeStatus { Converged, MaxIterations, Stalled };

struct MinimizeOptions {
  int max_iters = 5000;
  double gtol = 1e-6;      // sup-norm of the interior-node gradient
  bool energy = false;     // minimize sum |dq|^2 instead of length
  double grad_step = 0.0;  // FD step for the gradient (0 = profile default)
  bool renormalize = true; // equalize node spacing after descent (length mode)
  const DomainSpec* domain = nullptr; // optional guard for trial nodes
};

struct MinimizeIterate {
  double objective = 0.0;
  double grad_norm = 0.0;
};

struct MinimizeResult {
  DiscreteCurve curve;
  MinimizeStatus status = MinimizeStatus::Converged;
  int iterations = 0;
  double initial_length = 0.0;
  double final_length = 0.0;
  std::vector<MinimizeIterate> trace;
};

// Gradient descent (Barzilai-Borwein step with Armijo backtracking) over the
// interior nodes with fixed endpoints. Every accepted iterate decreases the
// objective; the returned curve never exceeds the initial length.
MinimizeResult minimize_length(const MetricEvalFn& g, const DiscreteCurve& init,
                               const MinimizeOptions& opts = {});

// |g(exp(v))(J v, J w) - g(base)(v, w)| with J the fiber Jacobian of the
// exponential at v: radial/angular inner products are preserved.
double gauss_lemma_residual(const MetricField& g, const ChartPoint& base,
                            const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                            double fd_step = 1e-5, const GeodesicOptions& opts = {});

// max_t |Gamma(t w)(w, w)|_inf over a uniform grid in [0,1]: the geodesic
// defect of the straight line through the origin.
double line_geodesic_residual(const MetricField& g, const Eigen::VectorXd& w,
                              int grid_points = 21, double fd_step = 0.0);

// Supremum over nodes of the Euclidean distance to the segment [a, b].
double sup_distance_to_segment(const DiscreteCurve& curve, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b);

// Straight-line curve from a to b with `nodes` nodes plus a perpendicular
// sinusoidal bump; seed != 0 adds a reproducible random perturbation.
DiscreteCurve perturbed_segment(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                int nodes, double bump, unsigned seed = 0);

} // namespace nhgeo
