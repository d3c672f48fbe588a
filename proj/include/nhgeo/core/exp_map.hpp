#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nhgeo/core/chart.hpp"
#include "nhgeo/core/domain.hpp"
#include "nhgeo/core/dynamics.hpp"
#include "nhgeo/core/system.hpp"

namespace nhgeo {

// Linear coordinates on the constraint plane D_q: columns of `basis` span
// ker A(base), and a fiber vector w stands for the chart velocity basis * w.
struct TangentChart {
  ChartPoint base;
  Eigen::MatrixXd basis; // n x k
  std::vector<std::string> labels;

  int fiber_dim() const { return static_cast<int>(basis.cols()); }
};

struct PatchOptions {
  int steps = 1000;        // integration steps for exp/trajectory/rescaling
  int metric_steps = 400;  // cheaper step count for metric-building evaluations
  double jac_step = 1e-5;  // central-difference step for the fiber Jacobian
};

struct ExpInverseResult {
  Eigen::VectorXd w;
  double selected_residual = 0.0; // |selected(exp(w)) - selected(target)|_inf
  double full_residual = 0.0;     // |exp(w) - target|_inf, membership witness
  int iterations = 0;
};

// Exponential map of the constrained dynamics on a fiber domain around a
// base point: exp(w) is the time-1 endpoint of the trajectory with initial
// velocity basis * w. Time-rescaling of trajectories makes exp(t w) sweep
// the whole radial curve, which rescaling_residual checks directly.
class ExpMapPatch {
public:
  ExpMapPatch(NonholonomicSystem sys, TangentChart chart, DomainSpec domain,
              PatchOptions opts = {});

  const NonholonomicSystem& system() const { return sys_; }
  const TangentChart& chart() const { return chart_; }
  const DomainSpec& domain() const { return domain_; }
  const PatchOptions& options() const { return opts_; }
  int dim() const { return sys_.dim(); }
  int fiber_dim() const { return chart_.fiber_dim(); }

  // Endpoint of the fiber trajectory. w = 0 returns the base point without
  // integrating. `steps` = 0 uses the patch default.
  ChartPoint exp(const Eigen::VectorXd& w, int steps = 0) const;

  // Full sampled trajectory t in [0,1] of the fiber velocity w.
  Trajectory trajectory(const Eigen::VectorXd& w, int steps = 0) const;

  // n x k fiber Jacobian d exp / d w by central differences. At w = 0 this
  // is the basis matrix: the map restricts to the identity on directions.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& w, int steps = 0) const;

  // max_t | exp(t w) - c_w(t) |_inf over a uniform t-grid in [0,1].
  double rescaling_residual(const Eigen::VectorXd& w, int grid_points = 11) const;

  // Damped Newton inversion on `select`ed coordinates (defaults to the
  // patch's selection). Reports both the selected residual driven below
  // `tol` and the full-coordinate residual as a membership witness.
  ExpInverseResult inverse(const ChartPoint& target, const std::vector<int>& select = {},
                           double tol = 1e-10, int max_iter = 50,
                           const Eigen::VectorXd& initial_guess = Eigen::VectorXd()) const;

  // Default coordinate selection for inversion: chosen by pivoted QR on the
  // basis rows unless the patch was given one explicitly.
  const std::vector<int>& default_selection() const { return selection_; }
  void set_default_selection(std::vector<int> sel);

private:
  NonholonomicSystem sys_;
  TangentChart chart_;
  DomainSpec domain_;
  PatchOptions opts_;
  std::vector<int> selection_;

  void check_domain(const Eigen::VectorXd& w, double dilation) const;
};

} // namespace nhgeo
