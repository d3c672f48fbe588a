#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "nhgeo/core/domain.hpp"
#include "nhgeo/core/metric_field.hpp"
#include "nhgeo/core/riemannian.hpp"

namespace nhgeo {

// Provenance of a metric evaluator, driving default finite-difference steps
// and verdict tolerances. Analytic: closed-form components (noise at machine
// level). Numeric: components produced by nested differentiation or
// integration, whose jitter forces larger probe steps and looser verdicts.
enum class FdProfile { Analytic, Numeric };

struct MetricTolerances {
  double gauss = 1e-8;          // check_gauss verdict threshold
  double line_geodesic = 1e-8;  // lines-through-origin geodesic defect
  double exp_identity = 1e-7;   // |exp(v) - v| for the exponential-identity check
  double christoffel_step = 1e-6;
  double gradient_step = 1e-6;  // radial-gradient probe step
};

MetricTolerances default_tolerances(FdProfile profile);

// Metric on a vector space E (a fiber of the constraint distribution):
// smooth family w -> G(w) of inner products on E itself. The central
// property of interest is the radial compatibility
//   G(w)(w, z) = G(0)(w, z)  for all w in the domain, z in E,
// under which rays from the origin behave like unit-speed geodesics.
class VectorMetric {
public:
  using Eval = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using Partials = std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

  VectorMetric() = default;
  VectorMetric(int dim, Eval eval, DomainSpec domain, FdProfile profile,
               std::string name = "", Partials partials = nullptr);

  int dim() const { return dim_; }
  const DomainSpec& domain() const { return domain_; }
  FdProfile profile() const { return profile_; }
  const std::string& name() const { return name_; }
  const MetricTolerances& tolerances() const { return tol_; }
  bool has_partials() const { return static_cast<bool>(partials_); }

  // Symmetrized components at w. Evaluation is permitted anywhere the
  // underlying formula makes sense; domain membership is enforced by the
  // sweep and radial operations, not here.
  Eigen::MatrixXd operator()(const Eigen::VectorXd& w) const;

  std::vector<Eigen::MatrixXd> partials_at(const Eigen::VectorXd& w, double fd_step) const;

private:
  int dim_ = 0;
  Eval eval_;
  Partials partials_;
  DomainSpec domain_;
  FdProfile profile_ = FdProfile::Analytic;
  std::string name_;
  MetricTolerances tol_;
};

// Adapter: view a vector-space metric as a field over the chart E, carrying
// the profile's finite-difference hints.
MetricField as_metric_field(const VectorMetric& G);

// G(w)(w,z) - G(0)(w,z): the radial compatibility defect in direction z.
double gauss_residual(const VectorMetric& G, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& z);

enum class GaussVerdict { Pass, Fail, NotRiemannian };

struct GaussReport {
  GaussVerdict verdict = GaussVerdict::Pass;
  double max_abs_residual = 0.0;
  Eigen::VectorXd argmax_w;
  int argmax_z = -1;
  int points = 0;
  double tolerance = 0.0;
  bool pd_ok = true;
  Eigen::VectorXd pd_failure_at; // set when verdict == NotRiemannian
};

// Sweeps a uniform product grid over the domain (shrunk by `margin`),
// checking positive-definiteness at every node and the radial compatibility
// residual against each canonical direction z = e_j. PD violation inside the
// domain is reported as its own verdict with the failing node.
GaussReport check_gauss(const VectorMetric& G, int grid_per_axis = 21, double tol = 0.0,
                        double margin = 0.05);

// r(v) = sqrt(G(v)(v,v)), the norm the metric assigns to its own base point.
double radial_distance(const VectorMetric& G, const Eigen::VectorXd& v);

// grad r at v: solves G(v) x = dr(v) with a finite-difference differential.
// Under radial compatibility this equals v / |v|_{G(0)} and has unit G(v)-norm.
Eigen::VectorXd radial_gradient(const VectorMetric& G, const Eigen::VectorXd& v,
                                double fd_step = 0.0);

// Pullback of an ambient field h through a map E -> chart(h):
//   G(w) = J(w)^T h(map(w)) J(w), J by central differences.
VectorMetric pullback_metric(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map,
                             const MetricField& h, int domain_dim, DomainSpec domain,
                             double fd_step = 1e-5, std::string name = "pullback");

// Radially compatible metric generated from an arbitrary ambient metric on E:
// the pullback of the ambient metric through its own exponential map at the
// origin. The construction satisfies check_gauss by the chain rule, which the
// sweep verifies numerically rather than assumes.
VectorMetric gauss_metric_from_ambient(const VectorMetric& ambient, DomainSpec domain,
                                       const GeodesicOptions& opts = {},
                                       double jac_step = 1e-5,
                                       std::string name = "gauss-from-ambient");

} // namespace nhgeo
