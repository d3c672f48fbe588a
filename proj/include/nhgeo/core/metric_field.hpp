#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "nhgeo/core/chart.hpp"

namespace nhgeo {

enum class SignaturePolicy {
  RequirePositiveDefinite, // reject evaluation points where g is not PD
  AllowIndefinite          // only finiteness/symmetry are enforced
};

// Field of symmetric bilinear forms over a chart. `eval` returns the n x n
// component matrix at a point; `partials`, when set, returns the n matrices
// d_i g and spares the Christoffel computation a finite-difference pass.
//
// `constant` marks fields whose components do not depend on the point, so
// Levi-Civita symbols vanish identically. `fd_hint` is the default step for
// finite-difference partials: evaluators backed by nested numerics carry a
// larger step so derivative noise stays below truncation error.
struct MetricField {
  int dim = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> partials;
  SignaturePolicy policy = SignaturePolicy::RequirePositiveDefinite;
  bool constant = false;
  double fd_hint = 1e-6;
  std::string name;
};

// Symmetrized components at q with the field's signature policy applied.
Eigen::MatrixXd metric_at(const MetricField& g, const ChartPoint& q);

namespace detail {
// Symmetrized components without the signature check; hot paths use this and
// let downstream factorizations surface indefiniteness.
Eigen::MatrixXd metric_sym(const MetricField& g, const Eigen::VectorXd& q);
} // namespace detail

// True iff m (assumed symmetric) admits a Cholesky factorization.
bool is_positive_definite(const Eigen::MatrixXd& m);

} // namespace nhgeo
