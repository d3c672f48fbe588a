#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "nhgeo/core/chart.hpp"

namespace nhgeo {

// Field of linear velocity constraints A(q) v = 0. `eval` returns the m x n
// coefficient matrix at a point (m = corank, the number of independent
// constraints); `partials`, when set, returns the n matrices d_i A.
struct ConstraintField {
  int dim = 0;    // n, chart dimension
  int corank = 0; // m, number of constraint rows
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> partials;
  std::string name;
};

// Constraint matrix at q; validates shape, finiteness and full row rank.
Eigen::MatrixXd constraint_at(const ConstraintField& A, const ChartPoint& q);

namespace detail {
// Unvalidated evaluation for inner loops.
inline Eigen::MatrixXd constraint_raw(const ConstraintField& A, const Eigen::VectorXd& q) {
  return A.eval(q);
}

// d_i A stacked over i, analytic when available else central differences.
std::vector<Eigen::MatrixXd> constraint_partials(const ConstraintField& A,
                                                 const Eigen::VectorXd& q,
                                                 double fd_step);
} // namespace detail

} // namespace nhgeo
