#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  double speed = 0.0;               // |v|_g at q
  double constraint_residual = 0.0; // |A(q) v|_inf
};

// Uniformly sampled integral curve. speed_drift and max_constraint_residual
// aggregate the per-sample diagnostics against the initial sample.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  double speed_drift = 0.0;
  double max_constraint_residual = 0.0;

  int size() const { return static_cast<int>(samples.size()); }

  const TrajectorySample& front() const {
    if (samples.empty()) throw InvalidArgument("Trajectory: empty");
    return samples.front();
  }
  const TrajectorySample& back() const {
    if (samples.empty()) throw InvalidArgument("Trajectory: empty");
    return samples.back();
  }
};

} // namespace nhgeo
