#pragma once

#include <map>
#include <string>
#include <vector>

#include "nhgeo/core/vector_metric.hpp"

namespace nhgeo {

// Build a vector-space metric from a spec string:
//   "flat"                  identity on R^2 (or "flat:k" on R^k)
//   "example53"             radially compatible degenerate-circle metric
//   "remark21-conformal"    exp(a u + b v) * I on a ball (a, b in params)
//   "pullback-ambient:particle"
//                           pullback of the flat R^3 metric by the particle's
//                           radial chart (Gauss check fails: the chart is not
//                           an isometry onto a flat target)
//   "pullback-gmod:disk"    pullback of the disk's modified ambient metric by
//                           its radial chart; ":closed" (default) uses the
//                           closed-form components, ":integrated" rebuilds the
//                           chart map from the dynamics integrator
// Params: radius (domain), I/J (disk), a/b (conformal), steps (integrated).
VectorMetric make_metric(const std::string& spec, const std::map<std::string, double>& params = {});

// The identity-check registry: metric specs paired with whether the radial
// compatibility checks are expected to pass.
struct RegistryItem {
  std::string spec;
  bool expect_pass;
  std::string why;
};
std::vector<RegistryItem> theorem_registry();

} // namespace nhgeo
