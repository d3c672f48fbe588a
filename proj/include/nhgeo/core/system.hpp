#pragma once

#include <string>
#include <utility>

#include "nhgeo/core/constraint_field.hpp"
#include "nhgeo/core/metric_field.hpp"

namespace nhgeo {

// A kinetic system with linear velocity constraints: Riemannian metric g on
// the chart plus a constraint distribution D = ker A. Trajectories of the
// constrained dynamics keep velocities in D while the g-orthogonal reaction
// force keeps accelerations in the annihilator of D.
struct NonholonomicSystem {
  std::string name;
  MetricField g;
  ConstraintField A;

  int dim() const { return g.dim; }
  int fiber_dim() const { return g.dim - A.corank; }
};

inline NonholonomicSystem make_nonholonomic_system(std::string name, MetricField g,
                                                   ConstraintField A) {
  if (g.dim <= 0 || !g.eval) throw InvalidArgument("system: metric field incomplete");
  if (A.dim != g.dim || !A.eval) throw InvalidArgument("system: constraint field incomplete");
  if (A.corank <= 0 || A.corank >= g.dim)
    throw InvalidArgument("system: corank must lie strictly between 0 and dim");
  return NonholonomicSystem{std::move(name), std::move(g), std::move(A)};
}

} // namespace nhgeo
