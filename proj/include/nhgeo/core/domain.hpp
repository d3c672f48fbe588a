#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

// Star-shaped validity region around the origin of a vector space.
//
// Two norm balls are supported plus an arbitrary predicate. "Cube" is the
// sup-norm ball: the natural region for per-axis fiber coordinates (each
// coordinate ranges over [-r, r] independently). "Ball" is the Euclidean
// ball: the right region when degeneracy happens on a round boundary.
//
// `margin` in contains() shrinks the region toward the origin by the given
// fraction (0.05 keeps |w| <= 0.95 r); a negative margin dilates, which the
// exponential-map stencils use to allow finite-difference probes just past
// the nominal boundary.
class DomainSpec {
public:
  enum class Kind { Cube, Ball, Predicate };

  DomainSpec() : kind_(Kind::Cube), radius_(1.0) {}

  static DomainSpec cube(double radius) {
    if (!(radius > 0)) throw InvalidArgument("DomainSpec::cube: radius must be positive");
    DomainSpec d;
    d.kind_ = Kind::Cube;
    d.radius_ = radius;
    return d;
  }

  static DomainSpec ball(double radius) {
    if (!(radius > 0)) throw InvalidArgument("DomainSpec::ball: radius must be positive");
    DomainSpec d;
    d.kind_ = Kind::Ball;
    d.radius_ = radius;
    return d;
  }

  static DomainSpec predicate(std::function<bool(const Eigen::VectorXd&)> pred,
                              double bounding_radius) {
    if (!pred) throw InvalidArgument("DomainSpec::predicate: empty predicate");
    if (!(bounding_radius > 0))
      throw InvalidArgument("DomainSpec::predicate: bounding radius must be positive");
    DomainSpec d;
    d.kind_ = Kind::Predicate;
    d.radius_ = bounding_radius;
    d.pred_ = std::move(pred);
    return d;
  }

  Kind kind() const { return kind_; }

  // Radius of the cube/ball, or the bounding radius for predicates. Grid
  // sweeps enumerate the cube of this radius and filter by contains().
  double bounding_radius() const { return radius_; }

  bool contains(const Eigen::VectorXd& w, double margin = 0.0) const {
    if (!(margin < 1.0)) throw InvalidArgument("DomainSpec::contains: margin must be < 1");
    const double scale = 1.0 - margin;
    // Closed membership with a roundoff cushion so boundary grid nodes pass.
    const double slack = 1e-12 * (1.0 + radius_);
    switch (kind_) {
      case Kind::Cube:
        return w.lpNorm<Eigen::Infinity>() <= radius_ * scale + slack;
      case Kind::Ball:
        return w.norm() <= radius_ * scale + slack;
      case Kind::Predicate:
        return pred_(w / scale);
    }
    return false;
  }

private:
  Kind kind_;
  double radius_;
  std::function<bool(const Eigen::VectorXd&)> pred_;
};

} // namespace nhgeo
