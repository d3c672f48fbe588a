#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

template <typename Derived>
inline void ensure_finite(const Eigen::DenseBase<Derived>& values, const char* what) {
  if (!values.allFinite())
    throw InvalidArgument(std::string(what) + ": non-finite entries");
}

// A point of the configuration manifold in a fixed global chart.
struct ChartPoint {
  Eigen::VectorXd coords;

  ChartPoint() = default;
  explicit ChartPoint(Eigen::VectorXd c) : coords(std::move(c)) {
    if (coords.size() == 0)
      throw InvalidArgument("ChartPoint: empty coordinate vector");
    ensure_finite(coords, "ChartPoint");
  }

  int dim() const { return static_cast<int>(coords.size()); }
};

// A tangent vector anchored at a chart point; components in the same chart.
struct TangentVector {
  ChartPoint base;
  Eigen::VectorXd comps;

  TangentVector() = default;
  TangentVector(ChartPoint b, Eigen::VectorXd c)
      : base(std::move(b)), comps(std::move(c)) {
    if (comps.size() != base.coords.size())
      throw InvalidArgument("TangentVector: component/base dimension mismatch");
    ensure_finite(comps, "TangentVector");
  }

  int dim() const { return static_cast<int>(comps.size()); }
};

} // namespace nhgeo
