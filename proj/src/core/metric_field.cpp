#include "nhgeo/core/metric_field.hpp"

#include <Eigen/Cholesky>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

namespace detail {

Eigen::MatrixXd metric_sym(const MetricField& g, const Eigen::VectorXd& q) {
  Eigen::MatrixXd m = g.eval(q);
  if (m.rows() != g.dim || m.cols() != g.dim)
    throw InvalidArgument("metric '" + g.name + "': evaluator returned wrong shape");
  return 0.5 * (m + m.transpose());
}

} // namespace detail

Eigen::MatrixXd metric_at(const MetricField& g, const ChartPoint& q) {
  if (!g.eval) throw InvalidArgument("metric '" + g.name + "': no evaluator");
  if (q.dim() != g.dim)
    throw InvalidArgument("metric '" + g.name + "': point dimension mismatch");
  Eigen::MatrixXd m = detail::metric_sym(g, q.coords);
  ensure_finite(m, "metric components");
  if (g.policy == SignaturePolicy::RequirePositiveDefinite && !is_positive_definite(m))
    throw NumericalError("metric '" + g.name + "': not positive definite at evaluation point");
  return m;
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

} // namespace nhgeo
