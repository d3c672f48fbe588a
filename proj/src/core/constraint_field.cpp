#include "nhgeo/core/constraint_field.hpp"

#include <Eigen/QR>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

Eigen::MatrixXd constraint_at(const ConstraintField& A, const ChartPoint& q) {
  if (!A.eval) throw InvalidArgument("constraint '" + A.name + "': no evaluator");
  if (q.dim() != A.dim)
    throw InvalidArgument("constraint '" + A.name + "': point dimension mismatch");
  Eigen::MatrixXd m = A.eval(q.coords);
  if (m.rows() != A.corank || m.cols() != A.dim)
    throw InvalidArgument("constraint '" + A.name + "': evaluator returned wrong shape");
  ensure_finite(m, "constraint components");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  if (qr.rank() < A.corank)
    throw NumericalError("constraint '" + A.name + "': rows dependent at evaluation point");
  return m;
}

namespace detail {

std::vector<Eigen::MatrixXd> constraint_partials(const ConstraintField& A,
                                                 const Eigen::VectorXd& q, double fd_step) {
  if (A.partials) return A.partials(q);
  const double h = fd_step > 0 ? fd_step : 1e-6;
  std::vector<Eigen::MatrixXd> out(A.dim);
  Eigen::VectorXd qp = q, qm = q;
  for (int i = 0; i < A.dim; ++i) {
    qp[i] = q[i] + h;
    qm[i] = q[i] - h;
    out[i] = (A.eval(qp) - A.eval(qm)) / (2.0 * h);
    qp[i] = q[i];
    qm[i] = q[i];
  }
  return out;
}

} // namespace detail

} // namespace nhgeo
