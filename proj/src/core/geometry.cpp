#include "nhgeo/core/geometry.hpp"

#include <Eigen/Dense>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

Christoffel christoffel_at(const MetricField& g, const ChartPoint& q, double fd_step,
                           bool force_fd) {
  const int n = g.dim;
  if (q.dim() != n) throw InvalidArgument("christoffel_at: point dimension mismatch");

  Christoffel sym;
  sym.sym.assign(n, Eigen::MatrixXd::Zero(n, n));
  if (g.constant) return sym; // dg = 0 identically

  std::vector<Eigen::MatrixXd> dg;
  if (g.partials && !force_fd) {
    dg = g.partials(q.coords);
    if (static_cast<int>(dg.size()) != n)
      throw InvalidArgument("christoffel_at: partials returned wrong count");
  } else {
    const double h = fd_step > 0 ? fd_step : g.fd_hint;
    dg.reserve(n);
    Eigen::VectorXd qp = q.coords, qm = q.coords;
    for (int i = 0; i < n; ++i) {
      qp[i] = q.coords[i] + h;
      qm[i] = q.coords[i] - h;
      dg.push_back((detail::metric_sym(g, qp) - detail::metric_sym(g, qm)) / (2.0 * h));
      qp[i] = q.coords[i];
      qm[i] = q.coords[i];
    }
  }

  Eigen::MatrixXd gm = detail::metric_sym(g, q.coords);
  ensure_finite(gm, "christoffel_at: metric");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gm);
  if (!lu.isInvertible())
    throw NumericalError("christoffel_at: metric singular at evaluation point");

  // Gamma^._{ij} = 1/2 g^{-1} c_{ij},  c_{ij}[l] = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int l = 0; l < n; ++l) c[l] = dg[i](j, l) + dg[j](i, l) - dg[l](i, j);
      Eigen::VectorXd gamma = 0.5 * lu.solve(c);
      for (int k = 0; k < n; ++k) {
        sym.sym[k](i, j) = gamma[k];
        sym.sym[k](j, i) = gamma[k];
      }
    }
  }
  return sym;
}

Eigen::MatrixXd orthogonal_projector_at(const MetricField& g, const ConstraintField& A,
                                        const ChartPoint& q) {
  const int n = g.dim;
  Eigen::MatrixXd Aq = constraint_at(A, q);
  Eigen::MatrixXd gm = detail::metric_sym(g, q.coords);
  Eigen::FullPivLU<Eigen::MatrixXd> gl(gm);
  if (!gl.isInvertible())
    throw NumericalError("orthogonal projector: metric singular at evaluation point");
  Eigen::MatrixXd X = gl.solve(Aq.transpose()); // g^-1 A^T
  Eigen::MatrixXd S = Aq * X;                   // A g^-1 A^T
  Eigen::FullPivLU<Eigen::MatrixXd> sl(S);
  if (!sl.isInvertible())
    throw NumericalError("orthogonal projector: A g^-1 A^T singular");
  return Eigen::MatrixXd::Identity(n, n) - X * sl.solve(Aq);
}

namespace {

// Directional derivative of a vector field along d at q, central differences.
Eigen::VectorXd directional(const VectorFieldFn& Y, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& d, double h) {
  ChartPoint qp(q + h * d), qm(q - h * d);
  return (Y(qp) - Y(qm)) / (2.0 * h);
}

} // namespace

TangentVector nh_covariant_derivative(const NonholonomicSystem& sys, const VectorFieldFn& X,
                                      const VectorFieldFn& Y, const ChartPoint& q,
                                      double outer_step, double metric_step) {
  if (!X || !Y) throw InvalidArgument("nh_covariant_derivative: empty vector field");
  const Eigen::VectorXd Xq = X(q);
  const Eigen::VectorXd Yq = Y(q);
  if (Xq.size() != sys.dim() || Yq.size() != sys.dim())
    throw InvalidArgument("nh_covariant_derivative: field dimension mismatch");

  const Christoffel gamma = christoffel_at(sys.g, q, metric_step);
  const Eigen::MatrixXd P = orthogonal_projector_at(sys.g, sys.A, q);

  // LC_X Y = dY[X] + Gamma(X, Y)
  Eigen::VectorXd lc_xy = directional(Y, q.coords, Xq, outer_step) + gamma.contract(Xq, Yq);

  // Complementary-part field p -> (Id - P(p)) Y(p)
  auto PpY = [&sys, &Y](const ChartPoint& p) -> Eigen::VectorXd {
    Eigen::MatrixXd Pp = orthogonal_projector_at(sys.g, sys.A, p);
    Eigen::VectorXd Yp = Y(p);
    return Yp - Pp * Yp;
  };
  Eigen::VectorXd ppy_q = PpY(q);
  Eigen::VectorXd lc_x_ppy =
      directional(PpY, q.coords, Xq, outer_step) + gamma.contract(Xq, ppy_q);

  return TangentVector(q, P * lc_xy + lc_x_ppy);
}

double d_compatibility_residual(const NonholonomicSystem& sys, const VectorFieldFn& X,
                                const VectorFieldFn& Y, const VectorFieldFn& Z,
                                const ChartPoint& q, double outer_step) {
  const Eigen::VectorXd Xq = X(q);
  auto inner = [&sys, &Y, &Z](const ChartPoint& p) -> double {
    Eigen::MatrixXd gp = detail::metric_sym(sys.g, p.coords);
    return Y(p).dot(gp * Z(p));
  };
  ChartPoint qp(q.coords + outer_step * Xq), qm(q.coords - outer_step * Xq);
  const double x_of_gyz = (inner(qp) - inner(qm)) / (2.0 * outer_step);

  Eigen::MatrixXd gq = detail::metric_sym(sys.g, q.coords);
  Eigen::VectorXd dxy = nh_covariant_derivative(sys, X, Y, q, outer_step).comps;
  Eigen::VectorXd dxz = nh_covariant_derivative(sys, X, Z, q, outer_step).comps;
  return std::abs(x_of_gyz - dxy.dot(gq * Z(q)) - Y(q).dot(gq * dxz));
}

Eigen::MatrixXd d_orthonormal_basis(const NonholonomicSystem& sys, const ChartPoint& q) {
  Eigen::MatrixXd Aq = constraint_at(sys.A, q);
  Eigen::MatrixXd gm = detail::metric_sym(sys.g, q.coords);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Aq);
  Eigen::MatrixXd K = lu.kernel(); // n x k
  if (K.cols() != sys.fiber_dim())
    throw NumericalError("d_orthonormal_basis: kernel dimension mismatch");

  // Gram-Schmidt in the metric inner product, column by column.
  Eigen::MatrixXd B = K;
  for (int j = 0; j < B.cols(); ++j) {
    for (int i = 0; i < j; ++i) B.col(j) -= B.col(i).dot(gm * B.col(j)) * B.col(i);
    double norm2 = B.col(j).dot(gm * B.col(j));
    if (!(norm2 > 0))
      throw NumericalError("d_orthonormal_basis: degenerate metric on the distribution");
    B.col(j) /= std::sqrt(norm2);
  }
  return B;
}

} // namespace nhgeo
