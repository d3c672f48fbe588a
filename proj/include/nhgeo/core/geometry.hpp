#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nhgeo/core/chart.hpp"
#include "nhgeo/core/system.hpp"

namespace nhgeo {

// Levi-Civita symbols at a point: sym[k](i,j) = Gamma^k_ij, symmetric in
// (i,j) by construction.
struct Christoffel {
  std::vector<Eigen::MatrixXd> sym;

  int dim() const { return static_cast<int>(sym.size()); }

  // (Gamma(u,v))^k = Gamma^k_ij u^i v^j
  Eigen::VectorXd contract(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(dim());
    for (int k = 0; k < dim(); ++k) out[k] = u.dot(sym[k] * v);
    return out;
  }
};

// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
// Uses analytic partials when the field provides them (unless force_fd),
// otherwise central differences with step fd_step (0 picks the field hint).
Christoffel christoffel_at(const MetricField& g, const ChartPoint& q,
                           double fd_step = 0.0, bool force_fd = false);

// g-orthogonal projector onto D = ker A at q:
//   P = Id - g^-1 A^T (A g^-1 A^T)^-1 A.
// Idempotent, kills the constraint rows, self-adjoint w.r.t. g.
Eigen::MatrixXd orthogonal_projector_at(const MetricField& g, const ConstraintField& A,
                                        const ChartPoint& q);

using VectorFieldFn = std::function<Eigen::VectorXd(const ChartPoint&)>;

// Constrained-connection derivative of Y along X at q:
//   P (LC_X Y) + LC_X (P' Y),   P' = Id - P,
// where LC is the Levi-Civita connection of g. Directional derivatives of
// the fields use central differences with step outer_step; the Levi-Civita
// symbols use metric_step (0 picks the field hint).
TangentVector nh_covariant_derivative(const NonholonomicSystem& sys, const VectorFieldFn& X,
                                      const VectorFieldFn& Y, const ChartPoint& q,
                                      double outer_step = 1e-5, double metric_step = 0.0);

// Derivative-compatibility defect over the distribution:
//   X(g(Y,Z)) - g(D_X Y, Z) - g(Y, D_X Z)
// with D the constrained connection. Zero (to truncation error) whenever
// Y, Z are sections of D along the probe directions.
double d_compatibility_residual(const NonholonomicSystem& sys, const VectorFieldFn& X,
                                const VectorFieldFn& Y, const VectorFieldFn& Z,
                                const ChartPoint& q, double outer_step = 1e-5);

// Basis of ker A(q), g-orthonormalized in deterministic column order.
Eigen::MatrixXd d_orthonormal_basis(const NonholonomicSystem& sys, const ChartPoint& q);

} // namespace nhgeo
