#include "nhgeo/core/exp_map.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

namespace {

std::vector<int> pick_selection(const Eigen::MatrixXd& basis) {
  // Best-conditioned square row subset of the basis, via column pivoting on
  // its transpose; sorted for a stable, readable default.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis.transpose());
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> sel(basis.cols());
  for (int i = 0; i < basis.cols(); ++i) sel[i] = perm[i];
  std::sort(sel.begin(), sel.end());
  return sel;
}

void validate_selection(const std::vector<int>& sel, int n, int k) {
  if (static_cast<int>(sel.size()) != k)
    throw InvalidArgument("exp map: selection must pick exactly fiber_dim coordinates");
  std::vector<int> s = sel;
  std::sort(s.begin(), s.end());
  for (int i = 0; i < k; ++i) {
    if (s[i] < 0 || s[i] >= n) throw InvalidArgument("exp map: selection index out of range");
    if (i > 0 && s[i] == s[i - 1]) throw InvalidArgument("exp map: repeated selection index");
  }
}

} // namespace

ExpMapPatch::ExpMapPatch(NonholonomicSystem sys, TangentChart chart, DomainSpec domain,
                         PatchOptions opts)
    : sys_(std::move(sys)), chart_(std::move(chart)), domain_(std::move(domain)), opts_(opts) {
  const int n = sys_.dim();
  const int k = sys_.fiber_dim();
  if (chart_.base.dim() != n) throw InvalidArgument("exp map: base point dimension mismatch");
  if (chart_.basis.rows() != n || chart_.basis.cols() != k)
    throw InvalidArgument("exp map: basis must be dim x fiber_dim");
  ensure_finite(chart_.basis, "exp map: basis");
  if (opts_.steps <= 0 || opts_.metric_steps <= 0 || !(opts_.jac_step > 0))
    throw InvalidArgument("exp map: bad patch options");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(chart_.basis);
  if (qr.rank() < k) throw InvalidArgument("exp map: basis columns dependent");

  const Eigen::MatrixXd Aq = constraint_at(sys_.A, chart_.base);
  const double scale = 1.0 + chart_.basis.cwiseAbs().maxCoeff();
  if ((Aq * chart_.basis).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw InvalidArgument("exp map: basis columns do not satisfy the constraint at the base");

  if (chart_.labels.empty())
    for (int j = 0; j < k; ++j) chart_.labels.push_back("w" + std::to_string(j + 1));
  if (static_cast<int>(chart_.labels.size()) != k)
    throw InvalidArgument("exp map: label count mismatch");

  selection_ = pick_selection(chart_.basis);
}

void ExpMapPatch::set_default_selection(std::vector<int> sel) {
  validate_selection(sel, dim(), fiber_dim());
  selection_ = std::move(sel);
}

void ExpMapPatch::check_domain(const Eigen::VectorXd& w, double dilation) const {
  if (w.size() != fiber_dim()) throw InvalidArgument("exp map: fiber vector dimension mismatch");
  ensure_finite(w, "exp map: fiber vector");
  if (!domain_.contains(w, -dilation))
    throw DomainError("exp map: fiber vector outside the patch domain (|w|_inf = " +
                      std::to_string(w.lpNorm<Eigen::Infinity>()) + ")");
}

ChartPoint ExpMapPatch::exp(const Eigen::VectorXd& w, int steps) const {
  check_domain(w, 0.0);
  if (w.norm() == 0.0) return chart_.base;
  Eigen::VectorXd q, v;
  detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * w, 1.0,
                                steps > 0 ? steps : opts_.steps, q, v);
  return ChartPoint(q);
}

Trajectory ExpMapPatch::trajectory(const Eigen::VectorXd& w, int steps) const {
  check_domain(w, 0.0);
  IntegrateOptions iopts;
  iopts.steps = steps > 0 ? steps : opts_.steps;
  return integrate_nh_geodesic(sys_, chart_.base, chart_.basis * w, 1.0, iopts);
}

Eigen::MatrixXd ExpMapPatch::jacobian(const Eigen::VectorXd& w, int steps) const {
  check_domain(w, 0.0);
  const int n = dim(), k = fiber_dim();
  const int st = steps > 0 ? steps : opts_.steps;
  const double h = opts_.jac_step;
  Eigen::MatrixXd J(n, k);
  Eigen::VectorXd q, v;
  for (int j = 0; j < k; ++j) {
    // Probes may poke just past the boundary; the flow is defined there.
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    Eigen::VectorXd qp, qm;
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * wp, 1.0, st, qp, v);
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * wm, 1.0, st, qm, v);
    J.col(j) = (qp - qm) / (2.0 * h);
  }
  return J;
}

double ExpMapPatch::rescaling_residual(const Eigen::VectorXd& w, int grid_points) const {
  check_domain(w, 0.0);
  if (grid_points < 2) throw InvalidArgument("exp map: need at least two grid points");
  const int st = opts_.steps;
  Eigen::VectorXd q_scaled, q_clock, v;
  double r = 0.0;
  for (int j = 1; j < grid_points; ++j) {
    const double t = static_cast<double>(j) / (grid_points - 1);
    // exp(t w) against the time-rescaled run of the same ray
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * (t * w), 1.0, st,
                                  q_scaled, v);
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * w, t, st, q_clock, v);
    r = std::max(r, (q_scaled - q_clock).lpNorm<Eigen::Infinity>());
  }
  return r;
}

ExpInverseResult ExpMapPatch::inverse(const ChartPoint& target, const std::vector<int>& select,
                                      double tol, int max_iter,
                                      const Eigen::VectorXd& initial_guess) const {
  const int n = dim(), k = fiber_dim();
  if (target.dim() != n) throw InvalidArgument("exp map: target dimension mismatch");
  const std::vector<int>& sel = select.empty() ? selection_ : select;
  validate_selection(sel, n, k);

  auto take = [&sel, k](const Eigen::VectorXd& full) {
    Eigen::VectorXd out(k);
    for (int i = 0; i < k; ++i) out[i] = full[sel[i]];
    return out;
  };
  const Eigen::VectorXd target_sel = take(target.coords);

  Eigen::MatrixXd Bsel(k, k);
  for (int i = 0; i < k; ++i) Bsel.row(i) = chart_.basis.row(sel[i]);
  Eigen::FullPivLU<Eigen::MatrixXd> blu(Bsel);
  if (!blu.isInvertible())
    throw InvalidArgument("exp map: selected rows of the basis are singular");

  Eigen::VectorXd w;
  if (initial_guess.size() == k) {
    w = initial_guess;
  } else if (initial_guess.size() == 0) {
    // Linear seed: exp(w) = base + basis w + O(|w|^2)
    w = blu.solve(target_sel - take(chart_.base.coords));
  } else {
    throw InvalidArgument("exp map: initial guess dimension mismatch");
  }
  if (!domain_.contains(w, -0.10))
    throw DomainError("exp map: inversion seed falls outside the patch domain");

  const int st = opts_.steps;
  auto fval = [&](const Eigen::VectorXd& ww) -> Eigen::VectorXd {
    if (ww.norm() == 0.0) return take(chart_.base.coords) - target_sel;
    Eigen::VectorXd q, v;
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * ww, 1.0, st, q, v);
    return take(q) - target_sel;
  };

  // Differential probes run without the membership check: Newton iterates may
  // live in the 10% dilated cushion where the flow is still defined.
  auto jac_sel = [&](const Eigen::VectorXd& ww) -> Eigen::MatrixXd {
    Eigen::MatrixXd J(k, k);
    Eigen::VectorXd q, v;
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd wp = ww, wm = ww;
      wp[j] += opts_.jac_step;
      wm[j] -= opts_.jac_step;
      Eigen::VectorXd qp, qm;
      detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * wp, 1.0, st, qp, v);
      detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * wm, 1.0, st, qm, v);
      for (int i = 0; i < k; ++i) J(i, j) = (qp[sel[i]] - qm[sel[i]]) / (2.0 * opts_.jac_step);
    }
    return J;
  };

  ExpInverseResult res;
  Eigen::VectorXd f = fval(w);
  int it = 0;
  for (; it < max_iter && f.lpNorm<Eigen::Infinity>() > tol; ++it) {
    const Eigen::MatrixXd Jsel = jac_sel(w);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Jsel);
    if (!lu.isInvertible())
      throw NumericalError("exp map: singular selected differential during inversion");
    const Eigen::VectorXd step = lu.solve(-f);

    double alpha = 1.0;
    const double f0 = f.lpNorm<Eigen::Infinity>();
    bool moved = false;
    while (alpha > 1.0 / 1024.0) {
      Eigen::VectorXd wt = w + alpha * step;
      if (domain_.contains(wt, -0.10)) {
        Eigen::VectorXd ft = fval(wt);
        if (ft.lpNorm<Eigen::Infinity>() < (1.0 - 0.5 * alpha) * f0 ||
            ft.lpNorm<Eigen::Infinity>() <= tol) {
          w = wt;
          f = ft;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) throw ConvergenceError("exp map: inversion stalled");
  }
  if (f.lpNorm<Eigen::Infinity>() > tol)
    throw ConvergenceError("exp map: inversion did not converge in " + std::to_string(max_iter) +
                           " iterations");
  if (!domain_.contains(w, -0.02))
    throw DomainError("exp map: inversion left the patch domain");

  res.w = w;
  res.iterations = it;
  res.selected_residual = f.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd q_final = chart_.base.coords, v;
  if (w.norm() != 0.0)
    detail::integrate_nh_endpoint(sys_, chart_.base.coords, chart_.basis * w, 1.0, st, q_final, v);
  res.full_residual = (q_final - target.coords).lpNorm<Eigen::Infinity>();
  return res;
}

} // namespace nhgeo
