#include "nhgeo/core/vector_metric.hpp"

#include <cmath>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

MetricTolerances default_tolerances(FdProfile profile) {
  MetricTolerances t;
  if (profile == FdProfile::Numeric) {
    // Component jitter from nested integration/differentiation sits near
    // 1e-11; probe steps and verdicts back off accordingly.
    t.gauss = 1e-6;
    t.line_geodesic = 1e-4;
    t.exp_identity = 1e-5;
    t.christoffel_step = 1e-3;
    t.gradient_step = 1e-4;
  }
  return t;
}

VectorMetric::VectorMetric(int dim, Eval eval, DomainSpec domain, FdProfile profile,
                           std::string name, Partials partials)
    : dim_(dim), eval_(std::move(eval)), partials_(std::move(partials)),
      domain_(std::move(domain)), profile_(profile), name_(std::move(name)),
      tol_(default_tolerances(profile)) {
  if (dim_ <= 0) throw InvalidArgument("VectorMetric: dimension must be positive");
  if (!eval_) throw InvalidArgument("VectorMetric: empty evaluator");
}

Eigen::MatrixXd VectorMetric::operator()(const Eigen::VectorXd& w) const {
  if (w.size() != dim_) throw InvalidArgument("VectorMetric '" + name_ + "': dimension mismatch");
  ensure_finite(w, "VectorMetric: point");
  Eigen::MatrixXd m = eval_(w);
  if (m.rows() != dim_ || m.cols() != dim_)
    throw InvalidArgument("VectorMetric '" + name_ + "': evaluator returned wrong shape");
  ensure_finite(m, "VectorMetric: components");
  return 0.5 * (m + m.transpose());
}

std::vector<Eigen::MatrixXd> VectorMetric::partials_at(const Eigen::VectorXd& w,
                                                       double fd_step) const {
  if (partials_) {
    auto dp = partials_(w);
    if (static_cast<int>(dp.size()) != dim_)
      throw InvalidArgument("VectorMetric '" + name_ + "': partials returned wrong count");
    return dp;
  }
  const double h = fd_step > 0 ? fd_step : tol_.christoffel_step;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(dim_);
  Eigen::VectorXd wp = w, wm = w;
  for (int i = 0; i < dim_; ++i) {
    wp[i] = w[i] + h;
    wm[i] = w[i] - h;
    out.push_back(((*this)(wp) - (*this)(wm)) / (2.0 * h));
    wp[i] = w[i];
    wm[i] = w[i];
  }
  return out;
}

MetricField as_metric_field(const VectorMetric& G) {
  MetricField f;
  f.dim = G.dim();
  f.eval = [G](const Eigen::VectorXd& w) { return G(w); };
  if (G.has_partials()) {
    f.partials = [G](const Eigen::VectorXd& w) { return G.partials_at(w, 0.0); };
  }
  f.policy = SignaturePolicy::AllowIndefinite; // factorizations downstream decide
  f.constant = false;
  f.fd_hint = G.tolerances().christoffel_step;
  f.name = G.name();
  return f;
}

double gauss_residual(const VectorMetric& G, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& z) {
  if (z.size() != G.dim()) throw InvalidArgument("gauss_residual: direction dimension mismatch");
  const Eigen::MatrixXd gw = G(w);
  const Eigen::MatrixXd g0 = G(Eigen::VectorXd::Zero(G.dim()));
  return w.dot(gw * z) - w.dot(g0 * z);
}

GaussReport check_gauss(const VectorMetric& G, int grid_per_axis, double tol, double margin) {
  if (grid_per_axis < 2) throw InvalidArgument("check_gauss: need at least two nodes per axis");
  const int k = G.dim();
  GaussReport rep;
  rep.tolerance = tol > 0 ? tol : G.tolerances().gauss;

  const double R = G.domain().bounding_radius();
  const Eigen::MatrixXd g0 = G(Eigen::VectorXd::Zero(k));
  if (!is_positive_definite(g0)) {
    rep.verdict = GaussVerdict::NotRiemannian;
    rep.pd_ok = false;
    rep.pd_failure_at = Eigen::VectorXd::Zero(k);
    return rep;
  }

  // Nodes span the margin-shrunk extent so the largest admitted radii are
  // sampled exactly. Odd counts put a node at the origin; enumerate the
  // product grid by index.
  const double Rg = R * (1.0 - margin);
  long total = 1;
  for (int i = 0; i < k; ++i) total *= grid_per_axis;
  for (long idx = 0; idx < total; ++idx) {
    Eigen::VectorXd w(k);
    long rem = idx;
    for (int i = 0; i < k; ++i) {
      const int gi = static_cast<int>(rem % grid_per_axis);
      rem /= grid_per_axis;
      w[i] = -Rg + 2.0 * Rg * gi / (grid_per_axis - 1);
    }
    if (!G.domain().contains(w, margin)) continue;
    ++rep.points;

    const Eigen::MatrixXd gw = G(w);
    if (!is_positive_definite(gw)) {
      rep.verdict = GaussVerdict::NotRiemannian;
      rep.pd_ok = false;
      rep.pd_failure_at = w;
      return rep;
    }
    const Eigen::VectorXd defect = (gw - g0).transpose() * w; // row j: residual against e_j
    for (int j = 0; j < k; ++j) {
      const double r = std::abs(defect[j]);
      if (r > rep.max_abs_residual) {
        rep.max_abs_residual = r;
        rep.argmax_w = w;
        rep.argmax_z = j;
      }
    }
  }
  rep.verdict = rep.max_abs_residual <= rep.tolerance ? GaussVerdict::Pass : GaussVerdict::Fail;
  return rep;
}

double radial_distance(const VectorMetric& G, const Eigen::VectorXd& v) {
  const double q2 = v.dot(G(v) * v);
  if (!(q2 >= 0)) throw NumericalError("radial_distance: negative squared norm");
  return std::sqrt(q2);
}

Eigen::VectorXd radial_gradient(const VectorMetric& G, const Eigen::VectorXd& v, double fd_step) {
  if (v.size() != G.dim()) throw InvalidArgument("radial_gradient: dimension mismatch");
  if (v.lpNorm<Eigen::Infinity>() < 1e-12)
    throw InvalidArgument("radial_gradient: undefined at the origin");
  const double h = fd_step > 0 ? fd_step : G.tolerances().gradient_step;

  // Five-point stencil keeps truncation below the evaluator's own jitter.
  Eigen::VectorXd dr(G.dim());
  for (int i = 0; i < G.dim(); ++i) {
    Eigen::VectorXd p2 = v, p1 = v, m1 = v, m2 = v;
    p2[i] += 2 * h;
    p1[i] += h;
    m1[i] -= h;
    m2[i] -= 2 * h;
    dr[i] = (-radial_distance(G, p2) + 8 * radial_distance(G, p1) - 8 * radial_distance(G, m1) +
             radial_distance(G, m2)) /
            (12 * h);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G(v));
  if (!lu.isInvertible()) throw NumericalError("radial_gradient: metric singular");
  return lu.solve(dr);
}

VectorMetric pullback_metric(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map,
                             const MetricField& h, int domain_dim, DomainSpec domain,
                             double fd_step, std::string name) {
  if (!map) throw InvalidArgument("pullback_metric: empty map");
  if (domain_dim <= 0) throw InvalidArgument("pullback_metric: bad domain dimension");
  if (!(fd_step > 0)) throw InvalidArgument("pullback_metric: bad step");

  auto eval = [map, h, domain_dim, fd_step](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    Eigen::MatrixXd J(h.dim, domain_dim);
    for (int j = 0; j < domain_dim; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp[j] += fd_step;
      wm[j] -= fd_step;
      J.col(j) = (map(wp) - map(wm)) / (2.0 * fd_step);
    }
    const Eigen::MatrixXd hp = detail::metric_sym(h, map(w));
    return J.transpose() * hp * J;
  };
  return VectorMetric(domain_dim, eval, std::move(domain), FdProfile::Numeric, std::move(name));
}

VectorMetric gauss_metric_from_ambient(const VectorMetric& ambient, DomainSpec domain,
                                       const GeodesicOptions& opts, double jac_step,
                                       std::string name) {
  MetricField field = as_metric_field(ambient);
  const ChartPoint origin(Eigen::VectorXd::Zero(ambient.dim()));
  auto map = [field, origin, opts](const Eigen::VectorXd& w) {
    return riemannian_exp(field, origin, w, opts);
  };
  return pullback_metric(map, field, ambient.dim(), std::move(domain), jac_step, std::move(name));
}

} // namespace nhgeo
