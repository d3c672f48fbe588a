#include "nhgeo/core/systems.hpp"

#include <cmath>

#include "nhgeo/core/errors.hpp"

namespace nhgeo {

// ---------------------------------------------------------------- particle

Eigen::Vector3d particle_exp_closed_analytic(double u, double v) {
  return {(u / v) * std::asinh(v), v, (u / v) * (std::sqrt(v * v + 1.0) - 1.0)};
}

Eigen::Vector3d particle_exp_closed_series(double u, double v) {
  // asinh(v)/v = 1 - v^2/6 + 3v^4/40 - ...,  (sqrt(v^2+1)-1)/v = v/2 - v^3/8 + ...
  const double v2 = v * v;
  return {u * (1.0 - v2 / 6.0 + 3.0 * v2 * v2 / 40.0), v, u * (v / 2.0 - v * v2 / 8.0)};
}

Eigen::Vector3d particle_exp_closed(double u, double v) {
  return std::abs(v) <= 1e-4 ? particle_exp_closed_series(u, v)
                             : particle_exp_closed_analytic(u, v);
}

SystemEntry particle_system() {
  const int n = 3;
  MetricField g;
  g.dim = n;
  g.eval = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(n, n); };
  g.constant = true;
  g.name = "euclidean-r3";

  ConstraintField A;
  A.dim = n;
  A.corank = 1;
  // z' = y x'  <=>  (-y, 0, 1) . v = 0
  A.eval = [](const Eigen::VectorXd& q) {
    Eigen::MatrixXd m(1, 3);
    m << -q[1], 0.0, 1.0;
    return m;
  };
  A.partials = [](const Eigen::VectorXd&) {
    std::vector<Eigen::MatrixXd> d(3, Eigen::MatrixXd::Zero(1, 3));
    d[1](0, 0) = -1.0;
    return d;
  };
  A.name = "z'-equals-y-x'";

  SystemEntry e;
  e.id = "particle";
  e.system = make_nonholonomic_system("particle", std::move(g), std::move(A));
  e.base = ChartPoint(Eigen::Vector3d::Zero());
  Eigen::MatrixXd basis(3, 2);
  basis << 1, 0, 0, 1, 0, 0; // D_0 = span{d_x, d_y}
  e.chart = TangentChart{e.base, basis, {"u", "v"}};
  e.domain = DomainSpec::cube(1.0);
  e.default_selection = {0, 1}; // (x, y) parametrize the image
  e.closed_exp = [](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return particle_exp_closed(w[0], w[1]);
  };
  e.notes.push_back(
      {"particle-fiber-jacobian",
       "Previously reported value for the fiber differential at (u,v)=(1,0) disagrees with "
       "direct differentiation of the closed endpoint map; the derived value "
       "[[1,0],[0,1],[0,1/2]] is asserted here."});
  e.notes.push_back(
      {"particle-chart-metric-spot",
       "Previously reported spot value E(x,1) ~ 1.2872 appears to be a stale rounding; the "
       "closed component gives 1/asinh(1)^2 = 1.2873005 and that value is asserted here."});
  return e;
}

// -------------------------------------------------------------------- disk

Eigen::Vector4d disk_exp_closed_analytic(double u, double v) {
  return {(u / v) * std::sin(v), (u / v) * (1.0 - std::cos(v)), u, v};
}

Eigen::Vector4d disk_exp_closed_series(double u, double v) {
  // sin(v)/v = 1 - v^2/6 + v^4/120,  (1-cos v)/v = v/2 - v^3/24
  const double v2 = v * v;
  return {u * (1.0 - v2 / 6.0 + v2 * v2 / 120.0), u * (v / 2.0 - v * v2 / 24.0), u, v};
}

Eigen::Vector4d disk_exp_closed(double u, double v) {
  return std::abs(v) <= 1e-4 ? disk_exp_closed_series(u, v) : disk_exp_closed_analytic(u, v);
}

SystemEntry disk_system(double I, double J) {
  if (!(I > 0) || !(J > 0)) throw InvalidArgument("disk system: inertias must be positive");
  const int n = 4; // chart (x, y, theta, phi)
  MetricField g;
  g.dim = n;
  Eigen::Vector4d diag(1.0, 1.0, I, J);
  g.eval = [diag](const Eigen::VectorXd&) -> Eigen::MatrixXd { return diag.asDiagonal(); };
  g.constant = true;
  g.name = "disk-kinetic";

  ConstraintField A;
  A.dim = n;
  A.corank = 2;
  // rolling without slipping: x' = cos(phi) theta',  y' = sin(phi) theta'
  A.eval = [](const Eigen::VectorXd& q) {
    Eigen::MatrixXd m(2, 4);
    m << 1, 0, -std::cos(q[3]), 0, 0, 1, -std::sin(q[3]), 0;
    return m;
  };
  A.partials = [](const Eigen::VectorXd& q) {
    std::vector<Eigen::MatrixXd> d(4, Eigen::MatrixXd::Zero(2, 4));
    d[3](0, 2) = std::sin(q[3]);
    d[3](1, 2) = -std::cos(q[3]);
    return d;
  };
  A.name = "rolling";

  SystemEntry e;
  e.id = "disk";
  e.system = make_nonholonomic_system("disk", std::move(g), std::move(A));
  e.base = ChartPoint(Eigen::Vector4d::Zero());
  Eigen::MatrixXd basis(4, 2);
  basis << 1, 0, 0, 0, 1, 0, 0, 1; // D_0 = span{d_x + d_theta, d_phi}
  e.chart = TangentChart{e.base, basis, {"u", "v"}};
  // G(u,0) = J - u^2/4 forces |u| < 2 sqrt(J); 0.9 of that, capped at pi
  e.domain = DomainSpec::cube(std::min(M_PI, 1.8 * std::sqrt(J)));
  e.default_selection = {0, 3}; // (x, phi) parametrize the image
  e.closed_exp = [](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return disk_exp_closed(w[0], w[1]);
  };

  MetricField gmod;
  gmod.dim = n;
  // indefinite modified form whose free trajectories with admissible initial
  // velocities reproduce the rolling dynamics
  gmod.eval = [I, J](const Eigen::VectorXd& q) {
    const double c = std::cos(q[3]), s = std::sin(q[3]);
    Eigen::MatrixXd m(4, 4);
    m << -1, 0, c, 0, 0, -1, s, 0, c, s, I, 0, 0, 0, 0, J;
    return m;
  };
  gmod.partials = [](const Eigen::VectorXd& q) {
    const double c = std::cos(q[3]), s = std::sin(q[3]);
    std::vector<Eigen::MatrixXd> d(4, Eigen::MatrixXd::Zero(4, 4));
    d[3](0, 2) = -s;
    d[3](2, 0) = -s;
    d[3](1, 2) = c;
    d[3](2, 1) = c;
    return d;
  };
  gmod.policy = SignaturePolicy::AllowIndefinite;
  gmod.name = "disk-gmod";
  e.aux_metrics["gmod"] = gmod;

  e.params = {{"I", I}, {"J", J}};
  e.notes.push_back(
      {"disk-pullback-component",
       "Previously reported closed form for the uu-component of the modified-metric pullback "
       "disagrees with direct pullback; the derived E = (I+1) - B(v)/v^2 with "
       "B(v) = v^2 + 2 - 2cos(v) - 2v sin(v) is asserted here."});
  e.notes.push_back(
      {"disk-pullback-limit",
       "Previously reported v -> 0 limit I du^2 + J dv^2 of the pullback disagrees with the "
       "series of the derived components; the limit (I+1) du^2 + J dv^2 is asserted here."});
  return e;
}

// ---------------------------------------------------------------- registry

SystemEntry make_system(const std::string& id, const std::map<std::string, double>& params) {
  auto get = [&params](const char* key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
  };
  for (const auto& [key, value] : params) {
    (void)value;
    if (key != "I" && key != "J" && key != "radius")
      throw InvalidArgument("make_system: unknown parameter '" + key + "'");
  }

  SystemEntry e;
  if (id == "particle") {
    e = particle_system();
    if (params.count("I") || params.count("J"))
      throw InvalidArgument("make_system: particle takes no inertia parameters");
  } else if (id == "disk") {
    e = disk_system(get("I", 1.0), get("J", 1.0));
  } else {
    throw UnknownIdError("make_system: unknown system '" + id + "' (try: particle, disk)");
  }
  const double r = get("radius", 0.0);
  if (r > 0) e.domain = DomainSpec::cube(r);
  return e;
}

std::vector<std::string> system_ids() { return {"particle", "disk"}; }

ExpMapPatch SystemEntry::make_patch(double radius, PatchOptions opts) const {
  DomainSpec dom = domain;
  if (radius > 0) {
    dom = domain.kind() == DomainSpec::Kind::Ball ? DomainSpec::ball(radius)
                                                  : DomainSpec::cube(radius);
  }
  ExpMapPatch patch(system, chart, dom, opts);
  if (!default_selection.empty()) patch.set_default_selection(default_selection);
  return patch;
}

// ------------------------------------------------------------ plane metric

VectorMetric example_plane_metric(double radius) {
  if (!(radius > 0) || !(radius < 1))
    throw InvalidArgument("example_plane_metric: radius must lie in (0, 1)");
  auto eval = [](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    const double u = w[0], v = w[1];
    if (u * u + v * v >= 1.0 - 1e-12)
      throw DomainError("example_plane_metric: degenerate on the unit circle");
    Eigen::Matrix2d m;
    m << 1.0 - v * v, u * v, u * v, 1.0 - u * u;
    return m;
  };
  auto partials = [](const Eigen::VectorXd& w) {
    const double u = w[0], v = w[1];
    std::vector<Eigen::MatrixXd> d(2);
    Eigen::Matrix2d du, dv;
    du << 0, v, v, -2.0 * u;
    dv << -2.0 * v, u, u, 0;
    d[0] = du;
    d[1] = dv;
    return d;
  };
  return VectorMetric(2, eval, DomainSpec::ball(radius), FdProfile::Analytic,
                      "plane-degenerate-circle", partials);
}

PlaneChristoffel example_plane_christoffel(double u, double v) {
  const double D = 1.0 - u * u - v * v;
  if (!(std::abs(D) > 1e-14))
    throw DomainError("example_plane_christoffel: degenerate on the unit circle");
  PlaneChristoffel c;
  c.uuu = -2.0 * u * v * v / D;
  c.uuv = v * (2.0 * u * u - 1.0) / D;
  c.uvv = 2.0 * u * (1.0 - u * u) / D;
  c.vuu = 2.0 * v * (1.0 - v * v) / D;
  c.vuv = u * (2.0 * v * v - 1.0) / D;
  c.vvv = -2.0 * u * u * v / D;
  return c;
}

// -------------------------------------------------- closed chart components

Metric2 particle_chart_metric_closed(double x, double y) {
  Metric2 m;
  if (std::abs(y) <= 1e-4) {
    const double y2 = y * y;
    m.E = 1.0 + y2 / 3.0 - y2 * y2 / 15.0;
    m.F = x * y * (1.0 / 3.0 - 2.0 * y2 / 15.0);
    m.G = 1.0 + x * x * y2 / 9.0;
    return m;
  }
  const double s = std::asinh(y);
  const double r = std::sqrt(y * y + 1.0);
  m.E = y * y / (s * s);
  m.F = x * y * (s * r - y) / (r * s * s * s);
  const double t = s - y / r;
  m.G = x * x * t * t / (s * s * s * s) + 1.0;
  return m;
}

// Bracket quotients B/v^k and their v-derivatives in one evaluation, with a
// series branch below |v| = 0.05 where the analytic form cancels.
namespace {

struct BracketVals {
  double bv2, bv3, bv4;    // B/v^2, B/v^3, B/v^4
  double dbv2, dbv3, dbv4; // d/dv of the above
};

BracketVals bracket_vals(double v) {
  BracketVals b;
  if (std::abs(v) < 0.05) {
    const double v2 = v * v;
    // B = v^4/4 - v^6/72 + v^8/2880 - v^10/201600
    b.bv4 = 0.25 - v2 / 72.0 + v2 * v2 / 2880.0 - v2 * v2 * v2 / 201600.0;
    b.bv3 = v * b.bv4;
    b.bv2 = v2 * b.bv4;
    b.dbv2 = v / 2.0 - v * v2 / 18.0 + v * v2 * v2 / 480.0;
    b.dbv3 = 0.25 - v2 / 24.0 + v2 * v2 / 576.0;
    b.dbv4 = -v / 36.0 + v * v2 / 720.0 - v * v2 * v2 / 33600.0;
    return b;
  }
  const double B = v * v + 2.0 - 2.0 * std::cos(v) - 2.0 * v * std::sin(v);
  const double Bp = 2.0 * v * (1.0 - std::cos(v));
  const double v2 = v * v;
  b.bv2 = B / v2;
  b.bv3 = B / (v2 * v);
  b.bv4 = B / (v2 * v2);
  b.dbv2 = Bp / v2 - 2.0 * b.bv3;
  b.dbv3 = Bp / (v2 * v) - 3.0 * b.bv4;
  b.dbv4 = Bp / (v2 * v2) - 4.0 * B / (v2 * v2 * v);
  return b;
}

} // namespace

double disk_pullback_bracket(double v) {
  if (std::abs(v) < 0.05) {
    const double v2 = v * v;
    return v2 * v2 * (0.25 - v2 / 72.0 + v2 * v2 / 2880.0 - v2 * v2 * v2 / 201600.0);
  }
  return v * v + 2.0 - 2.0 * std::cos(v) - 2.0 * v * std::sin(v);
}

Metric2 disk_pullback_closed(double u, double v, double I, double J) {
  const BracketVals b = bracket_vals(v);
  return {I + 1.0 - b.bv2, u * b.bv3, J - u * u * b.bv4};
}

std::vector<RegistryNote> registry_notes() {
  std::vector<RegistryNote> all;
  for (const auto& e : {particle_system(), disk_system(1.0, 1.0)})
    for (const auto& n : e.notes) all.push_back(n);
  return all;
}

namespace detail_systems {

// v-derivatives of the pullback components, shared with the metric catalog.
Metric2 disk_pullback_closed_dv(double u, double v) {
  const BracketVals b = bracket_vals(v);
  return {-b.dbv2, u * b.dbv3, -u * u * b.dbv4};
}

Metric2 disk_pullback_closed_du(double u, double v) {
  const BracketVals b = bracket_vals(v);
  return {0.0, b.bv3, -2.0 * u * b.bv4};
}

} // namespace detail_systems

} // namespace nhgeo
