#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nhgeo/core/domain.hpp"
#include "nhgeo/core/exp_map.hpp"
#include "nhgeo/core/system.hpp"
#include "nhgeo/core/vector_metric.hpp"

namespace nhgeo {

// A remark attached to a registry entry: documents a place where previously
// reported reference values disagree with direct derivation, and which side
// this library asserts.
struct RegistryNote {
  std::string id;
  std::string text;
};

// A built-in system: the dynamics plus the base point, fiber chart, fiber
// domain, default inversion coordinates, closed-form exponential oracle and
// any auxiliary ambient metrics used for pullbacks.
struct SystemEntry {
  std::string id;
  NonholonomicSystem system;
  ChartPoint base;
  TangentChart chart;
  DomainSpec domain;
  std::vector<int> default_selection;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> closed_exp; // null if none
  std::map<std::string, MetricField> aux_metrics; // e.g. "gmod" for the disk
  std::map<std::string, double> params;
  std::vector<RegistryNote> notes;

  ExpMapPatch make_patch(double radius = 0.0, PatchOptions opts = {}) const;
};

// Free particle in R^3 with the flat kinetic metric and the nonintegrable
// constraint z' = y x'. Fiber coordinates (u, v) over the basis {d_x, d_y}.
SystemEntry particle_system();

// Vertically rolling disk: chart (x, y, theta, phi), kinetic metric
// diag(1, 1, I, J), rolling constraints x' = cos(phi) theta',
// y' = sin(phi) theta'. Fiber coordinates (u, v) = (theta', phi').
SystemEntry disk_system(double I = 1.0, double J = 1.0);

// Registry lookup by id ("particle", "disk"); params feed the disk inertia.
SystemEntry make_system(const std::string& id, const std::map<std::string, double>& params = {});
std::vector<std::string> system_ids();

// Closed-form exponentials (the oracles for the integrators). Both switch to
// series branches near v = 0; the *_branch variants expose the two paths so
// the continuity of the switch is testable.
Eigen::Vector3d particle_exp_closed(double u, double v);
Eigen::Vector3d particle_exp_closed_analytic(double u, double v);
Eigen::Vector3d particle_exp_closed_series(double u, double v);

Eigen::Vector4d disk_exp_closed(double u, double v);
Eigen::Vector4d disk_exp_closed_analytic(double u, double v);
Eigen::Vector4d disk_exp_closed_series(double u, double v);

// Radially compatible plane metric degenerating on the unit circle:
//   (1 - v^2) du (x) du + u v (du (x) dv + dv (x) du) + (1 - u^2) dv (x) dv.
// Evaluation on or outside the unit circle is a domain error.
VectorMetric example_plane_metric(double radius = 0.9);

// Closed-form Levi-Civita symbols of example_plane_metric (denominators
// u^2 + v^2 - 1): the independent oracle for christoffel_at.
struct PlaneChristoffel {
  double uuu, uuv, uvv; // Gamma^u_{uu}, Gamma^u_{uv}, Gamma^u_{vv}
  double vuu, vuv, vvv; // Gamma^v_{uu}, Gamma^v_{uv}, Gamma^v_{vv}
};
PlaneChristoffel example_plane_christoffel(double u, double v);

// Closed-form components of the particle's radial-chart metric in induced
// coordinates (x, y): E dx^2 + 2 F dx dy + G dy^2.
struct Metric2 {
  double E, F, G;
};
Metric2 particle_chart_metric_closed(double x, double y);

// Closed-form components of the disk's modified-metric pullback in fiber
// coordinates (u, v), all driven by the bracket
//   B(v) = v^2 + 2 - 2 cos v - 2 v sin v:
//   E = (I+1) - B/v^2,  F = u B / v^3,  G = J - u^2 B / v^4.
// They satisfy E u + F v = (I+1) u and F u + G v = J v identically.
Metric2 disk_pullback_closed(double u, double v, double I, double J);
double disk_pullback_bracket(double v);

namespace detail_systems {
// Coordinate derivatives of the closed pullback components (E, F, G), used
// to hand the metric catalog analytic partials. Inertias drop out.
Metric2 disk_pullback_closed_du(double u, double v);
Metric2 disk_pullback_closed_dv(double u, double v);
} // namespace detail_systems

// Full catalog of reference-value discrepancy notes.
std::vector<RegistryNote> registry_notes();

} // namespace nhgeo
