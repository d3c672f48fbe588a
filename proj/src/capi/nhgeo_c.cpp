#include "nhgeo/nhgeo.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>

#include "nhgeo/core/dynamics.hpp"
#include "nhgeo/core/exp_map.hpp"
#include "nhgeo/core/metrics_catalog.hpp"
#include "nhgeo/core/systems.hpp"
#include "nhgeo/core/vector_metric.hpp"
#include "nhgeo/core/verify.hpp"

using nlohmann::json;

struct nhg_system {
  nhgeo::SystemEntry entry;
};
struct nhg_patch {
  nhgeo::ExpMapPatch patch;
};
struct nhg_metric {
  nhgeo::VectorMetric metric;
};
struct nhg_traj {
  nhgeo::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Maps the C++ error hierarchy onto status codes; most-derived types first.
template <typename Fn>
nhg_status guarded(Fn&& fn) {
  try {
    fn();
    return NHG_OK;
  } catch (const nhgeo::ConvergenceError& e) {
    g_last_error = e.what();
    return NHG_ENOCONV;
  } catch (const nhgeo::NumericalError& e) {
    g_last_error = e.what();
    return NHG_ENUMERIC;
  } catch (const nhgeo::DomainError& e) {
    g_last_error = e.what();
    return NHG_EDOMAIN;
  } catch (const nhgeo::InvalidArgument& e) {
    g_last_error = e.what();
    return NHG_EINVAL;
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return NHG_EINVAL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NHG_EUNKNOWN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NHG_EUNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return NHG_EUNKNOWN;
  }
}

nhg_status fail_invalid(const char* msg) {
  g_last_error = msg;
  return NHG_EINVAL;
}

std::map<std::string, double> parse_params(const char* params_json) {
  std::map<std::string, double> params;
  if (!params_json || !*params_json) return params;
  const json j = json::parse(params_json);
  if (!j.is_object())
    throw nhgeo::InvalidArgument("params: expected a JSON object of numbers");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number())
      throw nhgeo::InvalidArgument("params: value of '" + key + "' is not a number");
    params[key] = value.get<double>();
  }
  return params;
}

Eigen::VectorXd to_vec(const double* data, int n) {
  if (!data) throw nhgeo::InvalidArgument("null array argument");
  return Eigen::Map<const Eigen::VectorXd>(data, n);
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

const char* verdict_name(nhgeo::GaussVerdict v) {
  switch (v) {
    case nhgeo::GaussVerdict::Pass: return "PASS";
    case nhgeo::GaussVerdict::Fail: return "FAIL";
    case nhgeo::GaussVerdict::NotRiemannian: return "NOT_RIEMANNIAN_ON_DOMAIN";
  }
  return "?";
}

nhgeo::EquivalenceOptions parse_equivalence_options(const char* options_json) {
  nhgeo::EquivalenceOptions opts;
  if (!options_json || !*options_json) return opts;
  const json j = json::parse(options_json);
  if (!j.is_object()) throw nhgeo::InvalidArgument("options: expected a JSON object");
  if (j.contains("grid_per_axis")) opts.grid_per_axis = j["grid_per_axis"].get<int>();
  if (j.contains("line_count")) opts.line_count = j["line_count"].get<int>();
  if (j.contains("geodesic_steps")) opts.geodesic_steps = j["geodesic_steps"].get<int>();
  if (j.contains("margin")) opts.margin = j["margin"].get<double>();
  return opts;
}

nhgeo::VerifyOptions parse_verify_options(const char* options_json) {
  nhgeo::VerifyOptions opts;
  if (!options_json || !*options_json) return opts;
  const json j = json::parse(options_json);
  if (!j.is_object()) throw nhgeo::InvalidArgument("options: expected a JSON object");
  auto geti = [&j](const char* key, int dflt) {
    return j.contains(key) ? j[key].get<int>() : dflt;
  };
  auto getd = [&j](const char* key, double dflt) {
    return j.contains(key) ? j[key].get<double>() : dflt;
  };
  opts.equivalence.grid_per_axis = geti("grid_per_axis", opts.equivalence.grid_per_axis);
  opts.equivalence.line_count = geti("line_count", opts.equivalence.line_count);
  opts.equivalence.geodesic_steps = geti("geodesic_steps", opts.equivalence.geodesic_steps);
  opts.equivalence.margin = getd("margin", opts.equivalence.margin);
  opts.exp_grid_rays = geti("exp_rays", opts.exp_grid_rays);
  opts.exp_grid_radius = getd("exp_radius", opts.exp_grid_radius);
  opts.exp_steps = geti("exp_steps", opts.exp_steps);
  opts.pushforward_steps = geti("pushforward_steps", opts.pushforward_steps);
  opts.exp_tolerance = getd("exp_tolerance", opts.exp_tolerance);
  opts.minimize_nodes = geti("minimize_nodes", opts.minimize_nodes);
  opts.minimize_bump = getd("minimize_bump", opts.minimize_bump);
  opts.minimize_max_iters = geti("minimize_max_iters", opts.minimize_max_iters);
  opts.minimize_tolerance = getd("minimize_tolerance", opts.minimize_tolerance);
  opts.minimize_seed = static_cast<unsigned>(geti("minimize_seed", opts.minimize_seed));
  if (j.contains("run_minimize")) opts.run_minimize = j["run_minimize"].get<bool>();
  if (j.contains("run_exp_grid")) opts.run_exp_grid = j["run_exp_grid"].get<bool>();
  return opts;
}

json equivalence_json(const nhgeo::EquivalenceReport& rep) {
  json j;
  j["checks"] = json::array();
  for (const auto& c : rep.checks) {
    json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["max_residual"] = c.max_residual;
    jc["tolerance"] = c.tolerance;
    jc["argmax"] = vec_json(c.argmax);
    j["checks"].push_back(jc);
  }
  j["pd_ok"] = rep.pd_ok;
  j["all_pass"] = rep.all_pass();
  j["all_fail"] = rep.all_fail();
  j["consistent"] = rep.consistent();
  return j;
}

} // namespace

extern "C" {

const char* nhg_version(void) { return "0.1.0"; }

const char* nhg_last_error(void) { return g_last_error.c_str(); }

void nhg_string_free(char* s) { std::free(s); }

/* ---- systems ---- */

nhg_status nhg_system_open(const char* id, const char* params_json, nhg_system_t** out) {
  if (!id || !out) return fail_invalid("nhg_system_open: null argument");
  return guarded([&] {
    auto params = parse_params(params_json);
    *out = new nhg_system{nhgeo::make_system(id, params)};
  });
}

void nhg_system_close(nhg_system_t* sys) { delete sys; }

int nhg_system_dim(const nhg_system_t* sys) { return sys ? sys->entry.system.dim() : -1; }

int nhg_system_fiber_dim(const nhg_system_t* sys) {
  return sys ? sys->entry.system.fiber_dim() : -1;
}

nhg_status nhg_system_base(const nhg_system_t* sys, double* out) {
  if (!sys || !out) return fail_invalid("nhg_system_base: null argument");
  return guarded([&] {
    Eigen::Map<Eigen::VectorXd>(out, sys->entry.base.dim()) = sys->entry.base.coords;
  });
}

nhg_status nhg_system_list_json(char** out_json) {
  if (!out_json) return fail_invalid("nhg_system_list_json: null argument");
  return guarded([&] {
    json j = json::array();
    for (const auto& id : nhgeo::system_ids()) j.push_back(id);
    *out_json = dup_string(j.dump());
  });
}

nhg_status nhg_system_notes_json(const nhg_system_t* sys, char** out_json) {
  if (!sys || !out_json) return fail_invalid("nhg_system_notes_json: null argument");
  return guarded([&] {
    json j = json::array();
    for (const auto& note : sys->entry.notes)
      j.push_back(json{{"id", note.id}, {"text", note.text}});
    *out_json = dup_string(j.dump());
  });
}

/* ---- trajectories ---- */

nhg_status nhg_integrate(const nhg_system_t* sys, const double* q0, const double* v0,
                         double t_end, int steps, int project, nhg_traj_t** out) {
  if (!sys || !out) return fail_invalid("nhg_integrate: null argument");
  return guarded([&] {
    const int n = sys->entry.system.dim();
    nhgeo::IntegrateOptions opts;
    if (steps > 0) opts.steps = steps;
    opts.policy = project ? nhgeo::VelocityPolicy::Project : nhgeo::VelocityPolicy::Strict;
    *out = new nhg_traj{nhgeo::integrate_nh_geodesic(
        sys->entry.system, nhgeo::ChartPoint(to_vec(q0, n)), to_vec(v0, n), t_end, opts)};
  });
}

void nhg_traj_close(nhg_traj_t* traj) { delete traj; }

int nhg_traj_size(const nhg_traj_t* traj) { return traj ? traj->traj.size() : -1; }

int nhg_traj_dim(const nhg_traj_t* traj) {
  if (!traj || traj->traj.samples.empty()) return -1;
  return static_cast<int>(traj->traj.samples.front().q.size());
}

nhg_status nhg_traj_sample(const nhg_traj_t* traj, int i, double* t, double* q, double* v,
                           double* speed, double* residual) {
  if (!traj) return fail_invalid("nhg_traj_sample: null trajectory");
  if (i < 0 || i >= traj->traj.size()) return fail_invalid("nhg_traj_sample: index out of range");
  return guarded([&] {
    const auto& s = traj->traj.samples[static_cast<size_t>(i)];
    if (t) *t = s.t;
    if (q) Eigen::Map<Eigen::VectorXd>(q, s.q.size()) = s.q;
    if (v) Eigen::Map<Eigen::VectorXd>(v, s.v.size()) = s.v;
    if (speed) *speed = s.speed;
    if (residual) *residual = s.constraint_residual;
  });
}

nhg_status nhg_traj_diagnostics(const nhg_traj_t* traj, double* speed_drift,
                                double* max_constraint_residual) {
  if (!traj) return fail_invalid("nhg_traj_diagnostics: null trajectory");
  if (speed_drift) *speed_drift = traj->traj.speed_drift;
  if (max_constraint_residual) *max_constraint_residual = traj->traj.max_constraint_residual;
  return NHG_OK;
}

/* ---- exponential-map patches ---- */

nhg_status nhg_patch_open(const nhg_system_t* sys, double radius, int steps,
                          nhg_patch_t** out) {
  if (!sys || !out) return fail_invalid("nhg_patch_open: null argument");
  return guarded([&] {
    nhgeo::PatchOptions opts;
    if (steps > 0) {
      opts.steps = steps;
      opts.metric_steps = steps;
    }
    *out = new nhg_patch{sys->entry.make_patch(radius > 0 ? radius : 0.0, opts)};
  });
}

void nhg_patch_close(nhg_patch_t* patch) { delete patch; }

int nhg_patch_dim(const nhg_patch_t* patch) { return patch ? patch->patch.dim() : -1; }

int nhg_patch_fiber_dim(const nhg_patch_t* patch) {
  return patch ? patch->patch.fiber_dim() : -1;
}

double nhg_patch_domain_radius(const nhg_patch_t* patch) {
  return patch ? patch->patch.domain().bounding_radius() : 0.0;
}

nhg_status nhg_patch_exp(const nhg_patch_t* patch, const double* w, double* out_q) {
  if (!patch || !out_q) return fail_invalid("nhg_patch_exp: null argument");
  return guarded([&] {
    const auto p = patch->patch.exp(to_vec(w, patch->patch.fiber_dim()));
    Eigen::Map<Eigen::VectorXd>(out_q, p.dim()) = p.coords;
  });
}

nhg_status nhg_patch_jacobian(const nhg_patch_t* patch, const double* w, double* out) {
  if (!patch || !out) return fail_invalid("nhg_patch_jacobian: null argument");
  return guarded([&] {
    const Eigen::MatrixXd J = patch->patch.jacobian(to_vec(w, patch->patch.fiber_dim()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, J.rows(), J.cols()) = J;
  });
}

nhg_status nhg_patch_rescaling_residual(const nhg_patch_t* patch, const double* w,
                                        double* out) {
  if (!patch || !out) return fail_invalid("nhg_patch_rescaling_residual: null argument");
  return guarded([&] {
    *out = patch->patch.rescaling_residual(to_vec(w, patch->patch.fiber_dim()));
  });
}

nhg_status nhg_patch_inverse(const nhg_patch_t* patch, const double* target_q,
                             double* out_w, double* out_residual) {
  if (!patch || !target_q || !out_w) return fail_invalid("nhg_patch_inverse: null argument");
  return guarded([&] {
    const auto res =
        patch->patch.inverse(nhgeo::ChartPoint(to_vec(target_q, patch->patch.dim())));
    Eigen::Map<Eigen::VectorXd>(out_w, res.w.size()) = res.w;
    if (out_residual) *out_residual = res.full_residual;
  });
}

/* ---- fiber metrics ---- */

nhg_status nhg_metric_open(const char* spec, const char* params_json, nhg_metric_t** out) {
  if (!spec || !out) return fail_invalid("nhg_metric_open: null argument");
  return guarded([&] {
    *out = new nhg_metric{nhgeo::make_metric(spec, parse_params(params_json))};
  });
}

nhg_status nhg_metric_open_induced(const nhg_patch_t* patch, const char* fiber_spec,
                                   const char* fiber_params_json, nhg_metric_t** out) {
  if (!patch || !out) return fail_invalid("nhg_metric_open_induced: null argument");
  return guarded([&] {
    const nhgeo::VectorMetric fiber =
        (fiber_spec && *fiber_spec)
            ? nhgeo::make_metric(fiber_spec, parse_params(fiber_params_json))
            : nhgeo::fiber_gram_metric(patch->patch);
    *out = new nhg_metric{nhgeo::induced_submanifold_metric(patch->patch, fiber)};
  });
}

void nhg_metric_close(nhg_metric_t* metric) { delete metric; }

int nhg_metric_dim(const nhg_metric_t* metric) { return metric ? metric->metric.dim() : -1; }

double nhg_metric_domain_radius(const nhg_metric_t* metric) {
  return metric ? metric->metric.domain().bounding_radius() : 0.0;
}

nhg_status nhg_metric_eval(const nhg_metric_t* metric, const double* w, double* out) {
  if (!metric || !out) return fail_invalid("nhg_metric_eval: null argument");
  return guarded([&] {
    const Eigen::MatrixXd m = metric->metric(to_vec(w, metric->metric.dim()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, m.rows(), m.cols()) = m;
  });
}

nhg_status nhg_metric_radial_distance(const nhg_metric_t* metric, const double* v,
                                      double* out) {
  if (!metric || !out) return fail_invalid("nhg_metric_radial_distance: null argument");
  return guarded([&] {
    *out = nhgeo::radial_distance(metric->metric, to_vec(v, metric->metric.dim()));
  });
}

nhg_status nhg_metric_radial_gradient(const nhg_metric_t* metric, const double* v,
                                      double* out) {
  if (!metric || !out) return fail_invalid("nhg_metric_radial_gradient: null argument");
  return guarded([&] {
    const Eigen::VectorXd g =
        nhgeo::radial_gradient(metric->metric, to_vec(v, metric->metric.dim()));
    Eigen::Map<Eigen::VectorXd>(out, g.size()) = g;
  });
}

/* ---- verification ---- */

nhg_status nhg_gauss_check_json(const nhg_metric_t* metric, int grid_per_axis, double tol,
                                double margin, char** out_json) {
  if (!metric || !out_json) return fail_invalid("nhg_gauss_check_json: null argument");
  return guarded([&] {
    const auto rep = nhgeo::check_gauss(metric->metric, grid_per_axis > 0 ? grid_per_axis : 21,
                                        tol > 0 ? tol : 0.0, margin >= 0 ? margin : 0.05);
    json j;
    j["metric"] = metric->metric.name();
    j["verdict"] = verdict_name(rep.verdict);
    j["max_abs_residual"] = rep.max_abs_residual;
    j["tolerance"] = rep.tolerance;
    j["points"] = rep.points;
    j["pd_ok"] = rep.pd_ok;
    if (rep.argmax_w.size() > 0) {
      j["argmax_w"] = vec_json(rep.argmax_w);
      j["argmax_direction"] = rep.argmax_z;
    }
    if (!rep.pd_ok) j["pd_failure_at"] = vec_json(rep.pd_failure_at);
    *out_json = dup_string(j.dump());
  });
}

nhg_status nhg_equivalence_json(const nhg_metric_t* metric, const char* options_json,
                                char** out_json) {
  if (!metric || !out_json) return fail_invalid("nhg_equivalence_json: null argument");
  return guarded([&] {
    const auto opts = parse_equivalence_options(options_json);
    const auto rep = nhgeo::check_key_equivalence(metric->metric, opts);
    json j = equivalence_json(rep);
    j["metric"] = metric->metric.name();
    *out_json = dup_string(j.dump());
  });
}

nhg_status nhg_verify_theorem_json(const char* system_id, const char* metric_spec,
                                   const char* params_json, const char* options_json,
                                   char** out_json) {
  if (!system_id || !metric_spec || !out_json)
    return fail_invalid("nhg_verify_theorem_json: null argument");
  return guarded([&] {
    const auto params = parse_params(params_json);
    std::map<std::string, double> system_params;
    for (const auto& [key, value] : params)
      if (key == "I" || key == "J" || key == "radius") system_params[key] = value;
    const auto entry = nhgeo::make_system(system_id, system_params);
    const auto opts = parse_verify_options(options_json);
    const auto rep = nhgeo::verify_theorem(entry, metric_spec, params, opts);
    json j = rep.to_json();
    json jp = json::object();
    for (const auto& [key, value] : params) jp[key] = value;
    j["params"] = jp;
    *out_json = dup_string(j.dump());
  });
}

nhg_status nhg_minimize_json(const nhg_metric_t* metric, const double* b, int nodes,
                             double bump, unsigned seed, int max_iters, double gtol,
                             char** out_json) {
  if (!metric || !b || !out_json) return fail_invalid("nhg_minimize_json: null argument");
  return guarded([&] {
    const auto& G = metric->metric;
    const int k = G.dim();
    const Eigen::VectorXd endpoint = to_vec(b, k);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(k);
    const int nn = nodes > 0 ? nodes : 15;
    const double bb = bump > 0 ? bump : 0.12;
    const auto init = nhgeo::perturbed_segment(zero, endpoint, nn, bb * endpoint.norm(), seed);

    nhgeo::MinimizeOptions mopts;
    if (max_iters > 0) mopts.max_iters = max_iters;
    if (gtol > 0) mopts.gtol = gtol;
    const bool numeric = G.profile() == nhgeo::FdProfile::Numeric;
    if (gtol <= 0 && numeric) mopts.gtol = 1e-5;
    mopts.grad_step = numeric ? 1e-4 : 1e-6;
    mopts.domain = &G.domain();
    const auto res = nhgeo::minimize_length(G, init, mopts);

    json j;
    j["metric"] = G.name();
    j["status"] = res.status == nhgeo::MinimizeStatus::Converged     ? "converged"
                  : res.status == nhgeo::MinimizeStatus::Stalled     ? "stalled"
                                                                     : "max-iterations";
    j["iterations"] = res.iterations;
    j["initial_length"] = res.initial_length;
    j["final_length"] = res.final_length;
    j["radial_length"] = std::sqrt(endpoint.dot(G(zero) * endpoint));
    j["recovery_sup_distance"] = nhgeo::sup_distance_to_segment(res.curve, zero, endpoint);
    j["nodes"] = json::array();
    for (const auto& node : res.curve.nodes) j["nodes"].push_back(vec_json(node));
    *out_json = dup_string(j.dump());
  });
}

nhg_status nhg_registry_json(char** out_json) {
  if (!out_json) return fail_invalid("nhg_registry_json: null argument");
  return guarded([&] {
    json j;
    j["metrics"] = json::array();
    for (const auto& item : nhgeo::theorem_registry())
      j["metrics"].push_back(
          json{{"spec", item.spec}, {"expect_pass", item.expect_pass}, {"why", item.why}});
    j["notes"] = json::array();
    for (const auto& note : nhgeo::registry_notes())
      j["notes"].push_back(json{{"id", note.id}, {"text", note.text}});
    *out_json = dup_string(j.dump());
  });
}

} // extern "C"
