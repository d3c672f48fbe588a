/* nhgeo — constrained kinetic geodesics and radial-chart metrics.
 *
 * C interface to the shared library. All functions are thread-safe as long
 * as each handle is used by one thread at a time. Functions returning
 * nhg_status set a thread-local error message readable via nhg_last_error()
 * on any status other than NHG_OK. Strings returned through char** output
 * parameters are heap-allocated and must be released with nhg_string_free().
 */
#ifndef NHGEO_H
#define NHGEO_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nhg_status {
  NHG_OK = 0,
  NHG_EINVAL = 1,   /* bad argument: shape, spec string, unknown id, parse */
  NHG_EDOMAIN = 2,  /* evaluation outside a declared domain of validity */
  NHG_ENUMERIC = 3, /* singular solve, PD loss, non-finite intermediate */
  NHG_ENOCONV = 4,  /* an iterative scheme stalled or ran out of iterations */
  NHG_EUNKNOWN = 5  /* unexpected failure */
} nhg_status;

typedef struct nhg_system nhg_system_t; /* a built-in constrained system */
typedef struct nhg_patch nhg_patch_t;   /* exponential map on a fiber domain */
typedef struct nhg_metric nhg_metric_t; /* metric on a fiber vector space */
typedef struct nhg_traj nhg_traj_t;     /* sampled trajectory */

/* ---- library ---- */

const char* nhg_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
const char* nhg_last_error(void);

void nhg_string_free(char* s);

/* ---- systems ---- */

/* id: "particle" | "disk". params_json: optional JSON object of numbers
 * (e.g. {"I": 2.0, "J": 0.5} for the disk), or NULL. */
nhg_status nhg_system_open(const char* id, const char* params_json, nhg_system_t** out);
void nhg_system_close(nhg_system_t* sys);

int nhg_system_dim(const nhg_system_t* sys);
int nhg_system_fiber_dim(const nhg_system_t* sys);

/* Base point coordinates; out must hold nhg_system_dim doubles. */
nhg_status nhg_system_base(const nhg_system_t* sys, double* out);

/* Registered ids as a JSON array. */
nhg_status nhg_system_list_json(char** out_json);

/* Notes attached to the system (reference-value discrepancies), JSON array
 * of {id, text}. */
nhg_status nhg_system_notes_json(const nhg_system_t* sys, char** out_json);

/* ---- trajectories ---- */

/* Integrates the constrained geodesic flow from (q0, v0) over [0, t_end]
 * with fixed-step RK4. q0/v0 hold nhg_system_dim doubles. project != 0
 * replaces v0 by its constraint-plane projection instead of rejecting
 * inadmissible velocities. */
nhg_status nhg_integrate(const nhg_system_t* sys, const double* q0, const double* v0,
                         double t_end, int steps, int project, nhg_traj_t** out);
void nhg_traj_close(nhg_traj_t* traj);

int nhg_traj_size(const nhg_traj_t* traj);
int nhg_traj_dim(const nhg_traj_t* traj);

/* Sample i. Any output pointer may be NULL; q/v hold nhg_traj_dim doubles.
 * speed is the kinetic norm of v at q, residual the sup-norm of the
 * constraint violation. */
nhg_status nhg_traj_sample(const nhg_traj_t* traj, int i, double* t, double* q, double* v,
                           double* speed, double* residual);

/* Aggregates over the whole trajectory. Either pointer may be NULL. */
nhg_status nhg_traj_diagnostics(const nhg_traj_t* traj, double* speed_drift,
                                double* max_constraint_residual);

/* ---- exponential-map patches ---- */

/* radius <= 0 keeps the system's default fiber domain; steps <= 0 keeps the
 * default integrator resolution. */
nhg_status nhg_patch_open(const nhg_system_t* sys, double radius, int steps,
                          nhg_patch_t** out);
void nhg_patch_close(nhg_patch_t* patch);

int nhg_patch_dim(const nhg_patch_t* patch);
int nhg_patch_fiber_dim(const nhg_patch_t* patch);
double nhg_patch_domain_radius(const nhg_patch_t* patch);

/* Endpoint of the fiber trajectory: w holds fiber_dim doubles, out_q dim. */
nhg_status nhg_patch_exp(const nhg_patch_t* patch, const double* w, double* out_q);

/* Fiber Jacobian at w: out holds dim * fiber_dim doubles, row-major. */
nhg_status nhg_patch_jacobian(const nhg_patch_t* patch, const double* w, double* out);

/* max_t |exp(t w) - c_w(t)| over a uniform grid: the radial-sweep check. */
nhg_status nhg_patch_rescaling_residual(const nhg_patch_t* patch, const double* w,
                                        double* out);

/* Inverts the patch map on its default coordinate selection. target_q holds
 * dim doubles, out_w fiber_dim; out_residual (nullable) receives the
 * full-coordinate membership residual. */
nhg_status nhg_patch_inverse(const nhg_patch_t* patch, const double* target_q,
                             double* out_w, double* out_residual);

/* ---- fiber metrics ---- */

/* spec: "flat[:k]" | "example53" | "remark21-conformal" |
 * "pullback-ambient:particle" | "pullback-gmod:disk[:closed|:integrated]".
 * The system segment may be omitted ("pullback-ambient" implies particle,
 * "pullback-gmod" implies disk) and "remark21" is accepted for the conformal
 * construction. params_json: optional JSON object of numbers (radius, I, J,
 * a, b, steps). */
nhg_status nhg_metric_open(const char* spec, const char* params_json, nhg_metric_t** out);

/* Metric carried onto the patch image, parametrized by the patch's default
 * coordinate selection: the pushforward of a fiber metric through the chart.
 * fiber_spec NULL or empty selects the constant fiber metric induced by the
 * system's kinetic metric (the Gram matrix of the chart basis). */
nhg_status nhg_metric_open_induced(const nhg_patch_t* patch, const char* fiber_spec,
                                   const char* fiber_params_json, nhg_metric_t** out);

void nhg_metric_close(nhg_metric_t* metric);

int nhg_metric_dim(const nhg_metric_t* metric);
double nhg_metric_domain_radius(const nhg_metric_t* metric);

/* Components at w: out holds k * k doubles, row-major. */
nhg_status nhg_metric_eval(const nhg_metric_t* metric, const double* w, double* out);

/* r(v) = sqrt(G(v)(v, v)). */
nhg_status nhg_metric_radial_distance(const nhg_metric_t* metric, const double* v,
                                      double* out);

/* Gradient of r at v; out holds k doubles. */
nhg_status nhg_metric_radial_gradient(const nhg_metric_t* metric, const double* v,
                                      double* out);

/* ---- verification ---- */

/* Radial-compatibility sweep over the metric's domain. grid_per_axis <= 0,
 * tol <= 0, margin < 0 select the defaults (21, profile tolerance, 0.05).
 * The JSON report carries verdict, max residual, argmax and node count. */
nhg_status nhg_gauss_check_json(const nhg_metric_t* metric, int grid_per_axis, double tol,
                                double margin, char** out_json);

/* The three equivalent radial-compatibility checks (component identity,
 * lines-are-geodesics, exponential-is-identity) with one verdict each.
 * options_json (nullable): {"grid_per_axis", "line_count", "geodesic_steps",
 * "margin"} as numbers. */
nhg_status nhg_equivalence_json(const nhg_metric_t* metric, const char* options_json,
                                char** out_json);

/* Full pipeline for one system + metric pair; see the JSON "stages" array.
 * params_json feeds both the system and the metric; options_json (nullable)
 * accepts {"grid_per_axis", "line_count", "geodesic_steps", "margin",
 * "exp_rays", "exp_radius", "exp_steps", "pushforward_steps",
 * "exp_tolerance", "minimize_nodes", "minimize_bump", "minimize_max_iters",
 * "minimize_tolerance", "minimize_seed", "run_minimize", "run_exp_grid"}. */
nhg_status nhg_verify_theorem_json(const char* system_id, const char* metric_spec,
                                   const char* params_json, const char* options_json,
                                   char** out_json);

/* Length minimization over curves from 0 to b (fiber_dim doubles) with
 * perturbed straight-line initialization. nodes/max_iters <= 0 and
 * bump/gtol <= 0 select defaults (15, 4000, 0.12, 1e-6). */
nhg_status nhg_minimize_json(const nhg_metric_t* metric, const double* b, int nodes,
                             double bump, unsigned seed, int max_iters, double gtol,
                             char** out_json);

/* The identity-check registry: metric specs, expectations, rationale, plus
 * the reference-value discrepancy notes. */
nhg_status nhg_registry_json(char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NHGEO_H */
