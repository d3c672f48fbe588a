// nhgeo command-line front end. Links the shared C API only; JSON plumbing
// and argument parsing are local conveniences.
#include <nhgeo/nhgeo.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;    // bad arguments or runtime API errors
constexpr int kExitVerdict = 3;  // clean run whose measured verdict is "fail"

[[noreturn]] void die_api(const std::string& what, nhg_status st) {
  std::fprintf(stderr, "nhgeo: %s failed (status %d): %s\n", what.c_str(),
               static_cast<int>(st), nhg_last_error());
  std::exit(kExitUsage);
}

void check(nhg_status st, const std::string& what) {
  if (st != NHG_OK) die_api(what, st);
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  nhg_string_free(s);
  return out;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f && f != stdout) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_output(const std::string& path) {
  if (path.empty()) return FilePtr(stdout);
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    std::fprintf(stderr, "nhgeo: cannot open '%s' for writing\n", path.c_str());
    std::exit(kExitUsage);
  }
  return FilePtr(f);
}

void write_csv_row(std::FILE* f, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    std::fprintf(f, "%s%s", cells[i].c_str(), i + 1 < cells.size() ? "," : "\n");
}

// Owned handles.
struct System {
  nhg_system_t* h = nullptr;
  ~System() { nhg_system_close(h); }
};
struct Patch {
  nhg_patch_t* h = nullptr;
  ~Patch() { nhg_patch_close(h); }
};
struct Metric {
  nhg_metric_t* h = nullptr;
  ~Metric() { nhg_metric_close(h); }
};
struct Traj {
  nhg_traj_t* h = nullptr;
  ~Traj() { nhg_traj_close(h); }
};

// Shared option bundles ------------------------------------------------------

json parse_json_arg(const std::string& text, const char* what) {
  if (text.empty()) return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::fprintf(stderr, "nhgeo: %s is not a JSON object: %s\n", what, text.c_str());
    std::exit(kExitUsage);
  }
  return j;
}

// Frequently used numeric parameters, exposed as dedicated flags. A set flag
// overrides the same key inside --params.
struct ParamOverrides {
  double radius = std::nan("");
  double inertia_spin = std::nan("");  // --I
  double inertia_steer = std::nan(""); // --J

  std::string merge_into(const std::string& params_text) const {
    json j = parse_json_arg(params_text, "--params");
    if (!std::isnan(radius)) j["radius"] = radius;
    if (!std::isnan(inertia_spin)) j["I"] = inertia_spin;
    if (!std::isnan(inertia_steer)) j["J"] = inertia_steer;
    return j.empty() ? std::string() : j.dump();
  }
};

void add_param_overrides(CLI::App* cmd, ParamOverrides& po) {
  cmd->add_option("--radius", po.radius, "Domain radius parameter (overrides --params)");
  cmd->add_option("--I", po.inertia_spin, "Disk spin inertia (overrides --params)");
  cmd->add_option("--J", po.inertia_steer, "Disk steering inertia (overrides --params)");
}

struct SystemArgs {
  std::string id;
  std::string params; // JSON object
};

void add_system_args(CLI::App* cmd, SystemArgs& args) {
  cmd->add_option("--system", args.id, "System id (particle, disk)")->required();
  cmd->add_option("--params", args.params,
                  "JSON object of numeric parameters, e.g. '{\"I\":2,\"J\":0.5}'");
}

struct MetricArgs {
  std::string spec;
  std::string params;
};

void add_metric_args(CLI::App* cmd, MetricArgs& args) {
  cmd->add_option("--metric", args.spec,
                  "Metric spec (flat[:k], example53, remark21-conformal, "
                  "pullback-ambient[:particle], pullback-gmod[:disk][:closed|:integrated])")
      ->required();
  cmd->add_option("--params", args.params, "JSON object of numeric parameters");
}

// Subcommand runners ---------------------------------------------------------

int run_simulate(const SystemArgs& sys_args, const std::vector<double>& q0_in,
                 const std::vector<double>& v0, double t_end, int steps, bool project,
                 const std::string& output, bool as_json) {
  System sys;
  check(nhg_system_open(sys_args.id.c_str(), sys_args.params.c_str(), &sys.h),
        "system open");
  const int n = nhg_system_dim(sys.h);

  std::vector<double> q0 = q0_in;
  if (q0.empty()) {
    q0.resize(static_cast<size_t>(n));
    check(nhg_system_base(sys.h, q0.data()), "system base");
  }
  if (static_cast<int>(q0.size()) != n || static_cast<int>(v0.size()) != n) {
    std::fprintf(stderr, "nhgeo: q0/v0 must have %d components\n", n);
    return kExitUsage;
  }

  Traj traj;
  check(nhg_integrate(sys.h, q0.data(), v0.data(), t_end, steps, project ? 1 : 0, &traj.h),
        "integrate");

  double drift = 0.0, cres = 0.0;
  check(nhg_traj_diagnostics(traj.h, &drift, &cres), "diagnostics");

  auto out = open_output(output);
  if (as_json) {
    json j;
    j["system"] = sys_args.id;
    j["config"] = {{"system", sys_args.id},
                   {"params", parse_json_arg(sys_args.params, "--params")},
                   {"q0", q0},
                   {"v0", v0},
                   {"t", t_end},
                   {"steps", steps},
                   {"project", project}};
    j["steps"] = steps;
    j["t_end"] = t_end;
    j["samples"] = nhg_traj_size(traj.h);
    j["speed_drift"] = drift;
    j["max_constraint_residual"] = cres;
    std::vector<double> q(static_cast<size_t>(n)), v(static_cast<size_t>(n));
    double t = 0.0;
    check(nhg_traj_sample(traj.h, nhg_traj_size(traj.h) - 1, &t, q.data(), v.data(),
                          nullptr, nullptr),
          "trajectory sample");
    j["endpoint"] = q;
    j["endpoint_velocity"] = v;
    std::fprintf(out.get(), "%s\n", j.dump(2).c_str());
    return kExitOk;
  }

  std::vector<std::string> header = {"t"};
  for (int i = 0; i < n; ++i) header.push_back("q" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) header.push_back("v" + std::to_string(i + 1));
  header.push_back("speed");
  header.push_back("constraint_residual");
  write_csv_row(out.get(), header);

  const int total = nhg_traj_size(traj.h);
  std::vector<double> q(static_cast<size_t>(n)), v(static_cast<size_t>(n));
  for (int i = 0; i < total; ++i) {
    double t = 0.0, speed = 0.0, res = 0.0;
    check(nhg_traj_sample(traj.h, i, &t, q.data(), v.data(), &speed, &res),
          "trajectory sample");
    std::vector<std::string> row = {fmt17(t)};
    for (double x : q) row.push_back(fmt17(x));
    for (double x : v) row.push_back(fmt17(x));
    row.push_back(fmt17(speed));
    row.push_back(fmt17(res));
    write_csv_row(out.get(), row);
  }
  std::fprintf(stderr, "speed drift %.3g, max constraint residual %.3g\n", drift, cres);
  return kExitOk;
}

int run_expmap_grid(const SystemArgs& sys_args, double radius, int steps, int per_axis,
                    double margin, const std::string& output) {
  System sys;
  check(nhg_system_open(sys_args.id.c_str(), sys_args.params.c_str(), &sys.h),
        "system open");
  Patch patch;
  check(nhg_patch_open(sys.h, radius, steps, &patch.h), "patch open");
  const int k = nhg_patch_fiber_dim(patch.h);
  const int n = nhg_patch_dim(patch.h);
  const double r = nhg_patch_domain_radius(patch.h) * (1.0 - margin);
  if (k != 2) {
    std::fprintf(stderr, "nhgeo: expmap-grid supports two-dimensional fibers\n");
    return kExitUsage;
  }

  auto out = open_output(output);
  std::vector<std::string> header = {"w1", "w2"};
  for (int i = 0; i < n; ++i) header.push_back("q" + std::to_string(i + 1));
  write_csv_row(out.get(), header);

  std::vector<double> q(static_cast<size_t>(n));
  for (int a = 0; a < per_axis; ++a) {
    for (int b = 0; b < per_axis; ++b) {
      const double w[2] = {-r + 2.0 * r * a / (per_axis - 1),
                           -r + 2.0 * r * b / (per_axis - 1)};
      check(nhg_patch_exp(patch.h, w, q.data()), "patch exp");
      std::vector<std::string> row = {fmt17(w[0]), fmt17(w[1])};
      for (double x : q) row.push_back(fmt17(x));
      write_csv_row(out.get(), row);
    }
  }
  return kExitOk;
}

int run_gauss_check(const MetricArgs& margs, const ParamOverrides& po, int grid, double tol,
                    double margin, const std::string& output) {
  const std::string params = po.merge_into(margs.params);
  Metric metric;
  check(nhg_metric_open(margs.spec.c_str(), params.c_str(), &metric.h), "metric open");
  char* raw = nullptr;
  check(nhg_gauss_check_json(metric.h, grid, tol, margin, &raw), "gauss check");
  const json j = json::parse(take_string(raw));

  auto out = open_output(output);
  json full = j;
  full["spec"] = margs.spec;
  full["config"] = {{"grid", grid}, {"tol", tol}, {"margin", margin},
                    {"params", parse_json_arg(params, "--params")}};
  std::fprintf(out.get(), "%s\n", full.dump(2).c_str());
  return j["verdict"] == "PASS" ? kExitOk : kExitVerdict;
}

int run_pullback(const SystemArgs& sys_args, const std::string& fiber_spec,
                 const std::string& fiber_params, double radius, int steps, int per_axis,
                 double extent1, double extent2, const std::string& output) {
  System sys;
  check(nhg_system_open(sys_args.id.c_str(), sys_args.params.c_str(), &sys.h),
        "system open");
  Patch patch;
  check(nhg_patch_open(sys.h, radius, steps, &patch.h), "patch open");
  Metric metric;
  check(nhg_metric_open_induced(patch.h, fiber_spec.c_str(), fiber_params.c_str(),
                                &metric.h),
        "induced metric open");
  const int k = nhg_metric_dim(metric.h);
  if (k != 2) {
    std::fprintf(stderr, "nhgeo: pullback grids support two-dimensional fibers\n");
    return kExitUsage;
  }

  auto out = open_output(output);
  write_csv_row(out.get(), {"s1", "s2", "g11", "g12", "g22"});
  std::vector<double> g(static_cast<size_t>(k) * k);
  for (int a = 0; a < per_axis; ++a) {
    for (int b = 0; b < per_axis; ++b) {
      const double s[2] = {-extent1 + 2.0 * extent1 * a / (per_axis - 1),
                           -extent2 + 2.0 * extent2 * b / (per_axis - 1)};
      check(nhg_metric_eval(metric.h, s, g.data()), "induced metric eval");
      write_csv_row(out.get(),
                    {fmt17(s[0]), fmt17(s[1]), fmt17(g[0]), fmt17(g[1]), fmt17(g[3])});
    }
  }
  return kExitOk;
}

int run_verify(const SystemArgs& sys_args, const ParamOverrides& po,
               const std::string& metric_spec, const std::string& options, bool raw_json,
               const std::string& output) {
  const std::string params = po.merge_into(sys_args.params);
  char* raw = nullptr;
  check(nhg_verify_theorem_json(sys_args.id.c_str(), metric_spec.c_str(), params.c_str(),
                                options.c_str(), &raw),
        "verify");
  const json j = json::parse(take_string(raw));

  auto out = open_output(output);
  if (raw_json) {
    json full = j;
    full["options"] = parse_json_arg(options, "--options");
    std::fprintf(out.get(), "%s\n", full.dump(2).c_str());
  } else {
    std::fprintf(out.get(), "system %s, metric %s (expected to %s)\n",
                 j["system"].get<std::string>().c_str(),
                 j["metric"].get<std::string>().c_str(),
                 j["expected_pass"].get<bool>() ? "pass" : "fail");
    for (const auto& s : j["stages"]) {
      const std::string status = s["status"].get<std::string>();
      std::fprintf(out.get(), "  [%-7s] %-22s", status.c_str(),
                   s["name"].get<std::string>().c_str());
      if (status != "skipped")
        std::fprintf(out.get(), " max residual %.3g (tolerance %.3g)",
                     s["max_residual"].get<double>(), s["tolerance"].get<double>());
      const std::string detail = s["detail"].get<std::string>();
      if (!detail.empty()) std::fprintf(out.get(), "  -- %s", detail.c_str());
      std::fprintf(out.get(), "\n");
    }
    std::fprintf(out.get(), "overall: %s (%s)\n",
                 j["overall_pass"].get<bool>() ? "PASS" : "FAIL",
                 j["as_expected"].get<bool>() ? "as expected" : "NOT as expected");
  }
  if (!j["as_expected"].get<bool>()) return kExitUsage;
  return j["overall_pass"].get<bool>() ? kExitOk : kExitVerdict;
}

int run_minimize(const MetricArgs& margs, const ParamOverrides& po,
                 const std::vector<double>& endpoint, int nodes, double bump, unsigned seed,
                 int max_iters, double gtol, const std::string& output) {
  const std::string params = po.merge_into(margs.params);
  Metric metric;
  check(nhg_metric_open(margs.spec.c_str(), params.c_str(), &metric.h), "metric open");
  if (static_cast<int>(endpoint.size()) != nhg_metric_dim(metric.h)) {
    std::fprintf(stderr, "nhgeo: endpoint must have %d components\n",
                 nhg_metric_dim(metric.h));
    return kExitUsage;
  }
  char* raw = nullptr;
  check(nhg_minimize_json(metric.h, endpoint.data(), nodes, bump, seed, max_iters, gtol,
                          &raw),
        "minimize");
  const json j = json::parse(take_string(raw));
  auto out = open_output(output);
  json full = j;
  full["config"] = {{"metric", margs.spec},
                    {"params", parse_json_arg(params, "--params")},
                    {"endpoint", endpoint},
                    {"nodes", nodes},
                    {"bump", bump},
                    {"seed", seed},
                    {"max_iters", max_iters},
                    {"gtol", gtol}};
  std::fprintf(out.get(), "%s\n", full.dump(2).c_str());
  // Non-convergence is reported in the JSON status, not via the exit code.
  return kExitOk;
}

// Merge mode: consolidate verification reports and trajectory CSVs written by
// earlier runs into <dir>/report.json plus per-figure plot-data files
// (t and coordinate columns only, one row per source sample).
int run_report_merge(const std::string& dir, const std::string& output) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    std::fprintf(stderr, "nhgeo: '%s' is not a directory\n", dir.c_str());
    return kExitUsage;
  }
  char* raw = nullptr;
  check(nhg_registry_json(&raw), "registry");
  const json registry = json::parse(take_string(raw));

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  json reports = json::object();
  json plots = json::array();
  for (const auto& p : files) {
    if (p.extension() == ".json" && p.filename() != "report.json") {
      std::ifstream in(p);
      json j = json::parse(in, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("stages"))
        reports[p.filename().string()] = j;
    } else if (p.extension() == ".csv" &&
               p.stem().string().rfind("_plot") == std::string::npos) {
      std::ifstream in(p);
      std::string header;
      if (!std::getline(in, header) || header.rfind("t,", 0) != 0) continue;
      const long cols = 1 + std::count(header.begin(), header.end(), ',');
      const long n = (cols - 3) / 2; // t, q..., v..., speed, residual
      if (n <= 0 || cols != 3 + 2 * n) continue;

      const fs::path plot_path = p.parent_path() / (p.stem().string() + "_plot.csv");
      std::ofstream plot(plot_path);
      auto emit_prefix = [&](const std::string& line) {
        size_t pos = 0;
        for (long c = 0; c < n + 1; ++c) {
          size_t next = line.find(',', pos);
          if (c < n && next == std::string::npos) return; // malformed row
          plot << line.substr(pos, next == std::string::npos ? next : next - pos)
               << (c < n ? "," : "\n");
          pos = next + 1;
        }
      };
      emit_prefix(header);
      std::string line;
      long rows = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        emit_prefix(line);
        ++rows;
      }
      plots.push_back({{"source", p.filename().string()},
                       {"plot", plot_path.filename().string()},
                       {"rows", rows}});
    }
  }

  if (reports.empty() && plots.empty()) {
    std::fprintf(stderr, "nhgeo: no report artifacts (*.json with stages, trajectory *.csv) in '%s'\n",
                 dir.c_str());
    return kExitUsage;
  }

  json merged;
  merged["reports"] = reports;
  merged["plots"] = plots;
  merged["notes"] = registry["notes"];
  merged["registry"] = registry["metrics"];
  {
    std::ofstream out_file(fs::path(dir) / "report.json");
    out_file << merged.dump(2) << "\n";
  }
  auto out = open_output(output);
  std::fprintf(out.get(), "%s\n", merged.dump(2).c_str());
  return kExitOk;
}

int run_report(int grid, int lines, int steps, double margin, bool as_json,
               const std::string& out_dir, const std::string& output) {
  if (!out_dir.empty()) return run_report_merge(out_dir, output);

  char* raw = nullptr;
  check(nhg_registry_json(&raw), "registry");
  const json registry = json::parse(take_string(raw));

  auto out = open_output(output);
  bool all_match = true;
  json results = json::array();
  for (const auto& item : registry["metrics"]) {
    const std::string spec = item["spec"].get<std::string>();
    const bool expect_pass = item["expect_pass"].get<bool>();

    Metric metric;
    check(nhg_metric_open(spec.c_str(), "", &metric.h), "metric open " + spec);
    json options = {{"grid_per_axis", grid}, {"margin", margin}};
    if (lines > 0) options["line_count"] = lines;
    if (steps > 0) options["geodesic_steps"] = steps;
    char* eq_raw = nullptr;
    check(nhg_equivalence_json(metric.h, options.dump().c_str(), &eq_raw),
          "equivalence " + spec);
    const json eq = json::parse(take_string(eq_raw));

    const bool consistent = eq["consistent"].get<bool>();
    const bool pass = eq["all_pass"].get<bool>();
    const bool match = consistent && pass == expect_pass;
    all_match = all_match && match;

    json row;
    row["spec"] = spec;
    row["expected_pass"] = expect_pass;
    row["checks"] = eq["checks"];
    row["consistent"] = consistent;
    row["match"] = match;
    results.push_back(row);

    if (!as_json) {
      std::fprintf(out.get(), "%-28s expected %-4s", spec.c_str(),
                   expect_pass ? "pass" : "fail");
      for (const auto& c : eq["checks"])
        std::fprintf(out.get(), "  %s %-4s", c["name"].get<std::string>().c_str(),
                     c["pass"].get<bool>() ? "pass" : "fail");
      std::fprintf(out.get(), "  %s\n", match ? "MATCH" : "MISMATCH");
    }
  }
  if (as_json) {
    json j;
    j["config"] = {{"grid", grid}, {"lines", lines}, {"steps", steps}, {"margin", margin}};
    j["results"] = results;
    j["notes"] = registry["notes"];
    j["all_match"] = all_match;
    std::fprintf(out.get(), "%s\n", j.dump(2).c_str());
  } else {
    std::fprintf(out.get(), "\nnotes:\n");
    for (const auto& note : registry["notes"])
      std::fprintf(out.get(), "  - [%s] %s\n", note["id"].get<std::string>().c_str(),
                   note["text"].get<std::string>().c_str());
    std::fprintf(out.get(), "\nregistry verdicts %s expectations\n",
                 all_match ? "match" : "DO NOT match");
  }
  return all_match ? kExitOk : kExitVerdict;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained kinetic geodesics and radial-chart metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nhg_version());
  app.set_config("--config", "", "Read options from an INI file ([subcommand] key=value)");

  // simulate
  SystemArgs sim_sys;
  std::vector<double> sim_q0, sim_v0;
  double sim_t = 1.0;
  int sim_steps = 1000;
  bool sim_project = false, sim_json = false;
  std::string sim_output;
  auto* sim = app.add_subcommand("simulate", "Integrate the constrained geodesic flow");
  add_system_args(sim, sim_sys);
  sim->add_option("--q0", sim_q0, "Initial point (default: system base)")->delimiter(',');
  sim->add_option("--v0", sim_v0, "Initial velocity")->delimiter(',')->required();
  sim->add_option("--t", sim_t, "Integration time");
  sim->add_option("--steps", sim_steps, "Integration steps");
  sim->add_flag("--project", sim_project, "Project v0 onto the constraint plane");
  sim->add_flag("--json", sim_json, "Print a JSON summary instead of CSV samples");
  sim->add_option("--output", sim_output, "Write to file instead of stdout");

  // expmap-grid
  SystemArgs grid_sys;
  double grid_radius = 0.0, grid_margin = 0.05;
  int grid_steps = 0, grid_per_axis = 11;
  std::string grid_output;
  auto* grid = app.add_subcommand("expmap-grid",
                                  "Tabulate the constrained exponential on a fiber grid");
  add_system_args(grid, grid_sys);
  grid->add_option("--radius", grid_radius, "Fiber domain radius (0: system default)");
  grid->add_option("--steps", grid_steps, "Integration steps (0: default)");
  grid->add_option("--per-axis", grid_per_axis, "Grid nodes per axis")
      ->check(CLI::Range(2, 201));
  grid->add_option("--margin", grid_margin, "Domain shrink fraction");
  grid->add_option("--output", grid_output, "Write to file instead of stdout");

  // gauss-check
  MetricArgs gauss_metric;
  ParamOverrides gauss_po;
  int gauss_grid = 0;
  double gauss_tol = 0.0, gauss_margin = 0.05;
  std::string gauss_output;
  auto* gauss = app.add_subcommand("gauss-check",
                                   "Radial-compatibility sweep for a fiber metric");
  add_metric_args(gauss, gauss_metric);
  add_param_overrides(gauss, gauss_po);
  gauss->add_option("--grid", gauss_grid, "Nodes per axis (0: default 21)");
  gauss->add_option("--tol", gauss_tol, "Residual tolerance (0: profile default)");
  gauss->add_option("--margin", gauss_margin, "Domain shrink fraction");
  gauss->add_option("--output", gauss_output, "Write to file instead of stdout");

  // pullback
  SystemArgs pull_sys;
  double pull_radius = 0.0, pull_e1 = 0.5, pull_e2 = 0.5;
  int pull_steps = 0, pull_per_axis = 11;
  std::string pull_output, pull_fiber, pull_fiber_params;
  auto* pull = app.add_subcommand(
      "pullback", "Tabulate the induced metric on the radial chart image");
  add_system_args(pull, pull_sys);
  pull->add_option("--fiber-metric", pull_fiber,
                   "Fiber metric spec to push forward (default: kinetic Gram matrix)");
  pull->add_option("--fiber-params", pull_fiber_params,
                   "JSON object of fiber metric parameters");
  pull->add_option("--radius", pull_radius, "Patch fiber radius (0: system default)");
  pull->add_option("--steps", pull_steps, "Patch integration steps (0: default)");
  pull->add_option("--per-axis", pull_per_axis, "Grid nodes per axis")
      ->check(CLI::Range(2, 201));
  pull->add_option("--extent1", pull_e1, "Grid half-width, first selected coordinate");
  pull->add_option("--extent2", pull_e2, "Grid half-width, second selected coordinate");
  pull->add_option("--output", pull_output, "Write to file instead of stdout");

  // verify-theorem
  SystemArgs verify_sys;
  ParamOverrides verify_po;
  std::string verify_metric, verify_options, verify_output;
  bool verify_json = false;
  auto* verify = app.add_subcommand(
      "verify-theorem", "Full radial-isometry verification for a system + metric pair");
  add_system_args(verify, verify_sys);
  add_param_overrides(verify, verify_po);
  verify->add_option("--metric", verify_metric, "Metric spec")->required();
  verify->add_option("--options", verify_options, "JSON object of verification options");
  verify->add_flag("--json", verify_json, "Print the raw JSON report");
  verify->add_option("--output", verify_output, "Write to file instead of stdout");

  // minimize
  MetricArgs min_metric;
  ParamOverrides min_po;
  std::vector<double> min_endpoint;
  int min_nodes = 0, min_max_iters = 0;
  double min_bump = 0.0, min_gtol = 0.0;
  unsigned min_seed = 7;
  std::string min_output;
  auto* minimize = app.add_subcommand(
      "minimize", "Length minimization over perturbed curves to a fiber endpoint");
  add_metric_args(minimize, min_metric);
  add_param_overrides(minimize, min_po);
  minimize->add_option("--endpoint", min_endpoint, "Fiber endpoint")
      ->delimiter(',')
      ->required();
  minimize->add_option("--nodes", min_nodes, "Curve nodes (0: default 15)");
  minimize->add_option("--bump", min_bump, "Perturbation amplitude (0: default 0.12)");
  minimize->add_option("--seed", min_seed, "Perturbation seed");
  minimize->add_option("--max-iters", min_max_iters, "Iteration cap (0: default 4000)");
  minimize->add_option("--gtol", min_gtol, "Gradient tolerance (0: profile default)");
  minimize->add_option("--output", min_output, "Write to file instead of stdout");

  // report
  int report_grid = 9, report_lines = 0, report_steps = 0;
  double report_margin = 0.05;
  bool report_json = false;
  std::string report_output, report_dir;
  auto* report = app.add_subcommand(
      "report",
      "Run the identity-check registry, or merge prior artifacts from a directory");
  report->add_option("--grid", report_grid, "Sweep nodes per axis");
  report->add_option("--lines", report_lines, "Rays for the line/exp checks (0: default)");
  report->add_option("--steps", report_steps, "Geodesic steps for the checks (0: default)");
  report->add_option("--margin", report_margin, "Domain shrink fraction");
  report->add_flag("--json", report_json, "Print a JSON report instead of the table");
  report->add_option("--out", report_dir,
                     "Merge verify/simulate artifacts from this directory into report.json "
                     "plus *_plot.csv files");
  report->add_option("--output", report_output, "Write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (sim->parsed())
    return run_simulate(sim_sys, sim_q0, sim_v0, sim_t, sim_steps, sim_project, sim_output,
                        sim_json);
  if (grid->parsed())
    return run_expmap_grid(grid_sys, grid_radius, grid_steps, grid_per_axis, grid_margin,
                           grid_output);
  if (gauss->parsed())
    return run_gauss_check(gauss_metric, gauss_po, gauss_grid, gauss_tol, gauss_margin,
                           gauss_output);
  if (pull->parsed())
    return run_pullback(pull_sys, pull_fiber, pull_fiber_params, pull_radius, pull_steps,
                        pull_per_axis, pull_e1, pull_e2, pull_output);
  if (verify->parsed())
    return run_verify(verify_sys, verify_po, verify_metric, verify_options, verify_json,
                      verify_output);
  if (minimize->parsed())
    return run_minimize(min_metric, min_po, min_endpoint, min_nodes, min_bump, min_seed,
                        min_max_iters, min_gtol, min_output);
  if (report->parsed())
    return run_report(report_grid, report_lines, report_steps, report_margin, report_json,
                      report_dir, report_output);
  return kExitUsage;
}
