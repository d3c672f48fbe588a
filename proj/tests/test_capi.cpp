#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstring>
#include <string>

#include "nhgeo/nhgeo.h"

using nlohmann::json;

namespace {

// RAII helpers so failing CHECKs can't leak handles across cases.
struct SystemHandle {
  nhg_system_t* p = nullptr;
  ~SystemHandle() { nhg_system_close(p); }
};
struct PatchHandle {
  nhg_patch_t* p = nullptr;
  ~PatchHandle() { nhg_patch_close(p); }
};
struct MetricHandle {
  nhg_metric_t* p = nullptr;
  ~MetricHandle() { nhg_metric_close(p); }
};
struct TrajHandle {
  nhg_traj_t* p = nullptr;
  ~TrajHandle() { nhg_traj_close(p); }
};

json take_json(char* s) {
  REQUIRE(s != nullptr);
  json j = json::parse(std::string(s));
  nhg_string_free(s);
  return j;
}

} // namespace

TEST_SUITE("capi") {

TEST_CASE("version and system lifecycle") {
  REQUIRE(nhg_version() != nullptr);
  CHECK(std::strlen(nhg_version()) > 0);

  SystemHandle sys;
  REQUIRE(nhg_system_open("particle", nullptr, &sys.p) == NHG_OK);
  CHECK(nhg_system_dim(sys.p) == 3);
  CHECK(nhg_system_fiber_dim(sys.p) == 2);

  std::array<double, 3> base{};
  REQUIRE(nhg_system_base(sys.p, base.data()) == NHG_OK);
  CHECK(base[0] == 0.0);
  CHECK(base[1] == 0.0);
  CHECK(base[2] == 0.0);

  char* list = nullptr;
  REQUIRE(nhg_system_list_json(&list) == NHG_OK);
  const json j = take_json(list);
  REQUIRE(j.is_array());
  bool saw_particle = false, saw_disk = false;
  for (const auto& item : j) {
    if (item == "particle") saw_particle = true;
    if (item == "disk") saw_disk = true;
  }
  CHECK(saw_particle);
  CHECK(saw_disk);

  char* notes = nullptr;
  REQUIRE(nhg_system_notes_json(sys.p, &notes) == NHG_OK);
  CHECK(!take_json(notes).empty());
}

TEST_CASE("open failures set codes and messages") {
  nhg_system_t* sys = nullptr;
  CHECK(nhg_system_open("rolling-coin", nullptr, &sys) == NHG_EINVAL);
  CHECK(sys == nullptr);
  CHECK(std::strlen(nhg_last_error()) > 0);

  CHECK(nhg_system_open("disk", "{not json", &sys) == NHG_EINVAL);
  CHECK(nhg_system_open("disk", "{\"mass\": 2.0}", &sys) == NHG_EINVAL);
  CHECK(nhg_system_open(nullptr, nullptr, &sys) == NHG_EINVAL);
}

TEST_CASE("integration reproduces the closed endpoint and exposes samples") {
  SystemHandle sys;
  REQUIRE(nhg_system_open("particle", nullptr, &sys.p) == NHG_OK);

  const std::array<double, 3> q0{0.0, 0.0, 0.0};
  const std::array<double, 3> v0{1.0, 1.0, 0.0};
  TrajHandle traj;
  REQUIRE(nhg_integrate(sys.p, q0.data(), v0.data(), 1.0, 1000, 0, &traj.p) == NHG_OK);
  CHECK(nhg_traj_size(traj.p) == 1001);
  CHECK(nhg_traj_dim(traj.p) == 3);

  double t = -1.0;
  std::array<double, 3> q{}, v{};
  double speed = 0.0, residual = 1.0;
  REQUIRE(nhg_traj_sample(traj.p, 0, &t, q.data(), v.data(), &speed, &residual) == NHG_OK);
  CHECK(t == 0.0);
  CHECK(q[0] == 0.0);
  CHECK(v[0] == 1.0);
  CHECK(std::abs(speed - std::sqrt(2.0)) < 1e-12);
  CHECK(residual < 1e-15);

  REQUIRE(nhg_traj_sample(traj.p, 1000, nullptr, q.data(), nullptr, nullptr, nullptr) == NHG_OK);
  CHECK(std::abs(q[0] - 0.88137358701954305) < 1e-7);
  CHECK(std::abs(q[1] - 1.0) < 1e-7);
  CHECK(std::abs(q[2] - 0.41421356237309515) < 1e-7);

  CHECK(nhg_traj_sample(traj.p, 1001, &t, nullptr, nullptr, nullptr, nullptr) == NHG_EINVAL);

  double drift = 1.0, maxres = 1.0;
  REQUIRE(nhg_traj_diagnostics(traj.p, &drift, &maxres) == NHG_OK);
  CHECK(drift < 1e-8);
  CHECK(maxres < 1e-9);
}

TEST_CASE("inadmissible velocities: rejected strictly, repaired with project") {
  SystemHandle sys;
  REQUIRE(nhg_system_open("particle", nullptr, &sys.p) == NHG_OK);
  const std::array<double, 3> q0{0.0, 1.0, 0.0};
  const std::array<double, 3> v0{1.0, 0.0, 0.0}; // violates the constraint at q0

  nhg_traj_t* raw = nullptr;
  CHECK(nhg_integrate(sys.p, q0.data(), v0.data(), 0.5, 100, 0, &raw) == NHG_EINVAL);
  CHECK(raw == nullptr);

  TrajHandle traj;
  REQUIRE(nhg_integrate(sys.p, q0.data(), v0.data(), 0.5, 100, 1, &traj.p) == NHG_OK);
  double residual = 1.0;
  REQUIRE(nhg_traj_sample(traj.p, 0, nullptr, nullptr, nullptr, nullptr, &residual) == NHG_OK);
  CHECK(residual < 1e-12);
}

TEST_CASE("patch endpoints, jacobian, rescaling, inverse") {
  SystemHandle sys;
  REQUIRE(nhg_system_open("particle", nullptr, &sys.p) == NHG_OK);
  PatchHandle patch;
  REQUIRE(nhg_patch_open(sys.p, 0.0, 0, &patch.p) == NHG_OK);
  CHECK(nhg_patch_dim(patch.p) == 3);
  CHECK(nhg_patch_fiber_dim(patch.p) == 2);
  CHECK(nhg_patch_domain_radius(patch.p) == doctest::Approx(1.0));

  const std::array<double, 2> w{1.0, 1.0};
  std::array<double, 3> q{};
  REQUIRE(nhg_patch_exp(patch.p, w.data(), q.data()) == NHG_OK);
  CHECK(std::abs(q[0] - 0.88137358701954305) < 1e-9);
  CHECK(std::abs(q[2] - 0.41421356237309515) < 1e-9);

  std::array<double, 6> jac{}; // 3 x 2 row-major
  const std::array<double, 2> zero{0.0, 0.0};
  REQUIRE(nhg_patch_jacobian(patch.p, zero.data(), jac.data()) == NHG_OK);
  const std::array<double, 6> expected{1, 0, 0, 1, 0, 0};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(jac[i] - expected[i]) < 1e-6);

  const std::array<double, 2> w2{0.6, -0.8};
  double res = 1.0;
  REQUIRE(nhg_patch_rescaling_residual(patch.p, w2.data(), &res) == NHG_OK);
  CHECK(res < 1e-8);

  const std::array<double, 2> w3{0.7, -0.4};
  std::array<double, 3> target{};
  REQUIRE(nhg_patch_exp(patch.p, w3.data(), target.data()) == NHG_OK);
  std::array<double, 2> wrec{};
  double full = 1.0;
  REQUIRE(nhg_patch_inverse(patch.p, target.data(), wrec.data(), &full) == NHG_OK);
  CHECK(std::abs(wrec[0] - 0.7) < 1e-8);
  CHECK(std::abs(wrec[1] + 0.4) < 1e-8);
  CHECK(full < 1e-8);

  const std::array<double, 2> outside{5.0, 0.0};
  CHECK(nhg_patch_exp(patch.p, outside.data(), q.data()) == NHG_EDOMAIN);
  CHECK(std::strlen(nhg_last_error()) > 0);
}

TEST_CASE("metric handles: eval, radial distance, gauss sweep") {
  MetricHandle m;
  REQUIRE(nhg_metric_open("flat", nullptr, &m.p) == NHG_OK);
  CHECK(nhg_metric_dim(m.p) == 2);
  CHECK(nhg_metric_domain_radius(m.p) > 0.0);

  const std::array<double, 2> w{0.3, 0.1};
  std::array<double, 4> g{};
  REQUIRE(nhg_metric_eval(m.p, w.data(), g.data()) == NHG_OK);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  CHECK(g[3] == 1.0);

  const std::array<double, 2> v{0.3, 0.4};
  double dist = 0.0;
  REQUIRE(nhg_metric_radial_distance(m.p, v.data(), &dist) == NHG_OK);
  CHECK(std::abs(dist - 0.5) < 1e-12);
  std::array<double, 2> grad{};
  REQUIRE(nhg_metric_radial_gradient(m.p, v.data(), grad.data()) == NHG_OK);
  CHECK(std::abs(grad[0] - 0.6) < 1e-9);
  CHECK(std::abs(grad[1] - 0.8) < 1e-9);

  char* out = nullptr;
  REQUIRE(nhg_gauss_check_json(m.p, 9, 0.0, 0.0, &out) == NHG_OK);
  const json j = take_json(out);
  CHECK(j["verdict"] == "PASS");
  CHECK(j["pd_ok"] == true);
  CHECK(j["points"].get<int>() == 81);
  CHECK(j["max_abs_residual"].get<double>() < 1e-10);

  MetricHandle bad;
  CHECK(nhg_metric_open("spherical", nullptr, &bad.p) == NHG_EINVAL);
  CHECK(nhg_metric_open("flat", "{\"mass\": 1.0}", &bad.p) == NHG_EINVAL);
}

TEST_CASE("ambient-flat pullback fails its gauss sweep through the C layer") {
  MetricHandle m;
  REQUIRE(nhg_metric_open("pullback-ambient", nullptr, &m.p) == NHG_OK);
  char* out = nullptr;
  REQUIRE(nhg_gauss_check_json(m.p, 9, 0.0, 0.0, &out) == NHG_OK);
  const json j = take_json(out);
  CHECK(j["verdict"] == "FAIL");
  CHECK(j["max_abs_residual"].get<double>() > 0.05);
}

TEST_CASE("induced metric over the disk chart carries the kinetic gram matrix") {
  SystemHandle sys;
  REQUIRE(nhg_system_open("disk", "{\"I\": 1.0, \"J\": 1.0}", &sys.p) == NHG_OK);
  PatchHandle patch;
  REQUIRE(nhg_patch_open(sys.p, 0.0, 400, &patch.p) == NHG_OK);

  MetricHandle m;
  REQUIRE(nhg_metric_open_induced(patch.p, nullptr, nullptr, &m.p) == NHG_OK);
  CHECK(nhg_metric_dim(m.p) == 2);

  const std::array<double, 2> zero{0.0, 0.0};
  std::array<double, 4> g{};
  REQUIRE(nhg_metric_eval(m.p, zero.data(), g.data()) == NHG_OK);
  CHECK(std::abs(g[0] - 2.0) < 1e-8); // 1 + I
  CHECK(std::abs(g[1]) < 1e-8);
  CHECK(std::abs(g[2]) < 1e-8);
  CHECK(std::abs(g[3] - 1.0) < 1e-8); // J
}

TEST_CASE("equivalence report crosses the boundary as json") {
  MetricHandle m;
  REQUIRE(nhg_metric_open("flat", nullptr, &m.p) == NHG_OK);
  char* out = nullptr;
  const char* opts = "{\"grid_per_axis\": 5, \"line_count\": 4, \"geodesic_steps\": 30}";
  REQUIRE(nhg_equivalence_json(m.p, opts, &out) == NHG_OK);
  const json j = take_json(out);
  REQUIRE(j["checks"].size() == 3);
  CHECK(j["checks"][0]["name"] == "gauss");
  CHECK(j["all_pass"] == true);
  CHECK(j["consistent"] == true);
  CHECK(j["pd_ok"] == true);
}

TEST_CASE("minimizer json reports a radial recovery") {
  MetricHandle m;
  REQUIRE(nhg_metric_open("flat", nullptr, &m.p) == NHG_OK);
  const std::array<double, 2> b{0.4, 0.3};
  char* out = nullptr;
  REQUIRE(nhg_minimize_json(m.p, b.data(), 11, 0.1, 3, 2000, 1e-6, &out) == NHG_OK);
  const json j = take_json(out);
  const double init = j["initial_length"].get<double>();
  const double fin = j["final_length"].get<double>();
  const double radial = j["radial_length"].get<double>();
  CHECK(std::abs(radial - 0.5) < 1e-12);
  CHECK(init > radial + 1e-4); // the seed detours
  CHECK(fin <= init + 1e-12);
  CHECK(std::abs(fin - radial) < 1e-3);
  CHECK(j["recovery_sup_distance"].get<double>() < 2e-3);
  CHECK(j["nodes"].size() == 11);
}

TEST_CASE("registry json lists the five catalog entries") {
  char* out = nullptr;
  REQUIRE(nhg_registry_json(&out) == NHG_OK);
  const json j = take_json(out);
  REQUIRE(j["metrics"].size() == 5);
  int fails = 0;
  for (const auto& item : j["metrics"]) {
    if (!item["expect_pass"].get<bool>()) {
      ++fails;
      CHECK(item["spec"] == "pullback-ambient:particle");
      CHECK(!item["why"].get<std::string>().empty());
    }
  }
  CHECK(fails == 1);
  CHECK(!j["notes"].empty());
}

TEST_CASE("verification pipeline through the C layer") {
  const char* opts =
      "{\"grid_per_axis\": 5, \"line_count\": 4, \"geodesic_steps\": 30,"
      " \"run_minimize\": false, \"run_exp_grid\": false}";
  char* out = nullptr;
  REQUIRE(nhg_verify_theorem_json("particle", "flat", nullptr, opts, &out) == NHG_OK);
  const json j = take_json(out);
  CHECK(j["system"] == "particle");
  CHECK(j["metric"] == "flat");
  CHECK(j["overall_pass"] == true);
  CHECK(j["as_expected"] == true);
  REQUIRE(j["stages"].size() == 6);
  CHECK(j["stages"][2]["name"] == "metric-build");

  CHECK(nhg_verify_theorem_json("particle", "flat", "{bad", opts, &out) == NHG_EINVAL);
  CHECK(nhg_verify_theorem_json("hovercraft", "flat", nullptr, opts, &out) == NHG_EINVAL);
}

TEST_CASE("null argument handling") {
  CHECK(nhg_system_base(nullptr, nullptr) == NHG_EINVAL);
  CHECK(nhg_integrate(nullptr, nullptr, nullptr, 1.0, 10, 0, nullptr) == NHG_EINVAL);
  CHECK(nhg_patch_open(nullptr, 0.0, 0, nullptr) == NHG_EINVAL);
  CHECK(nhg_metric_eval(nullptr, nullptr, nullptr) == NHG_EINVAL);
  CHECK(nhg_registry_json(nullptr) == NHG_EINVAL);
  nhg_string_free(nullptr); // must be a safe no-op
}

} // TEST_SUITE
