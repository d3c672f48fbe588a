#include "nhgeo/core/metrics_catalog.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "nhgeo/core/errors.hpp"
#include "nhgeo/core/systems.hpp"

namespace nhgeo {

namespace {

std::vector<std::string> split_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  return parts;
}

double get(const std::map<std::string, double>& params, const char* key, double dflt) {
  auto it = params.find(key);
  return it == params.end() ? dflt : it->second;
}

void check_keys(const std::map<std::string, double>& params) {
  static const char* known[] = {"radius", "I", "J", "a", "b", "steps", "dim"};
  for (const auto& [key, value] : params) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InvalidArgument("make_metric: unknown parameter '" + key + "'");
  }
}

VectorMetric make_flat(int k, double radius) {
  if (k <= 0) throw InvalidArgument("make_metric: flat dimension must be positive");
  auto eval = [k](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Identity(k, k);
  };
  auto partials = [k](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>(k, Eigen::MatrixXd::Zero(k, k));
  };
  return VectorMetric(k, eval, DomainSpec::cube(radius), FdProfile::Analytic,
                      "flat:" + std::to_string(k), partials);
}

VectorMetric make_remark21(const std::map<std::string, double>& params) {
  const double a = get(params, "a", 0.3);
  const double b = get(params, "b", -0.2);
  const double radius = get(params, "radius", 0.3);
  const int steps = static_cast<int>(get(params, "steps", 150));

  // conformal seed exp(a u + b v) I, globally defined
  auto eval = [a, b](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    return std::exp(a * w[0] + b * w[1]) * Eigen::Matrix2d::Identity();
  };
  auto partials = [a, b](const Eigen::VectorXd& w) {
    const double f = std::exp(a * w[0] + b * w[1]);
    std::vector<Eigen::MatrixXd> d(2);
    d[0] = a * f * Eigen::Matrix2d::Identity();
    d[1] = b * f * Eigen::Matrix2d::Identity();
    return d;
  };
  VectorMetric seed(2, eval, DomainSpec::ball(4.0 * radius), FdProfile::Analytic,
                    "conformal-seed", partials);

  GeodesicOptions gopts;
  gopts.steps = steps;
  return gauss_metric_from_ambient(seed, DomainSpec::ball(radius), gopts, 1e-5,
                                   "remark21-conformal");
}

VectorMetric make_particle_ambient_pullback(const std::vector<std::string>& parts,
                                            const std::map<std::string, double>& params) {
  const std::string route = parts.size() >= 3 ? parts[2] : "closed";
  const double radius = get(params, "radius", 1.0);
  SystemEntry entry = particle_system();
  const MetricField ambient = entry.system.g; // flat on R^3

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> map;
  if (route == "closed") {
    map = entry.closed_exp;
  } else if (route == "integrated") {
    const int steps = static_cast<int>(get(params, "steps", 400));
    auto patch = std::make_shared<ExpMapPatch>(
        entry.make_patch(radius * 1.05, PatchOptions{steps, steps, 1e-5}));
    map = [patch](const Eigen::VectorXd& w) { return patch->exp(w).coords; };
  } else {
    throw UnknownIdError("make_metric: unknown route '" + route + "' (try: closed, integrated)");
  }
  return pullback_metric(map, ambient, 2, DomainSpec::cube(radius), 1e-5,
                         "pullback-ambient:particle:" + route);
}

VectorMetric make_disk_gmod_pullback(const std::vector<std::string>& parts,
                                     const std::map<std::string, double>& params) {
  const std::string route = parts.size() >= 3 ? parts[2] : "closed";
  const double I = get(params, "I", 1.0);
  const double J = get(params, "J", 1.0);
  SystemEntry entry = disk_system(I, J);
  const double radius = get(params, "radius", entry.domain.bounding_radius());

  if (route == "closed") {
    auto eval = [I, J](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
      const Metric2 m = disk_pullback_closed(w[0], w[1], I, J);
      Eigen::Matrix2d g;
      g << m.E, m.F, m.F, m.G;
      return g;
    };
    auto partials = [](const Eigen::VectorXd& w) {
      const Metric2 du = detail_systems::disk_pullback_closed_du(w[0], w[1]);
      const Metric2 dv = detail_systems::disk_pullback_closed_dv(w[0], w[1]);
      std::vector<Eigen::MatrixXd> d(2);
      Eigen::Matrix2d mu, mv;
      mu << du.E, du.F, du.F, du.G;
      mv << dv.E, dv.F, dv.F, dv.G;
      d[0] = mu;
      d[1] = mv;
      return d;
    };
    return VectorMetric(2, eval, DomainSpec::cube(radius), FdProfile::Analytic,
                        "pullback-gmod:disk:closed", partials);
  }
  if (route == "integrated") {
    const int steps = static_cast<int>(get(params, "steps", 400));
    auto patch = std::make_shared<ExpMapPatch>(
        entry.make_patch(radius * 1.05, PatchOptions{steps, steps, 1e-5}));
    auto map = [patch](const Eigen::VectorXd& w) { return patch->exp(w).coords; };
    return pullback_metric(map, entry.aux_metrics.at("gmod"), 2, DomainSpec::cube(radius), 1e-5,
                           "pullback-gmod:disk:integrated");
  }
  throw UnknownIdError("make_metric: unknown route '" + route + "' (try: closed, integrated)");
}

} // namespace

VectorMetric make_metric(const std::string& spec, const std::map<std::string, double>& params) {
  check_keys(params);
  const std::vector<std::string> parts = split_spec(spec);
  if (parts.empty()) throw InvalidArgument("make_metric: empty spec");
  const std::string& head = parts[0];

  if (head == "flat") {
    int k = static_cast<int>(get(params, "dim", 2));
    if (parts.size() >= 2) {
      try {
        k = std::stoi(parts[1]);
      } catch (const std::exception&) {
        throw InvalidArgument("make_metric: bad flat dimension '" + parts[1] + "'");
      }
    }
    return make_flat(k, get(params, "radius", 1.0));
  }
  if (head == "example53") return example_plane_metric(get(params, "radius", 0.9));
  if (head == "remark21-conformal" ||
      (head == "remark21" && (parts.size() < 2 || parts[1] == "conformal")))
    return make_remark21(params);

  if (head == "pullback-ambient" || head == "pullback") {
    if (parts.size() >= 2 && parts[1] != "particle")
      throw UnknownIdError("make_metric: '" + head + "' expects system 'particle'");
    return make_particle_ambient_pullback(parts, params);
  }
  if (head == "pullback-gmod") {
    if (parts.size() >= 2 && parts[1] != "disk")
      throw UnknownIdError("make_metric: 'pullback-gmod' expects system 'disk'");
    return make_disk_gmod_pullback(parts, params);
  }
  throw UnknownIdError("make_metric: unknown spec '" + spec +
                       "' (try: flat[:k], example53, remark21-conformal, "
                       "pullback-ambient:particle, pullback-gmod:disk)");
}

std::vector<RegistryItem> theorem_registry() {
  return {
      {"flat:2", true, "constant metrics are radially compatible"},
      {"example53", true, "built to satisfy the radial identity; degenerates on the unit circle"},
      {"remark21-conformal", true, "pullback of a conformal seed through its own exponential"},
      {"pullback-gmod:disk", true, "modified kinetic metric through the constrained endpoint map"},
      {"pullback-ambient:particle", false,
       "the flat ambient target is not the induced geometry of the endpoint image"},
  };
}

} // namespace nhgeo
