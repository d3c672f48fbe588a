#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/metrics_catalog.hpp"
#include "nhgeo/core/systems.hpp"
#include "nhgeo/core/vector_metric.hpp"

using namespace nhgeo;

namespace {

// PD everywhere on cube(0.5) but radially incompatible: the uu-component
// grows along u, so the defect against e_1 is exactly w1^3.
VectorMetric cubic_defect_metric() {
  auto eval = [](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    Eigen::Matrix2d m;
    m << 1.0 + w[0] * w[0], 0.0, 0.0, 1.0;
    return m;
  };
  return VectorMetric(2, eval, DomainSpec::cube(0.5), FdProfile::Analytic, "cubic-defect");
}

} // namespace

TEST_SUITE("vector-metric") {

TEST_CASE("radial defect has a closed value on a synthetic metric") {
  const VectorMetric G = cubic_defect_metric();
  const Eigen::Vector2d w(0.4, 0.3);
  CHECK(gauss_residual(G, w, Eigen::Vector2d(1, 0)) ==
        doctest::Approx(0.4 * 0.4 * 0.4).epsilon(1e-14));
  CHECK(gauss_residual(G, w, Eigen::Vector2d(0, 1)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(gauss_residual(G, w, Eigen::Vector3d(1, 0, 0)), InvalidArgument);
}

TEST_CASE("grid sweep verdicts: pass, fail, and loss of positive-definiteness") {
  const GaussReport pass = check_gauss(make_metric("flat"));
  CHECK(pass.verdict == GaussVerdict::Pass);
  CHECK(pass.max_abs_residual == 0.0);
  CHECK(pass.points == 21 * 21);
  CHECK(pass.pd_ok);

  const GaussReport fail = check_gauss(cubic_defect_metric());
  CHECK(fail.verdict == GaussVerdict::Fail);
  // Max defect |w1|^3 at the margin-shrunk corner |w1| = 0.475.
  CHECK(fail.max_abs_residual == doctest::Approx(0.475 * 0.475 * 0.475).epsilon(1e-12));
  CHECK(fail.argmax_z == 0);
  CHECK(std::abs(fail.argmax_w[0]) == doctest::Approx(0.475).epsilon(1e-12));

  auto indef_eval = [](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    Eigen::Matrix2d m;
    m << 1.0 - 2.0 * w[0] * w[0], 0.0, 0.0, 1.0;
    return m;
  };
  const VectorMetric indef(2, indef_eval, DomainSpec::cube(1.0), FdProfile::Analytic, "indef");
  const GaussReport nr = check_gauss(indef);
  CHECK(nr.verdict == GaussVerdict::NotRiemannian);
  CHECK(!nr.pd_ok);
  CHECK(nr.pd_failure_at.size() == 2);
  CHECK(std::abs(nr.pd_failure_at[0]) > 1.0 / std::sqrt(2.0));

  CHECK_THROWS_AS(check_gauss(make_metric("flat"), 1), InvalidArgument);
}

TEST_CASE("radially compatible metrics measure rays by the origin norm") {
  const VectorMetric G = make_metric("example53");
  const Eigen::Vector2d v(0.5, -0.6);
  CHECK(radial_distance(G, v) == doctest::Approx(v.norm()).epsilon(1e-12));

  // Gradient of the radial distance: the Euclidean unit radial direction,
  // of unit length in the metric at the evaluation point.
  const Eigen::VectorXd grad = radial_gradient(G, v);
  CHECK((grad - v / v.norm()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(grad.dot(G(v) * grad) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(radial_gradient(G, Eigen::Vector2d(0, 0)), InvalidArgument);
}

TEST_CASE("gradient flow of the radial distance follows rays") {
  // Under radial compatibility the integral curves of grad r are the rays
  // from the origin; integrate the flow and check collinearity.
  const VectorMetric G = make_metric("example53");
  Eigen::Vector2d x(0.2, 0.1);
  const Eigen::Vector2d dir = x / x.norm();
  const int steps = 50;
  const double T = 0.3, h = T / steps;
  for (int i = 0; i < steps; ++i) {
    // RK4 on x' = grad r(x)
    const Eigen::VectorXd k1 = radial_gradient(G, x);
    const Eigen::VectorXd k2 = radial_gradient(G, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = radial_gradient(G, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = radial_gradient(G, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double cross = std::abs(x[0] * dir[1] - x[1] * dir[0]);
  CHECK(cross < 1e-6);
  // Unit-speed flow: the radius grows by the elapsed time.
  CHECK(x.norm() == doctest::Approx(std::sqrt(0.05) + T).epsilon(1e-5));
}

TEST_CASE("pullback through a linear map is the congruent constant metric") {
  Eigen::Matrix2d B;
  B << 2.0, 1.0, 0.0, 1.0;
  auto map = [B](const Eigen::VectorXd& w) -> Eigen::VectorXd { return B * w; };
  MetricField flat;
  flat.dim = 2;
  flat.eval = [](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::Matrix2d::Identity(); };
  flat.constant = true;

  const VectorMetric G = pullback_metric(map, flat, 2, DomainSpec::cube(1.0));
  const Eigen::Matrix2d expected = B.transpose() * B;
  for (const Eigen::Vector2d& w : {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.7, -0.5)}) {
    CHECK((G(w) - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(G.profile() == FdProfile::Numeric);
}

TEST_CASE("exponential pullback of an ambient metric becomes radially compatible") {
  // The seed is anisotropic-conformal and fails the sweep; its pullback
  // through its own exponential passes at the numeric tolerance.
  const VectorMetric G =
      make_metric("remark21-conformal", {{"radius", 0.15}, {"steps", 60}});
  const GaussReport rep = check_gauss(G, 7);
  CHECK(rep.verdict == GaussVerdict::Pass);
  CHECK(rep.max_abs_residual < 1e-6);
  CHECK(G.profile() == FdProfile::Numeric);

  // Sanity: the raw seed family itself is NOT radially compatible.
  auto seed_eval = [](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    return std::exp(0.3 * w[0] - 0.2 * w[1]) * Eigen::Matrix2d::Identity();
  };
  const VectorMetric seed(2, seed_eval, DomainSpec::ball(0.15), FdProfile::Analytic, "seed");
  CHECK(check_gauss(seed, 7).verdict == GaussVerdict::Fail);
}

TEST_CASE("metric catalog: specs, aliases, and validation") {
  CHECK(make_metric("flat").dim() == 2);
  CHECK(make_metric("flat:3").dim() == 3);
  CHECK(make_metric("flat", {{"radius", 2.5}}).domain().bounding_radius() ==
        doctest::Approx(2.5));
  CHECK(make_metric("example53").name() == "plane-degenerate-circle");
  CHECK(make_metric("pullback-gmod").name() == "pullback-gmod:disk:closed");
  CHECK(make_metric("pullback-gmod:disk").name() == "pullback-gmod:disk:closed");
  CHECK(make_metric("pullback-ambient").name() == "pullback-ambient:particle:closed");
  CHECK(make_metric("pullback:particle").name() == "pullback-ambient:particle:closed");

  CHECK_THROWS_AS(make_metric("flat:x"), InvalidArgument);
  CHECK_THROWS_AS(make_metric("spherical"), UnknownIdError);
  CHECK_THROWS_AS(make_metric("pullback-gmod:particle"), UnknownIdError);
  CHECK_THROWS_AS(make_metric("pullback-gmod:disk:magic"), UnknownIdError);
  CHECK_THROWS_AS(make_metric("flat", {{"mass", 1.0}}), InvalidArgument);

  const auto registry = theorem_registry();
  CHECK(registry.size() == 5);
  int expected_failures = 0;
  for (const auto& item : registry) {
    if (!item.expect_pass) {
      ++expected_failures;
      CHECK(item.spec == "pullback-ambient:particle");
      CHECK(!item.why.empty());
    }
  }
  CHECK(expected_failures == 1);
}

TEST_CASE("closed and integrated pullback routes agree") {
  const std::map<std::string, double> params{{"I", 1.0}, {"J", 1.0}, {"radius", 0.8},
                                             {"steps", 300}};
  const VectorMetric closed = make_metric("pullback-gmod:disk:closed", params);
  const VectorMetric integrated = make_metric("pullback-gmod:disk:integrated", params);
  for (const Eigen::Vector2d& w :
       {Eigen::Vector2d(0.3, 0.5), Eigen::Vector2d(-0.6, 0.2), Eigen::Vector2d(0.1, -0.7)}) {
    CHECK((closed(w) - integrated(w)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("vector metric interface validation") {
  CHECK_THROWS_AS(VectorMetric(0, nullptr, DomainSpec::cube(1.0), FdProfile::Analytic),
                  InvalidArgument);
  const VectorMetric G = make_metric("flat");
  CHECK_THROWS_AS(G(Eigen::Vector3d(0, 0, 0)), InvalidArgument);

  // Indefinite values are allowed by evaluation but rejected by the radial
  // distance when the squared norm goes negative.
  auto neg = [](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::Matrix2d m;
    m << -1.0, 0.0, 0.0, 1.0;
    return m;
  };
  const VectorMetric N(2, neg, DomainSpec::cube(1.0), FdProfile::Analytic, "neg");
  CHECK_THROWS_AS(radial_distance(N, Eigen::Vector2d(1.0, 0.0)), NumericalError);
}

} // TEST_SUITE
