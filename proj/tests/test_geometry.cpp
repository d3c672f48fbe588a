#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nhgeo/core/geometry.hpp"
#include "nhgeo/core/systems.hpp"
#include "nhgeo/core/vector_metric.hpp"

using namespace nhgeo;

namespace {

double inf_norm(const Eigen::MatrixXd& m) { return m.lpNorm<Eigen::Infinity>(); }

// Sample points with nonzero constraint curvature for both systems.
std::vector<Eigen::VectorXd> probe_points(const NonholonomicSystem& sys) {
  std::vector<Eigen::VectorXd> pts;
  if (sys.dim() == 3) {
    pts.push_back(Eigen::Vector3d(0.0, 0.0, 0.0));
    pts.push_back(Eigen::Vector3d(0.4, -0.8, 0.3));
    pts.push_back(Eigen::Vector3d(-1.1, 1.7, -0.2));
  } else {
    pts.push_back(Eigen::Vector4d(0.0, 0.0, 0.0, 0.0));
    pts.push_back(Eigen::Vector4d(0.5, -0.2, 0.9, 1.3));
    pts.push_back(Eigen::Vector4d(-0.3, 0.8, -2.0, 2.6));
  }
  return pts;
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("christoffel symbols match the closed plane-metric formulas") {
  const MetricField g = as_metric_field(example_plane_metric());
  for (double u : {-0.6, -0.2, 0.0, 0.35, 0.55}) {
    for (double v : {-0.5, 0.1, 0.4}) {
      if (u * u + v * v >= 0.8 * 0.8) continue;
      const Christoffel c = christoffel_at(g, ChartPoint(Eigen::Vector2d(u, v)));
      const PlaneChristoffel oracle = example_plane_christoffel(u, v);
      CHECK(c.sym[0](0, 0) == doctest::Approx(oracle.uuu).epsilon(1e-9));
      CHECK(c.sym[0](0, 1) == doctest::Approx(oracle.uuv).epsilon(1e-9));
      CHECK(c.sym[0](1, 1) == doctest::Approx(oracle.uvv).epsilon(1e-9));
      CHECK(c.sym[1](0, 0) == doctest::Approx(oracle.vuu).epsilon(1e-9));
      CHECK(c.sym[1](0, 1) == doctest::Approx(oracle.vuv).epsilon(1e-9));
      CHECK(c.sym[1](1, 1) == doctest::Approx(oracle.vvv).epsilon(1e-9));
    }
  }
}

TEST_CASE("christoffel analytic-partials and finite-difference paths agree") {
  const MetricField g = as_metric_field(example_plane_metric());
  REQUIRE(static_cast<bool>(g.partials));
  const ChartPoint q(Eigen::Vector2d(0.4, -0.3));
  const Christoffel analytic = christoffel_at(g, q);
  const Christoffel fd = christoffel_at(g, q, 1e-5, /*force_fd=*/true);
  for (int k = 0; k < 2; ++k) CHECK(inf_norm(analytic.sym[k] - fd.sym[k]) < 1e-8);
  // Symmetry in the lower indices is structural.
  for (int k = 0; k < 2; ++k)
    CHECK(inf_norm(analytic.sym[k] - analytic.sym[k].transpose()) == 0.0);
}

TEST_CASE("christoffel of a constant metric vanishes without evaluation") {
  MetricField g;
  g.dim = 2;
  g.eval = [](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::Matrix2d::Identity(); };
  g.constant = true;
  const Christoffel c = christoffel_at(g, ChartPoint(Eigen::Vector2d(5.0, -3.0)));
  for (int k = 0; k < 2; ++k) CHECK(inf_norm(c.sym[k]) == 0.0);
}

TEST_CASE("christoffel at a singular metric point reports a numerical error") {
  // Evaluating the plane example on its degenerate circle is a domain error...
  const MetricField plane = as_metric_field(example_plane_metric());
  CHECK_THROWS_AS(christoffel_at(plane, ChartPoint(Eigen::Vector2d(1.0, 0.0))), DomainError);

  // ...while a metric that evaluates fine but is singular surfaces as a
  // numerical error from the inversion.
  MetricField g;
  g.dim = 2;
  g.eval = [](const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    Eigen::Matrix2d m;
    m << w[0], 0.0, 0.0, 0.0; // rank one everywhere
    return m;
  };
  g.policy = SignaturePolicy::AllowIndefinite;
  CHECK_THROWS_AS(christoffel_at(g, ChartPoint(Eigen::Vector2d(2.0, 0.0))), NumericalError);
}

TEST_CASE("orthogonal projector identities hold on both systems") {
  for (const SystemEntry& entry : {particle_system(), disk_system(2.0, 0.5)}) {
    const NonholonomicSystem& sys = entry.system;
    for (const Eigen::VectorXd& q : probe_points(sys)) {
      const ChartPoint pt(q);
      const Eigen::MatrixXd P = orthogonal_projector_at(sys.g, sys.A, pt);
      const Eigen::MatrixXd A = constraint_at(sys.A, pt);
      const Eigen::MatrixXd gm = metric_at(sys.g, pt);
      CHECK(inf_norm(P * P - P) < 1e-10);          // idempotent
      CHECK(inf_norm(A * P) < 1e-10);              // kills the constraint rows
      const Eigen::MatrixXd gP = gm * P;
      CHECK(inf_norm(gP - gP.transpose()) < 1e-10); // g-self-adjoint
      CHECK(P.trace() == doctest::Approx(entry.system.fiber_dim()).epsilon(1e-12));
    }
  }
}

TEST_CASE("constrained connection is metric on distribution sections") {
  for (const SystemEntry& entry : {particle_system(), disk_system()}) {
    const NonholonomicSystem& sys = entry.system;
    // Y, Z: fixed coefficients in the orthonormal distribution frame; X: a
    // coordinate direction, so the probe derivative is exercised fully.
    auto section = [&sys](double c0, double c1) {
      return [&sys, c0, c1](const ChartPoint& q) -> Eigen::VectorXd {
        const Eigen::MatrixXd B = d_orthonormal_basis(sys, q);
        return B.col(0) * c0 + B.col(1) * c1;
      };
    };
    const VectorFieldFn Y = section(1.0, -0.5);
    const VectorFieldFn Z = section(0.3, 1.2);
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(sys.dim());
    e0[0] = 1.0;
    const VectorFieldFn X = [e0](const ChartPoint&) { return e0; };
    for (const Eigen::VectorXd& q : probe_points(sys)) {
      const double r = d_compatibility_residual(sys, X, Y, Z, ChartPoint(q));
      CHECK(std::abs(r) < 1e-6);
    }
  }
}

TEST_CASE("distribution basis is g-orthonormal, in the kernel, deterministic") {
  const SystemEntry entry = disk_system(2.0, 0.5);
  const NonholonomicSystem& sys = entry.system;
  for (const Eigen::VectorXd& q : probe_points(sys)) {
    const ChartPoint pt(q);
    const Eigen::MatrixXd B = d_orthonormal_basis(sys, pt);
    REQUIRE(B.cols() == 2);
    CHECK(inf_norm(constraint_at(sys.A, pt) * B) < 1e-10);
    const Eigen::MatrixXd gram = B.transpose() * metric_at(sys.g, pt) * B;
    CHECK(inf_norm(gram - Eigen::Matrix2d::Identity()) < 1e-10);
    const Eigen::MatrixXd B2 = d_orthonormal_basis(sys, pt);
    CHECK(inf_norm(B - B2) == 0.0);
  }
}

} // TEST_SUITE
