#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nelliptic/fixtures.hpp"
#include "test_support.hpp"

using namespace nelliptic;
using nelliptic::testing::Gen;

namespace {

const char* kAll[] = {"pmc:0.3", "pmc:0.1", "hq:0.5", "slag:0.2", "slag:0.8", "quadratic:2,0.5",
                      "power:1.5", "power:2.7,3", "harmonic:4", "ma_exp", "ma_exp:3"};

// Random point at distance >= band from the singular set, inside [-2, 2]^n.
Eigen::VectorXd regular_point(Gen& g, const AnalyticFunction& u, double band) {
  while (true) {
    const Eigen::VectorXd x = g.vector(u.dim, 2.0);
    if (u.singular_distance(x) >= band) return x;
  }
}

}  // namespace

TEST_CASE("fixture derivatives match central differences of eval") {
  Gen g(1);
  const double h = 1e-4;
  for (const char* name : kAll) {
    CAPTURE(name);
    const AnalyticFunction u = fixture(name);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd x = regular_point(g, u, 0.2);
      const Eigen::VectorXd grad = u.grad(x);
      const SymMatrixd hess = u.hess(x);
      const double scale = 1.0 + std::abs(u.eval(x)) + grad.norm() + spectral_radius(hess);
      for (int a = 0; a < u.dim; ++a) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(u.dim, a) * h;
        CHECK(std::abs(grad[a] - (u.eval(x + e) - u.eval(x - e)) / (2 * h)) <= 1e-6 * scale);
        for (int b = 0; b < u.dim; ++b) {
          const Eigen::VectorXd f = Eigen::VectorXd::Unit(u.dim, b) * h;
          const double fd = (u.eval(x + e + f) - u.eval(x + e - f) - u.eval(x - e + f) + u.eval(x - e - f)) / (4 * h * h);
          CHECK(std::abs(hess(a, b) - fd) <= 1e-6 * scale * 10);
        }
      }
    }
  }
}

TEST_CASE("fixture residuals vanish away from the singular set") {
  Gen g(2);
  for (const char* name : kAll) {
    CAPTURE(name);
    const AnalyticFunction u = fixture(name);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXd x = regular_point(g, u, 1e-3);
      worst = std::max(worst, std::abs(u.residual(x)) / (1.0 + std::abs(u.rhs(x))));
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("slag phase identity") {
  Gen g(3);
  for (double theta : {0.2, 0.5, 0.8}) {
    const AnalyticFunction u = fixture("slag:" + std::to_string(theta));
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::VectorXd x = regular_point(g, u, 1e-6);
      const double expected = 0.75 * M_PI - std::atan(std::pow(std::abs(x[0]), 1 - theta) / theta);
      CHECK(std::abs(evaluate(OperatorSpec(family::Lagrangian{}), Jet::of_matrix(u.hess(x))) - expected) <= 1e-10);
    }
    CHECK(slag_phase_margin(theta) > 0);
    CHECK(slag_phase_margin(theta) == doctest::Approx(M_PI / 4));
  }
}

TEST_CASE("pmc right-hand side matches a numeric divergence") {
  const AnalyticFunction u = fixture("pmc:0.3");
  auto flux = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd p = u.grad(x);
    return p / std::sqrt(1 + p.squaredNorm());
  };
  const double h = 1e-5;
  for (const Eigen::Vector2d x : {Eigen::Vector2d(1.3, 0.4), Eigen::Vector2d(0.2, -0.5), Eigen::Vector2d(-1.1, 0.9)}) {
    double div = 0.0;
    for (int a = 0; a < 2; ++a) {
      const Eigen::Vector2d e = Eigen::Vector2d::Unit(a) * h;
      div += (flux(x + e)[a] - flux(x - e)[a]) / (2 * h);
    }
    CHECK(std::abs(u.rhs(x) - div) <= 1e-6);
  }
}

TEST_CASE("quadratic Monge-Ampere right-hand side") {
  CHECK(fixture("quadratic").rhs(Eigen::Vector2d(0.3, 0.1)) == 1.0);
  CHECK(fixture("quadratic:2,3").rhs(Eigen::Vector2d(0.3, 0.1)) == 6.0);
}

TEST_CASE("taylor_of") {
  const AnalyticFunction q = fixture("quadratic:2,0.5");
  const Polynomial P = taylor_of(q, Eigen::Vector2d(0.3, -0.7), 2);
  Gen g(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector2d z = g.vector(2);
    CHECK(P(z) == doctest::Approx(q.eval(Eigen::Vector2d(0.3, -0.7) + z)).epsilon(1e-13));
  }

  const AnalyticFunction s = fixture("slag:0.4");
  const SymMatrixd H = taylor_of(s, Eigen::Vector2d(0.5, 0), 2).hessian(Eigen::Vector2d::Zero());
  CHECK(H(0, 0) == doctest::Approx(0.4 * std::pow(0.5, 0.4 - 1)).epsilon(1e-14));
  CHECK(H(1, 1) == 1.0);
  CHECK(H(0, 1) == 0.0);

  try {
    taylor_of(s, Eigen::Vector2d(0, 0.2), 2);
    FAIL("expected a singularity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singularity);
  }
  CHECK_THROWS_AS(taylor_of(q, Eigen::Vector2d(0, 0), 3), Error);
}

TEST_CASE("fixture parameters are range checked") {
  for (const char* bad : {"pmc:0.5", "pmc:0", "slag:1", "hq:-0.1", "power:0", "harmonic:2.5"}) {
    CAPTURE(bad);
    try {
      fixture(bad);
      FAIL("expected a parameter error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parameter);
    }
  }
  CHECK_THROWS_AS(fixture("nosuch"), Error);
  CHECK_THROWS_AS(fixture("pmc"), Error);
}

TEST_CASE("fixture specs round-trip and claims resolve") {
  for (const char* name : kAll) CHECK(fixture(fixture(name).spec()).spec() == fixture(name).spec());
  for (const auto& c : fixture_claims()) {
    const AnalyticFunction u = fixture(c.fixture);
    CHECK(c.point.size() == u.dim);
    CHECK(!c.citation.empty());
  }
}
