#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nelliptic/error.hpp"
#include "nelliptic/fixtures.hpp"
#include "nelliptic/regularity.hpp"
#include "test_support.hpp"

using namespace nelliptic;
using nelliptic::testing::Gen;

namespace {

std::vector<std::pair<double, double>> power_law(double exponent, int count, double r0 = 0.5) {
  std::vector<std::pair<double, double>> out;
  for (int m = 0; m < count; ++m) {
    const double r = r0 * std::pow(0.5, m);
    out.emplace_back(r, std::pow(r, exponent));
  }
  return out;
}

AnalyticFunction from_eval(int dim, std::function<double(const Eigen::VectorXd&)> eval) {
  AnalyticFunction u;
  u.name = "custom";
  u.dim = dim;
  u.eval = std::move(eval);
  return u;
}

/// |x|^{k+alpha} + Q with Q a random polynomial of degree k and norm <= 1.
AnalyticFunction synthetic(Gen& gen, int dim, int k, double alpha) {
  Polynomial Q(dim, k);
  for (int i = 0; i < Q.coeffs().size(); ++i) Q.coeffs()[i] = gen.uniform(-1, 1);
  Q *= 1.0 / std::max(1.0, Q.norm());
  return from_eval(dim, [Q, k, alpha](const Eigen::VectorXd& x) { return std::pow(x.norm(), k + alpha) + Q(x); });
}

GridFunction square(double lo, double hi, double h) {
  return GridFunction::box(Eigen::Vector2d(lo, lo), Eigen::Vector2d(hi, hi), h);
}

}  // namespace

TEST_CASE("exponent estimates from scale tables") {
  const ExponentEstimate exact = estimate_exponent(power_law(2.5, 6), 2);
  CHECK(exact.alpha == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(!exact.clamped);
  CHECK(exact.C == doctest::Approx(1.0).epsilon(1e-9));

  const ExponentEstimate edge = estimate_exponent(power_law(2.0, 6), 2);
  CHECK(edge.alpha == 0.0);
  CHECK(edge.clamped);
  CHECK(estimate_exponent(power_law(3.5, 6), 2).alpha == 1.0);

  Gen gen(2024);
  auto noisy = power_law(2.3, 8);
  for (auto& [r, E] : noisy) E *= 1 + gen.uniform(-0.01, 0.01);
  CHECK(std::abs(estimate_exponent(noisy, 2).alpha - 0.3) <= 0.02);

  try {
    estimate_exponent(power_law(2, 3), 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("polynomials are classified as exact") {
  CampanatoConfig config;
  config.k = 2;
  const RegularityReport q = campanato_table(fixture("quadratic:1,3"), Eigen::Vector2d(0.3, -0.2), config);
  CHECK(q.classification == Classification::polynomial_exact);
  for (const auto& s : q.scales) CHECK(s.error <= 1e-10);
  CHECK(!q.estimate);

  config.k = 1;
  const RegularityReport lin = campanato_table(from_eval(1, [](auto& x) { return 2 - 3 * x[0]; }), Eigen::VectorXd::Zero(1), config);
  CHECK(lin.classification == Classification::polynomial_exact);
}

TEST_CASE("three-halves power in one dimension") {
  CampanatoConfig config;
  config.k = 1;
  const RegularityReport r = campanato_table(fixture("power:1.5,1"), Eigen::VectorXd::Zero(1), config);
  // The best affine fit of an even function is the constant r^{3/2}/2.
  for (const auto& s : r.scales) CHECK(s.error == doctest::Approx(0.5 * std::pow(s.r, 1.5)).epsilon(1e-8));
  REQUIRE(r.estimate);
  CHECK(std::abs(r.estimate->alpha - 0.5) <= 0.02);
  CHECK(r.classification == Classification::c_k_alpha);
}

TEST_CASE("exponents of the counterexample fixtures") {
  CampanatoConfig config;
  config.k = 1;
  const RegularityReport slag = campanato_table(fixture("slag:0.4"), Eigen::Vector2d(0, 0), config);
  // Even in both variables: the fit is a constant, the error half the maximum |x_1|^{1.4}/1.4 at (r, 0).
  for (const auto& s : slag.scales) CHECK(s.error == doctest::Approx(std::pow(s.r, 1.4) / 2.8).epsilon(1e-8));
  REQUIRE(slag.estimate);
  CHECK(std::abs(slag.estimate->alpha - 0.4) <= 0.05);

  config.k = 0;
  const RegularityReport pmc = campanato_table(fixture("pmc:0.3"), Eigen::Vector2d(1, 0), config);
  for (const auto& s : pmc.scales) CHECK(s.error == doctest::Approx(std::pow(s.r, 0.3)).epsilon(1e-8));
  REQUIRE(pmc.estimate);
  CHECK(std::abs(pmc.estimate->alpha - 0.3) <= 0.05);
}

TEST_CASE("synthetic exponent recovery with six dyadic scales") {
  Gen gen(77);
  CampanatoConfig config;
  config.levels = 5;
  for (int dim : {1, 2})
    for (int k : {0, 1, 2})
      for (double alpha : {0.2, 0.5, 0.8}) {
        config.k = k;
        const RegularityReport r = campanato_table(synthetic(gen, dim, k, alpha), Eigen::VectorXd::Zero(dim), config);
        INFO("dim " << dim << " k " << k << " alpha " << alpha);
        REQUIRE(r.estimate);
        CHECK(r.estimate->scales == 6);
        CHECK(std::abs(r.estimate->alpha - alpha) <= 0.02);
      }
}

TEST_CASE("each scale is bounded by the previous fit") {
  Gen gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const double beta = gen.uniform(0.3, 2.5);
    const Eigen::Vector2d c = gen.vector(2, 0.2);
    GridFunction g = square(-1, 1, 1.0 / 64);
    g.fill([&](const Eigen::VectorXd& x) { return std::pow((x - c).norm(), beta) + std::sin(3 * x[0]) * x[1]; });
    CampanatoConfig config;
    config.k = trial % 3;
    config.levels = 4;
    const RegularityReport r = campanato_table(g.sample(), Eigen::Vector2d(0, 0), config, 0.0);
    for (std::size_t m = 1; m < r.scales.size(); ++m) {
      CHECK(r.scales[m].error <= r.scales[m].inherited * (1 + 1e-9) + 1e-14);
      CHECK(r.scales[m].inherited <= r.scales[m - 1].error * (1 + 1e-9) + 1e-14);
    }
  }
}

TEST_CASE("scaling covariance on analytic inputs") {
  const AnalyticFunction u = fixture("slag:0.4");
  const double r = 0.25, power = 1.4;
  const AnalyticFunction scaled =
      from_eval(2, [&](const Eigen::VectorXd& y) { return u.eval(r * y) / std::pow(r, power); });
  CampanatoConfig config;
  config.k = 1;
  config.levels = 5;
  const RegularityReport big = campanato_table(scaled, Eigen::Vector2d(0, 0), config);
  config.r0 *= r;
  const RegularityReport small = campanato_table(u, Eigen::Vector2d(0, 0), config);
  for (std::size_t m = 0; m < big.scales.size(); ++m)
    CHECK(big.scales[m].error == doctest::Approx(small.scales[m].error / std::pow(r, power)).epsilon(1e-9));
}

TEST_CASE("successive polynomials follow the measured decay on the fixtures") {
  std::vector<std::pair<AnalyticFunction, Eigen::VectorXd>> cases{
      {fixture("slag:0.4"), Eigen::Vector2d(0, 0)}, {fixture("pmc:0.3"), Eigen::Vector2d(1, 0)},
      {fixture("hq:0.5"), Eigen::Vector3d(0, 0, 0)}};
  const int ks[] = {1, 0, 1};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    CampanatoConfig config;
    config.k = ks[c];
    config.levels = 6;
    const RegularityReport r = campanato_table(cases[c].first, cases[c].second, config);
    INFO(cases[c].first.spec());
    REQUIRE(r.classification == Classification::c_k_alpha);
    for (const auto& s : r.scales)
      if (s.usable && s.m > 0)
        CHECK(s.step_norm <= 4 * r.estimate->C * std::pow(s.r, config.k + r.estimate->alpha));
  }
}

TEST_CASE("grid inputs respect resolution and interior rules") {
  GridFunction g = square(-1, 1, 1.0 / 64);
  g.fill([](const Eigen::VectorXd& x) { return std::pow(x.norm(), 1.5); });
  CampanatoConfig config;
  config.k = 1;
  config.r0 = 0.5;
  config.levels = 4;
  const RegularityReport r = campanato_table(g, Eigen::Vector2d(0, 0), config);
  CHECK(r.noise_floor > 0);
  REQUIRE(r.estimate);
  CHECK(std::abs(r.estimate->alpha - 0.5) <= 0.1);
  config.levels = 6;
  CHECK_THROWS_AS(campanato_table(g, Eigen::Vector2d(0, 0), config), Error);
  config.levels = 2;
  CHECK_THROWS_AS(campanato_table(g, Eigen::Vector2d(0.9, 0), config), Error);

  config.levels = 1;
  const RegularityReport few = campanato_table(g, Eigen::Vector2d(0, 0), config);
  CHECK(few.classification == Classification::below_resolution);
}

TEST_CASE("oscillation profiles") {
  const std::vector<double> radii{0.5, 0.25, 0.125, 0.0625};
  for (const auto& [r, osc] : oscillation_profile(from_eval(2, [](auto& x) { return x[0]; }), Eigen::Vector2d(0.1, 0.2), radii))
    CHECK(osc == doctest::Approx(2 * r));
  const auto prof = oscillation_profile(fixture("power:0.3"), Eigen::Vector2d(0, 0), radii);
  for (const auto& [r, osc] : prof) CHECK(osc == doctest::Approx(std::pow(r, 0.3)));
  CHECK(log_log_slope(prof) == doctest::Approx(0.3));

  GridFunction g = square(-1, 1, 1.0 / 32);
  g.fill([](const Eigen::VectorXd& x) { return x[0]; });
  for (const auto& [r, osc] : oscillation_profile(g, Eigen::Vector2d(0, 0), radii)) CHECK(osc == doctest::Approx(2 * r));
}

TEST_CASE("pointwise holder seminorms") {
  const std::vector<double> radii{0.5, 0.25, 0.125};
  CHECK(holder_seminorm(fixture("power:0.4"), Eigen::Vector2d(0, 0), 0, 0.4, radii) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(holder_seminorm(fixture("quadratic:1,2"), Eigen::Vector2d(0.2, 0.1), 2, 0.7, radii) <= 1e-9);
  Gen gen(4);
  GridFunction g = square(-1, 1, 1.0 / 16);
  Polynomial P(2, 2);
  for (int i = 0; i < P.coeffs().size(); ++i) P.coeffs()[i] = gen.uniform(-1, 1);
  g.fill([&](const Eigen::VectorXd& x) { return P(x); });
  CHECK(holder_seminorm(g.sample(), Eigen::Vector2d(0, 0), 2, 0.3, radii) <= 1e-9);

  // slag is C^{1,theta} at 0: stable at alpha = theta, growing past it.
  const AnalyticFunction slag = fixture("slag:0.4");
  const auto dyadic = [](int count) {
    std::vector<double> r;
    for (int m = 0; m < count; ++m) r.push_back(0.5 * std::pow(0.5, m));
    return r;
  };
  const double coarse = holder_seminorm(slag, Eigen::Vector2d(0, 0), 1, 0.4, dyadic(4));
  const double fine = holder_seminorm(slag, Eigen::Vector2d(0, 0), 1, 0.4, dyadic(12));
  CHECK(std::isfinite(fine));
  CHECK(fine == doctest::Approx(coarse).epsilon(0.05));
  const double coarse_up = holder_seminorm(slag, Eigen::Vector2d(0, 0), 1, 0.5, dyadic(4));
  const double fine_up = holder_seminorm(slag, Eigen::Vector2d(0, 0), 1, 0.5, dyadic(12));
  CHECK(fine_up > 1.5 * coarse_up);
}

TEST_CASE("slag right-hand side seminorm grows as theta decreases") {
  const auto rhs_seminorm = [](double theta) {
    const AnalyticFunction u = fixture("slag:" + std::to_string(theta));
    return holder_seminorm(from_eval(2, u.rhs), Eigen::Vector2d(0, 0), 0, 1 - theta, {0.5, 0.25, 0.125, 0.0625});
  };
  CHECK(rhs_seminorm(0.2) > rhs_seminorm(0.8));
}

TEST_CASE("viscosity checker on classical solutions") {
  GridFunction u = square(-1, 1, 1.0 / 16);
  u.fill([](const Eigen::VectorXd& x) { return x.squaredNorm(); });
  GridFunction f = u.like().fill([](auto&) { return 4.0; });
  const ViscosityReport r = check_viscosity(u, OperatorSpec::parse("linear:1,0;0,1"), f);
  CHECK(r.count(Side::super, Verdict::pass) == static_cast<int>(r.points.size()));
  CHECK(r.count(Side::sub, Verdict::pass) == static_cast<int>(r.points.size()));
  CHECK(r.witnesses.empty());
}

TEST_CASE("viscosity checker flags the kink of |x| against a negative Laplacian") {
  GridFunction u = GridFunction::box(Eigen::VectorXd::Constant(1, -1), Eigen::VectorXd::Constant(1, 1), 1.0 / 16);
  u.fill([](const Eigen::VectorXd& x) { return std::abs(x[0]); });
  GridFunction f = u.like().fill([](auto&) { return -1.0; });
  ViscosityOptions options;
  options.side = Side::super;
  const ViscosityReport r = check_viscosity(u, OperatorSpec::parse("linear:1"), f, options);
  const int origin = u.index({16});
  bool found = false;
  for (const auto& p : r.points)
    if (p.node == origin) CHECK(p.super == Verdict::fail);
  for (const auto& w : r.witnesses)
    if (w.node == origin) {
      found = true;
      CHECK(w.side == Side::super);
      CHECK(w.F > w.f);
      // The witness touches from below on the stencil.
      for (int s : {-1, 1}) {
        const double z = s * u.h();
        CHECK(w.p[0] * z + 0.5 * w.M(0, 0) * z * z <= std::abs(z) + 1e-12);
      }
    }
  CHECK(found);
  CHECK(r.count(Side::sub, Verdict::not_tested) == static_cast<int>(r.points.size()));

  options.rho = 2.0;
  options.side = Side::sub;
  const ViscosityReport bounded = check_viscosity(u, OperatorSpec::parse("linear:1"), f, options);
  for (const auto& p : bounded.points)
    if (p.node == origin) CHECK(p.sub == Verdict::vacuous);
}

TEST_CASE("strict sub- and supersolutions never fail their side") {
  Gen gen(12);
  const double h = 1.0 / 16;
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::Vector3d c(gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1));
    const double a = gen.uniform(0.2, 1), b = gen.uniform(1, 3);
    const auto value = [&](const Eigen::VectorXd& x) {
      return c[0] * x[0] * x[0] + c[1] * x[0] * x[1] + c[2] * x[1] * x[1] + a * std::sin(b * x[0] + x[1]);
    };
    const auto hessian = [&](const Eigen::VectorXd& x) {
      const double s = -a * std::sin(b * x[0] + x[1]);
      return SymMatrixd::from_dense(Eigen::Matrix2d{{2 * c[0] + b * b * s, c[1] + b * s}, {c[1] + b * s, 2 * c[2] + s}});
    };
    const OperatorSpec op(trial % 2 ? Family(family::PucciPlus{0.5, 2}) : Family(family::PucciMinus{0.5, 2}));
    GridFunction u = square(-1, 1, h);
    u.fill(value);
    for (double margin : {0.5, -0.5}) {
      GridFunction f = u.like().fill([&](const Eigen::VectorXd& x) {
        return evaluate(op, Jet::of_matrix(hessian(x))) - margin;
      });
      ViscosityOptions options;
      options.side = margin > 0 ? Side::sub : Side::super;
      const ViscosityReport r = check_viscosity(u, op, f, options);
      INFO("trial " << trial << " margin " << margin);
      CHECK(r.count(options.side, Verdict::fail) == 0);
    }
  }
}

TEST_CASE("pmc near its kink") {
  const AnalyticFunction pmc = fixture("pmc:0.3");
  const double h = 1.0 / 64;
  GridFunction u = GridFunction::box(Eigen::Vector2d(0.5, -0.5), Eigen::Vector2d(1.5, 0.5), h);
  u.fill(pmc.eval);
  GridFunction f = u.like();
  for (int i = 0; i < u.size(); ++i) {
    const Eigen::VectorXd x = u.point(i);
    f[i] = std::abs(x.norm() - 1) > 1e-12 ? pmc.rhs(x) : 1.0;
  }
  ViscosityOptions near, away;
  near.tol = away.tol = 1e-3;
  for (int i = 0; i < u.size(); ++i) {
    if (u.on_boundary(i) || std::abs(u.point(i)[1]) >= 0.25) continue;
    const double d = std::abs(u.point(i).norm() - 1);
    if (d < 2 * h) near.nodes.push_back(i);
    else if (d <= 6 * h) away.nodes.push_back(i);
  }

  // Off the stencil-straddling band the unbounded class passes both sides.
  const ViscosityReport a = check_viscosity(u, *pmc.op, f, away);
  CHECK(a.count(Side::super, Verdict::fail) == 0);
  CHECK(a.count(Side::sub, Verdict::fail) == 0);
  CHECK(a.count(Side::super, Verdict::pass) == static_cast<int>(away.nodes.size()));

  // Test functions with C^{1,1} norm at most 2 cannot touch near the vertical tangent.
  near.rho = 2.0;
  const ViscosityReport b = check_viscosity(u, *pmc.op, f, near);
  CHECK(b.count(Side::super, Verdict::fail) == 0);
  CHECK(b.count(Side::sub, Verdict::fail) == 0);
  CHECK(b.count(Side::super, Verdict::vacuous) == static_cast<int>(near.nodes.size()));
}

TEST_CASE("campanato csv") {
  CampanatoConfig config;
  config.levels = 2;
  const RegularityReport r = campanato_table(fixture("power:1.5,1"), Eigen::VectorXd::Zero(1), config);
  std::ostringstream os;
  write_campanato_csv(os, r, oscillation_profile(fixture("power:1.5,1"), Eigen::VectorXd::Zero(1), {0.5, 0.25, 0.125}));
  CHECK(os.str().rfind("r,E,osc\n0.5,", 0) == 0);
  int lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  CHECK(lines == 4);
}
