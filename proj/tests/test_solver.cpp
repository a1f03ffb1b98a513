#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nelliptic/error.hpp"
#include "nelliptic/solver.hpp"
#include "test_support.hpp"

using namespace nelliptic;
using nelliptic::testing::Gen;

namespace {

GridFunction square(double h, double half = 1.0) {
  return GridFunction::box(Eigen::Vector2d(-half, -half), Eigen::Vector2d(half, half), h);
}

GridFunction field(double h, const std::function<double(const Eigen::VectorXd&)>& fn) { return square(h).fill(fn); }

GridFunction constant(double h, double c) {
  return field(h, [c](const Eigen::VectorXd&) { return c; });
}

double sup_diff(const GridFunction& a, const GridFunction& b) { return (a.values() - b.values()).lpNorm<Eigen::Infinity>(); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::usage;
}

SymMatrixd diag(double a, double b) { return SymMatrixd::diagonal(Eigen::Vector2d(a, b)); }

/// Random boundary data and its pointwise-larger companion.
std::pair<GridFunction, GridFunction> ordered_pair(Gen& gen, const GridFunction& base, double spread) {
  GridFunction lo = base, hi = base;
  for (int i = 0; i < base.size(); ++i) {
    lo[i] += gen.uniform(-spread, spread);
    hi[i] = lo[i] + gen.uniform(0, spread);
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("stencil vectors are primitive and cover the axes") {
  const auto v = stencil_vectors(8, 2);
  CHECK(v.size() == 8);
  CHECK(v[0] == Eigen::Vector2i(1, 0));
  CHECK(v[1] == Eigen::Vector2i(2, 1));
  CHECK(v[2] == Eigen::Vector2i(1, 1));
  CHECK(v[4] == Eigen::Vector2i(0, 1));
  CHECK(stencil_radius(4) == 1);
  CHECK(stencil_radius(16) == 4);
}

TEST_CASE("linear solver examples") {
  const double h = 1.0 / 16;
  const auto saddle = [](const Eigen::VectorXd& x) { return x[0] * x[0] - x[1] * x[1]; };
  const SolveResult harmonic = solve_linear(SymMatrixd::identity(2), Eigen::VectorXd(), constant(h, 0), field(h, saddle));
  CHECK(sup_diff(harmonic.u, field(h, saddle)) <= 1e-10);

  const GridFunction unit = GridFunction::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), h);
  const SolveResult bowl = solve_linear(SymMatrixd::identity(2), Eigen::VectorXd(), unit.like().fill([](auto&) { return 1.0; }),
                                        unit.like());
  Eigen::Index at;
  const double low = bowl.u.values().minCoeff(&at);
  CHECK(low < 0);
  CHECK(bowl.u.point(static_cast<int>(at)).isApprox(Eigen::Vector2d(0.5, 0.5)));

  const auto affine = [](const Eigen::VectorXd& x) { return 0.3 - 1.2 * x[0] + 0.7 * x[1]; };
  CHECK(sup_diff(solve_linear(diag(1, 2), Eigen::VectorXd(), constant(h, 0), field(h, affine)).u, field(h, affine)) <=
        1e-12);

  // Mixed coefficients and drift: central differences are exact on quadratics.
  const SymMatrixd A = SymMatrixd::from_dense(Eigen::Matrix2d{{2, -0.5}, {-0.5, 1}});
  const Eigen::Vector2d b(0.3, -0.2);
  const auto q = [](const Eigen::VectorXd& x) { return x[0] * x[0] + 3 * x[0] * x[1] - 0.5 * x[1] * x[1] + x[1]; };
  const auto rhs = [&](const Eigen::VectorXd& x) {
    // A : D^2q + b . Dq, D^2q = [[2, 3], [3, -1]]
    return 2 * 2 + 2 * (-0.5) * 3 + 1 * (-1) + b[0] * (2 * x[0] + 3 * x[1]) + b[1] * (3 * x[0] - x[1] + 1);
  };
  CHECK(sup_diff(solve_linear(A, b, field(h, rhs), field(h, q)).u, field(h, q)) <= 1e-10);

  const SymMatrixd skew = SymMatrixd::from_dense(Eigen::Matrix2d{{1, 2}, {2, 5}});
  CHECK(kind_of([&] { solve_linear(skew, Eigen::VectorXd(), constant(h, 0), constant(h, 0)); }) == ErrorKind::anisotropy);
  CHECK(kind_of([&] { solve_linear(diag(1, -1), Eigen::VectorXd(), constant(h, 0), constant(h, 0)); }) ==
        ErrorKind::parameter);
}

TEST_CASE("pucci solver examples") {
  const double h = 1.0 / 16;
  const GridFunction g = field(h, [](const Eigen::VectorXd& x) { return std::sin(x[0]) + x[1] * x[1]; });
  const GridFunction f = field(h, [](const Eigen::VectorXd& x) { return 1 + x[0]; });
  const SolveResult lin = solve_linear(SymMatrixd::identity(2), Eigen::VectorXd(), f, g);
  CHECK(sup_diff(solve_pucci(1, 1, PucciSign::plus, f, g).u, lin.u) <= 1e-9);
  CHECK(sup_diff(solve_pucci(1, 1, PucciSign::minus, f, g).u, lin.u) <= 1e-9);

  const GridFunction gpos = field(h, [](const Eigen::VectorXd& x) { return std::abs(x[0] * x[1]) + 0.1 * x[0] * x[0]; });
  SolveConfig config;
  for (PucciSign s : {PucciSign::plus, PucciSign::minus})
    CHECK(solve_pucci(0.5, 2, s, constant(h, 0), gpos, config).u.values().minCoeff() >= -config.tol);

  const GridFunction upper = solve_pucci(0.5, 2, PucciSign::plus, f, g).u;
  const GridFunction lower = solve_pucci(0.5, 2, PucciSign::minus, f, g).u;
  CHECK((upper.values() - lower.values()).minCoeff() >= -1e-8);
  CHECK((upper.values() - lower.values()).maxCoeff() > 1e-3);
  CHECK_THROWS_AS(solve_pucci(2, 1, PucciSign::plus, f, g), Error);
}

TEST_CASE("monge-ampere solver examples") {
  const double h = 1.0 / 16;
  const auto half = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  const SolveResult a = solve_monge_ampere(constant(h, 1), field(h, half));
  CHECK(sup_diff(a.u, field(h, half)) <= 1e-8);
  CHECK(a.residual <= SolveConfig{}.tol);

  const auto full = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  CHECK(sup_diff(solve_monge_ampere(constant(h, 4), field(h, full)).u, field(h, full)) <= 1e-8);

  const auto aligned = [](const Eigen::VectorXd& x) { return 0.5 * (x[0] * x[0] + 4 * x[1] * x[1]); };
  CHECK(sup_diff(solve_monge_ampere(constant(h, 4), field(h, aligned)).u, field(h, aligned)) <= 1e-8);

  GridFunction bad = constant(h, 1);
  bad[bad.index({8, 8})] = 0;
  CHECK(kind_of([&] { solve_monge_ampere(bad, field(h, half)); }) == ErrorKind::admissibility);

  SolveConfig once;
  once.max_iters = 1;
  const auto bump = [](const Eigen::VectorXd& x) { return std::exp(0.5 * x.squaredNorm()); };
  const auto rhs = [](const Eigen::VectorXd& x) { return (1 + x.squaredNorm()) * std::exp(x.squaredNorm()); };
  CHECK(kind_of([&] { solve_monge_ampere(field(h, rhs), field(h, bump), once); }) == ErrorKind::iteration_limit);
}

TEST_CASE("monge-ampere error decreases under refinement") {
  const auto exact = [](const Eigen::VectorXd& x) { return std::exp(0.5 * x.squaredNorm()); };
  const auto rhs = [](const Eigen::VectorXd& x) { return (1 + x.squaredNorm()) * std::exp(x.squaredNorm()); };
  double previous = INFINITY;
  for (double h : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const SolveResult r = solve_monge_ampere(field(h, rhs), field(h, exact));
    const double err = sup_diff(r.u, field(h, exact));
    MESSAGE("h = " << h << " error = " << err << " newton steps = " << r.iterations);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("mean curvature solver examples") {
  const double h = 1.0 / 16;
  const auto affine = [](const Eigen::VectorXd& x) { return 0.4 * x[0] - 0.3 * x[1] + 0.2; };
  const SolveResult flat = solve_mean_curvature(constant(h, 0), field(h, affine));
  CHECK(sup_diff(flat.u, field(h, affine)) <= 1e-10);

  const auto bump = [](const Eigen::VectorXd& x) {
    return 0.05 * std::exp(-(x - Eigen::Vector2d(0.5, 0)).squaredNorm());
  };
  const SolveResult small = solve_mean_curvature(constant(h, 0), field(h, bump));
  CHECK(small.residual <= SolveConfig{}.tol);
  double grad = 0;
  for (int i = 0; i < small.u.size(); ++i)
    if (!small.u.on_boundary(i)) grad = std::max(grad, discrete_jet(small.u, i).p.norm());
  CHECK(grad < 0.1);
  CHECK(small.history.size() >= 2);

  const auto large = [](const Eigen::VectorXd& x) { return 10 * x[0] * x[0]; };
  CHECK(kind_of([&] { solve_mean_curvature(constant(h, 0), field(h, large)); }) == ErrorKind::small_data);
  CHECK(kind_of([&] { solve_mean_curvature(constant(h, 0.5), field(h, affine)); }) == ErrorKind::small_data);
}

TEST_CASE("residual of exact and perturbed solutions") {
  const double h = 1.0 / 16;
  const auto q = [](const Eigen::VectorXd& x) { return 0.5 * x[0] * x[0] + 0.25 * x[0] * x[1] + x[1] * x[1]; };
  const GridFunction u = field(h, q);
  const GridFunction f = constant(h, 1 * 2 - 0.25 * 0.25);
  CHECK(residual(OperatorSpec(family::MongeAmpere{}), u, f).values().lpNorm<Eigen::Infinity>() <= 1e-9);

  // d/de det(M + e B) = tr(cof(M) B); cof of [[1, 1/4], [1/4, 2]] is [[2, -1/4], [-1/4, 1]].
  const auto bump = [](const Eigen::VectorXd& x) { return std::exp(-4 * x.squaredNorm()); };
  const GridFunction b = field(h, bump);
  const int node = u.index({10, 7});
  const SymMatrixd B = discrete_jet(b, node).M;
  const double slope = 2 * B(0, 0) - 2 * 0.25 * B(0, 1) + B(1, 1);
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    GridFunction v = u;
    v.values() += eps * b.values();
    const double r = residual(OperatorSpec(family::MongeAmpere{}), v, f)[node];
    CHECK(std::abs(r / eps - slope) <= 2 * eps * std::abs(B.dense().determinant()) + 1e-6);
  }
}

TEST_CASE("solver output satisfies the pointwise residual on quadratics") {
  const double h = 1.0 / 8;
  const auto q = [](const Eigen::VectorXd& x) { return 1.5 * x[0] * x[0] - 0.5 * x[1] * x[1]; };
  const OperatorSpec op(family::PucciPlus{0.5, 2});
  const GridFunction f = constant(h, 2 * 3 - 0.5 * 1);
  const SolveResult r = solve_pucci(0.5, 2, PucciSign::plus, f, field(h, q));
  CHECK(residual(op, r.u, f).values().lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("quadratics diagonalized by stencil directions are reproduced") {
  Gen gen(11);
  const double h = 1.0 / 8;
  const Eigen::Matrix2d rot45 = Eigen::Matrix2d{{1, -1}, {1, 1}} / std::sqrt(2.0);
  for (int trial = 0; trial < 12; ++trial) {
    const bool rotate = trial % 2 == 1;
    const Eigen::Vector2d d(gen.uniform(0.2, 3), gen.uniform(0.2, 3));
    const Eigen::Matrix2d R = rotate ? rot45 : Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d H = R * d.asDiagonal() * R.transpose();
    const Eigen::Vector2d p = gen.vector(2);
    const auto q = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(H * x) + p.dot(x); };
    const GridFunction g = field(h, q);
    INFO("trial " << trial);
    CHECK(sup_diff(solve_monge_ampere(constant(h, d[0] * d[1]), g).u, g) <= 1e-8);

    const double lambda = gen.uniform(0.2, 1), Lambda = lambda + gen.uniform(0, 2);
    const Eigen::Vector2d e(d[0], -d[1]);
    const Eigen::Matrix2d He = R * e.asDiagonal() * R.transpose();
    const auto qe = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(He * x); };
    const double plus = Lambda * e[0] - lambda * d[1], minus = lambda * e[0] - Lambda * d[1];
    CHECK(sup_diff(solve_pucci(lambda, Lambda, PucciSign::plus, constant(h, plus), field(h, qe)).u, field(h, qe)) <=
          1e-8);
    CHECK(sup_diff(solve_pucci(lambda, Lambda, PucciSign::minus, constant(h, minus), field(h, qe)).u, field(h, qe)) <=
          1e-8);

    if (!rotate) {
      const SymMatrixd A = diag(gen.uniform(0.5, 2), gen.uniform(0.5, 2));
      const double rhs = A(0, 0) * e[0] + A(1, 1) * e[1];
      CHECK(sup_diff(solve_linear(A, Eigen::VectorXd(), constant(h, rhs), field(h, qe)).u, field(h, qe)) <= 1e-10);
    }
  }
}

TEST_CASE("discrete comparison for every scheme") {
  Gen gen(5);
  const double h = 1.0 / 4;
  const GridFunction base = square(h).fill([](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm() + 0.2; });
  for (int trial = 0; trial < 10; ++trial) {
    INFO("trial " << trial);
    const auto [g1, g2] = ordered_pair(gen, base, 0.05);
    GridFunction f2 = square(h), f1 = square(h);
    for (int i = 0; i < f2.size(); ++i) {
      f2[i] = gen.uniform(0.5, 1.5);
      f1[i] = f2[i] + gen.uniform(0, 0.5);
    }
    const double tol = 1e-8;
    const auto check_pair = [&](const GridFunction& u1, const GridFunction& u2) {
      CHECK((u1.values() - u2.values()).maxCoeff() <= tol);
    };
    const SymMatrixd A = SymMatrixd::from_dense(Eigen::Matrix2d{{1.5, 0.4}, {0.4, 1}});
    check_pair(solve_linear(A, Eigen::Vector2d(0.2, -0.1), f1, g1).u, solve_linear(A, Eigen::Vector2d(0.2, -0.1), f2, g2).u);
    const double lambda = gen.uniform(0.3, 1), Lambda = lambda + gen.uniform(0, 2);
    for (PucciSign s : {PucciSign::plus, PucciSign::minus})
      check_pair(solve_pucci(lambda, Lambda, s, f1, g1).u, solve_pucci(lambda, Lambda, s, f2, g2).u);
    check_pair(solve_monge_ampere(f1, g1).u, solve_monge_ampere(f2, g2).u);

    GridFunction m1 = f1, m2 = f2;
    m1.values() *= 0.05;
    m2.values() *= 0.05;
    GridFunction s1 = g1, s2 = g2;
    s1.values() -= base.values();
    s2.values() -= base.values();
    check_pair(solve_mean_curvature(m1, s1).u, solve_mean_curvature(m2, s2).u);
  }
}

TEST_CASE("pucci ordering on random data") {
  Gen gen(8);
  const double h = 1.0 / 8;
  for (int trial = 0; trial < 6; ++trial) {
    GridFunction f = square(h), g = square(h);
    for (int i = 0; i < f.size(); ++i) {
      f[i] = gen.uniform(-1, 1);
      g[i] = gen.uniform(-1, 1);
    }
    const double lambda = gen.uniform(0.2, 1), Lambda = lambda + gen.uniform(0, 3);
    const GridFunction lo = solve_pucci(lambda, Lambda, PucciSign::minus, f, g).u;
    const GridFunction hi = solve_pucci(lambda, Lambda, PucciSign::plus, f, g).u;
    CHECK((lo.values() - hi.values()).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("solutions do not depend on the thread count") {
  const double h = 1.0 / 16;
  const auto exact = [](const Eigen::VectorXd& x) { return std::exp(0.5 * x.squaredNorm()); };
  const auto rhs = [](const Eigen::VectorXd& x) { return (1 + x.squaredNorm()) * std::exp(x.squaredNorm()); };
  SolveConfig one, four;
  four.threads = 4;
  const SolveResult a = solve_monge_ampere(field(h, rhs), field(h, exact), one);
  const SolveResult b = solve_monge_ampere(field(h, rhs), field(h, exact), four);
  CHECK(a.u.values() == b.u.values());
  CHECK(a.history == b.history);
}
