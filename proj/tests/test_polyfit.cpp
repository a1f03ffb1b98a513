#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "nelliptic/minimax.hpp"
#include "nelliptic/simplex.hpp"
#include "test_support.hpp"

using namespace nelliptic;
using nelliptic::testing::Gen;

namespace {

double naive_eval(const Polynomial& P, const Eigen::VectorXd& x) {
  double s = 0.0;
  const auto& idx = P.indices();
  for (std::size_t t = 0; t < idx.size(); ++t) {
    double mono = 1.0, fact = 1.0;
    for (int i = 0; i < P.dim(); ++i) {
      mono *= std::pow(x[i], idx[t][i]);
      fact *= std::tgamma(idx[t][i] + 1.0);
    }
    s += P.coeffs()[t] * mono / fact;
  }
  return s;
}

Polynomial random_poly(Gen& g, int n, int k) {
  Polynomial P(n, k);
  for (Eigen::Index t = 0; t < P.coeffs().size(); ++t) P.coeffs()[t] = g.uniform(-1, 1);
  return P;
}

SampledFunction sample_1d(int count, const std::function<double(double)>& f) {
  SampledFunction s{Eigen::MatrixXd(1, count), Eigen::VectorXd(count)};
  for (int i = 0; i < count; ++i) {
    const double x = -1.0 + 2.0 * i / (count - 1);
    s.points(0, i) = x;
    s.values[i] = f(x);
  }
  return s;
}

SampledFunction sample_ball(const Eigen::VectorXd& x0, double r, const std::function<double(const Eigen::VectorXd&)>& f,
                            int m = 8) {
  SampledFunction s;
  s.points = ball_lattice(x0, r, m);
  s.values.resize(s.points.cols());
  for (Eigen::Index i = 0; i < s.points.cols(); ++i) s.values[i] = f(s.points.col(i));
  return s;
}

// Discrete 1D minimax error by exhaustion: the best error on a finite set is
// the largest levelled error over its (k+2)-point subsets.
double subset_minimax_error(const SampledFunction& s, int degree) {
  const int N = s.size(), q = degree + 2;
  std::vector<int> pick(q);
  for (int i = 0; i < q; ++i) pick[i] = i;
  double best = 0.0;
  while (true) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < q; ++i) {
      double w = 1.0;
      for (int j = 0; j < q; ++j)
        if (j != i) w /= s.points(0, pick[i]) - s.points(0, pick[j]);
      num += w * s.values[pick[i]];
      den += std::abs(w);
    }
    best = std::max(best, std::abs(num) / den);
    int pos = q - 1;
    while (pos >= 0 && pick[pos] == N - q + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int i = pos + 1; i < q; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

}  // namespace

TEST_CASE("polynomial evaluation") {
  Polynomial P(2, 2);
  P.set_coefficient({2, 0}, 2.0);
  CHECK(P(Eigen::Vector2d(3, 0)) == doctest::Approx(9.0));
  CHECK(Polynomial::zero(3, 2)(Eigen::Vector3d(1, 2, 3)) == 0.0);
  Gen g(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = g.integer(1, 3), k = g.integer(0, 5);
    const Polynomial Q = random_poly(g, n, k);
    const Eigen::VectorXd x = g.vector(n, 1.5);
    CHECK(std::abs(Q(x) - naive_eval(Q, x)) <= 1e-13 * std::max(1.0, std::abs(naive_eval(Q, x))) * 10);
  }
}

TEST_CASE("polynomial norms") {
  Polynomial P(1, 1);
  P.set_coefficient({0}, 1.0);
  P.set_coefficient({1}, 1.0);
  CHECK(P.norm(2.0) == doctest::Approx(3.0));
  Gen g(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 3), k = g.integer(0, 4);
    const Polynomial Q = random_poly(g, n, k);
    CHECK(Q.norm() == Q.norm(1.0));
    const double c = g.uniform(0.1, 3.0);
    // oracle: coefficients of y -> Q(c y) are D^sigma of the composition, c^{|sigma|} a_sigma
    double manual = 0.0;
    for (std::size_t t = 0; t < Q.indices().size(); ++t)
      manual += std::abs(std::pow(c, multi_index_order(Q.indices()[t])) * Q.coeffs()[t]);
    CHECK(Q.rescaled(c).norm() == doctest::Approx(Q.norm(c)).epsilon(1e-14));
    CHECK(Q.rescaled(c).norm() == doctest::Approx(manual).epsilon(1e-14));
    const Eigen::VectorXd y = g.vector(n);
    CHECK(Q.rescaled(c)(y) == doctest::Approx(Q(c * y)).epsilon(1e-12));
  }
}

TEST_CASE("derivatives shift coefficients and match finite differences") {
  Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(1, 3), k = g.integer(1, 5);
    const Polynomial Q = random_poly(g, n, k);
    MultiIndex tau(n, 0);
    tau[g.integer(0, n - 1)] = 1;
    const Polynomial D = Q.derivative(tau);
    CHECK(D.degree() == k - 1);
    for (std::size_t t = 0; t < D.indices().size(); ++t) {
      MultiIndex s = D.indices()[t];
      for (int i = 0; i < n; ++i) s[i] += tau[i];
      CHECK(D.coeffs()[t] == Q.coefficient(s));
    }
    const Eigen::VectorXd x = g.vector(n);
    const Eigen::VectorXd grad = Q.gradient(x);
    const SymMatrixd hess = Q.hessian(x);
    const double h = 1e-4;
    for (int a = 0; a < n; ++a) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, a) * h;
      CHECK(std::abs(grad[a] - (Q(x + e) - Q(x - e)) / (2 * h)) <= 1e-6);
      for (int b = 0; b < n; ++b) {
        const Eigen::VectorXd f = Eigen::VectorXd::Unit(n, b) * h;
        const double fd = (Q(x + e + f) - Q(x + e - f) - Q(x - e + f) + Q(x - e - f)) / (4 * h * h);
        CHECK(std::abs(hess(a, b) - fd) <= 1e-5);
      }
    }
    const Eigen::VectorXd shift = g.vector(n);
    CHECK(Q.translated(shift)(x) == doctest::Approx(Q(x + shift)).epsilon(1e-12));
  }
}

TEST_CASE("simplex on a small LP with a known optimum") {
  // maximize 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
  Eigen::MatrixXd A(2, 4);
  A << 1, 1, 1, 0, 1, 3, 0, 1;
  const Eigen::VectorXd b = Eigen::Vector2d(4, 6);
  Eigen::VectorXd c(4);
  c << 3, 2, 0, 0;
  const auto sol = lp::maximize(A, b, c);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.objective == doctest::Approx(12.0));
  CHECK(sol.x[0] == doctest::Approx(4.0));
  CHECK(sol.duals[0] == doctest::Approx(3.0));

  Eigen::MatrixXd B(1, 1);
  B << 1;
  CHECK(lp::maximize(B, Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Ones(1)).status ==
        lp::Status::infeasible);
}

TEST_CASE("minimax fit of |x| by degree 1") {
  const auto s = sample_1d(201, [](double x) { return std::abs(x); });
  const auto fit = minimax_fit(s, Eigen::VectorXd::Zero(1), 1.0, 1);
  CHECK(fit.error == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.P.coefficient({0}) == doctest::Approx(0.5));
  CHECK(std::abs(fit.P.coefficient({1})) <= 1e-12);
  CHECK(alternation_count(s, Eigen::VectorXd::Zero(1), fit) >= 3);
  CHECK(!fit.active_points.empty());
}

TEST_CASE("minimax fit of x^3 by degree 2 matches the subset oracle") {
  const auto s = sample_1d(41, [](double x) { return x * x * x; });
  const auto fit = minimax_fit(s, Eigen::VectorXd::Zero(1), 1.0, 2);
  CHECK(std::abs(fit.error - subset_minimax_error(s, 2)) <= 1e-12);
  CHECK(std::abs(fit.error - 0.25) <= 1e-4);
  CHECK(fit.P.coefficient({1}) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(alternation_count(s, Eigen::VectorXd::Zero(1), fit) >= 4);
}

TEST_CASE("minimax equioscillation on dense 1D samples") {
  Gen g(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = g.integer(0, 4);
    const double a = g.uniform(0.5, 3.0), b = g.uniform(-1, 1);
    const auto s = sample_1d(301, [&](double x) { return std::exp(a * x) + std::abs(x - b); });
    const auto fit = minimax_fit(s, Eigen::VectorXd::Zero(1), 1.0, k);
    CHECK(alternation_count(s, Eigen::VectorXd::Zero(1), fit) >= k + 2);
  }
}

TEST_CASE("minimax recovers polynomials exactly") {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 3), k = g.integer(0, 3);
    const Polynomial Q = random_poly(g, n, k);
    const Eigen::VectorXd x0 = g.vector(n);
    const double r = g.uniform(0.05, 1.0);
    const auto s = sample_ball(x0, r, [&](const Eigen::VectorXd& x) { return Q(x - x0); }, n == 3 ? 4 : 8);
    const auto fit = minimax_fit(s, x0, r, k);
    CHECK(fit.error <= 1e-10);
    CHECK((fit.P.coeffs() - Q.coeffs()).cwiseAbs().maxCoeff() <= 1e-8 / std::pow(r, k));
  }
}

TEST_CASE("minimax error is monotone in degree and radius") {
  Gen g(6);
  const Eigen::Vector2d x0(0.1, -0.2);
  auto u = [](const Eigen::VectorXd& x) { return std::pow(x.norm(), 1.5) + std::sin(3 * x[0]); };
  SampledFunction s = sample_ball(x0, 1.0, u, 16);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 3; ++k) {
    const double e = minimax_fit(s, x0, 1.0, k).error;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  prev = 0.0;
  for (double r : {0.25, 0.5, 0.75, 1.0}) {
    const double e = minimax_fit(s, x0, r, 2).error;
    CHECK(e >= prev - 1e-12);
    prev = e;
  }
}

TEST_CASE("minimax translation equivariance") {
  Gen g(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector2d x0 = g.vector(2);
    const Polynomial Q = random_poly(g, 2, 2);
    auto u = [&](const Eigen::VectorXd& x) { return std::abs(x[0] - x0[0]) * (1 + x[1]); };
    const auto s = sample_ball(x0, 0.5, u);
    SampledFunction t = s;
    for (int i = 0; i < t.size(); ++i) t.values[i] += Q(t.points.col(i) - x0);
    const auto a = minimax_fit(s, x0, 0.5, 2), b = minimax_fit(t, x0, 0.5, 2);
    CHECK(std::abs(a.error - b.error) <= 1e-10);
    CHECK(((b.P - a.P) - Q).coeffs().cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("constrained fits: closed-form corrections") {
  const Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  auto u = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm() + 0.3 * x[0]; };
  const auto s = sample_ball(x0, 0.5, u);

  family::LinearConstant lap{SymMatrixd::identity(2), Eigen::VectorXd::Zero(2), 0.0};
  const auto fit = minimax_fit(s, x0, 0.5, 2, FitConstraint{OperatorSpec(lap), 4.0});
  CHECK(fit.constrained);
  CHECK(fit.t_correction == doctest::Approx(1.0).epsilon(1e-12));

  const auto ma = minimax_fit(s, x0, 0.5, 2, FitConstraint{OperatorSpec(family::MongeAmpere{}), 4.0});
  CHECK(ma.t_correction == doctest::Approx(1.0).epsilon(1e-10));
  const SymMatrixd H = ma.P.hessian(Eigen::Vector2d::Zero());
  CHECK(H.dense().determinant() == doctest::Approx(4.0).epsilon(1e-10));

  CHECK_THROWS_AS(minimax_fit(s, x0, 0.5, 2, FitConstraint{OperatorSpec(lap), 100.0}), Error);
  try {
    minimax_fit(s, x0, 0.5, 2, FitConstraint{OperatorSpec(lap), 100.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::constraint_infeasible);
  }
  CHECK_THROWS_AS(minimax_fit(s, x0, 0.5, 1, FitConstraint{OperatorSpec(lap), 1.0}), Error);
}

TEST_CASE("constrained fit satisfies its constraint and the error bound") {
  Gen g(8);
  const OperatorSpec ops[] = {OperatorSpec(family::MeanCurvature{}), OperatorSpec(family::Lagrangian{}),
                              OperatorSpec(family::PucciPlus{0.5, 2.0}), OperatorSpec(family::MongeAmpere{}),
                              OperatorSpec(family::SigmaK{1})};
  for (int trial = 0; trial < 40; ++trial) {
    const OperatorSpec& op = ops[trial % 5];
    const Eigen::Vector2d x0 = g.vector(2, 0.5);
    const double a = g.uniform(0.5, 1.5), b = g.uniform(0.5, 1.5), w = g.uniform(-0.2, 0.2);
    auto u = [&](const Eigen::VectorXd& x) {
      return 0.5 * a * x[0] * x[0] + 0.5 * b * x[1] * x[1] + w * std::pow(std::abs(x[0] - x0[0]), 2.5);
    };
    const double r = g.uniform(0.1, 0.4);
    const auto s = sample_ball(x0, r, u);
    const auto plain = minimax_fit(s, x0, r, 2);
    Jet j = Jet::zero(2);
    j.M = plain.P.hessian(Eigen::Vector2d::Zero());
    j.p = plain.P.gradient(Eigen::Vector2d::Zero());
    j.s = plain.P(Eigen::Vector2d::Zero());
    j.x = x0;
    const double f0 = evaluate(op, j) + g.uniform(-0.3, 0.3);
    const auto fit = minimax_fit(s, x0, r, 2, FitConstraint{op, f0});
    j.M = fit.P.hessian(Eigen::Vector2d::Zero());
    CHECK(std::abs(evaluate(op, j) - f0) <= 1e-10);
    CHECK(fit.error <= plain.error + 2 * std::abs(fit.t_correction) * r * r / 2 + 1e-12);
  }
}

TEST_CASE("degenerate sample geometry is a rank error") {
  SampledFunction s{Eigen::MatrixXd(2, 20), Eigen::VectorXd::Zero(20)};
  for (int i = 0; i < 20; ++i) s.points.col(i) = Eigen::Vector2d(i / 20.0, i / 20.0);
  try {
    minimax_fit(s, Eigen::Vector2d::Zero(), 2.0, 1);
    FAIL("expected a rank error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::rank);
  }
  CHECK_THROWS_AS(minimax_fit(sample_1d(2, [](double) { return 0.0; }), Eigen::VectorXd::Zero(1), 1.0, 2), Error);
}
