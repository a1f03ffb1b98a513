#include "nelliptic/minimax.hpp"

#include <Eigen/QR>

#include <cmath>

#include "nelliptic/error.hpp"
#include "nelliptic/simplex.hpp"

namespace nelliptic {

SampledFunction SampledFunction::restricted(const Eigen::VectorXd& x0, double radius) const {
  std::vector<int> keep;
  const double lim = radius * (1.0 + 1e-12);
  for (int i = 0; i < size(); ++i)
    if ((points.col(i) - x0).norm() <= lim) keep.push_back(i);
  SampledFunction out{Eigen::MatrixXd(dim(), keep.size()), Eigen::VectorXd(keep.size())};
  for (std::size_t t = 0; t < keep.size(); ++t) {
    out.points.col(t) = points.col(keep[t]);
    out.values[t] = values[keep[t]];
  }
  return out;
}

Eigen::MatrixXd ball_lattice(const Eigen::VectorXd& x0, double radius, int m) {
  const int n = static_cast<int>(x0.size());
  const int side = 2 * m + 1;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= side;
  std::vector<Eigen::VectorXd> pts;
  Eigen::VectorXd off(n);
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    for (int a = 0; a < n; ++a) {
      off[a] = radius * static_cast<double>(rem % side - m) / m;
      rem /= side;
    }
    if (off.norm() <= radius * (1.0 + 1e-12)) pts.push_back(x0 + off);
  }
  Eigen::MatrixXd out(n, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out.col(i) = pts[i];
  return out;
}

namespace {

Jet correction_jet(const Polynomial& P, const Eigen::VectorXd& x0, double t) {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(P.dim());
  Jet j;
  j.M = P.hessian(z) + SymMatrixd::scaled_identity(P.dim(), t);
  j.p = P.gradient(z);
  j.s = P(z);
  j.x = x0;
  return j;
}

void fill_error(MinimaxFit& fit, const SampledFunction& u, const std::vector<int>& ids, const Eigen::VectorXd& x0) {
  Eigen::VectorXd res(u.size());
  for (int i = 0; i < u.size(); ++i) res[i] = u.values[i] - fit.P(u.points.col(i) - x0);
  fit.error = u.size() ? res.cwiseAbs().maxCoeff() : 0.0;
  fit.active_points.clear();
  for (int i = 0; i < u.size(); ++i)
    if (fit.error > 0 && std::abs(res[i]) >= fit.error * (1.0 - 1e-9)) fit.active_points.push_back(ids[i]);
}

}  // namespace

double solve_correction(const Polynomial& P, const Eigen::VectorXd& x0, const FitConstraint& c) {
  require(c.rho > 0, ErrorKind::parameter, "constraint: rho must be positive");
  auto admissible_at = [&](double t) { return admissible(c.op, correction_jet(P, x0, t)); };
  auto g = [&](double t) { return evaluate(c.op, correction_jet(P, x0, t)) - c.f0; };

  double lo = -0.5 * c.rho, hi = 0.5 * c.rho;
  require(admissible_at(hi), ErrorKind::constraint_infeasible, "constraint: no admissible correction in range");
  if (!admissible_at(lo)) {
    double bad = lo;
    for (int it = 0; it < 200 && hi - bad > 1e-15 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (bad + hi);
      if (admissible_at(mid)) hi = mid;
      else bad = mid;
    }
    lo = hi;
    hi = 0.5 * c.rho;
  }
  const double tol = 1e-13 * (1.0 + std::abs(c.f0));
  const double g_lo = g(lo), g_hi = g(hi);
  if (std::abs(g_lo) <= tol) return lo;
  if (std::abs(g_hi) <= tol) return hi;
  require(g_lo < 0 && g_hi > 0, ErrorKind::constraint_infeasible,
          "constraint: F - f0 does not change sign for |t| <= rho/2");

  double t = lo < 0.0 && hi > 0.0 ? 0.0 : 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gt = g(t);
    if (std::abs(gt) <= tol) return t;
    if (gt < 0) lo = t;
    else hi = t;
    if (hi - lo <= 4e-16 * (1.0 + std::abs(t))) return t;
    const double d = std::min(1e-6 * (1.0 + std::abs(t)), 0.25 * (hi - lo));
    double slope = std::nan("");
    try {
      slope = (g(t + d) - g(t - d)) / (2.0 * d);
    } catch (const Error&) {
    }
    double next = t - gt / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

MinimaxFit minimax_fit(const SampledFunction& u, const Eigen::VectorXd& x0, double radius, int degree,
                       const std::optional<FitConstraint>& constraint) {
  const int n = u.dim();
  require(x0.size() == n, ErrorKind::invalid_input, "minimax_fit: center dimension mismatch");
  require(radius > 0 && std::isfinite(radius), ErrorKind::parameter, "minimax_fit: radius must be positive");
  require(degree >= 0, ErrorKind::parameter, "minimax_fit: degree must be >= 0");
  require(u.values.size() == u.size(), ErrorKind::invalid_input, "minimax_fit: values/points size mismatch");
  require(u.values.allFinite(), ErrorKind::invalid_input, "minimax_fit: non-finite sample value");
  if (constraint) require(degree >= 2, ErrorKind::parameter, "minimax_fit: constrained fits need degree >= 2");

  std::vector<int> ids;
  const double lim = radius * (1.0 + 1e-12);
  for (int i = 0; i < u.size(); ++i)
    if ((u.points.col(i) - x0).norm() <= lim) ids.push_back(i);
  SampledFunction ball{Eigen::MatrixXd(n, ids.size()), Eigen::VectorXd(ids.size())};
  for (std::size_t t = 0; t < ids.size(); ++t) {
    ball.points.col(t) = u.points.col(ids[t]);
    ball.values[t] = u.values[ids[t]];
  }

  const int m = poly_space_dim(n, degree);
  const int N = ball.size();
  require(N >= m, ErrorKind::rank, "minimax_fit: fewer samples in the ball than polynomial coefficients");
  Eigen::MatrixXd design(N, m);
  for (int i = 0; i < N; ++i) design.row(i) = monomial_row((ball.points.col(i) - x0) / radius, degree).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  require(qr.rank() == m, ErrorKind::rank, "minimax_fit: sample geometry does not determine a degree-" +
                                               std::to_string(degree) + " polynomial");

  MinimaxFit fit;
  fit.P = Polynomial(n, degree);
  const double scale = ball.values.cwiseAbs().maxCoeff();
  if (scale > 0) {
    Eigen::MatrixXd A(m + 1, 2 * N);
    A.topLeftCorner(m, N) = design.transpose();
    A.topRightCorner(m, N) = -design.transpose();
    A.row(m).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
    b[m] = 1.0;
    Eigen::VectorXd c(2 * N);
    c.head(N) = ball.values / scale;
    c.tail(N) = -ball.values / scale;
    const lp::Solution sol = lp::maximize(A, b, c);
    require(sol.status == lp::Status::optimal, ErrorKind::iteration_limit, "minimax_fit: simplex did not converge");
    const auto& idx = fit.P.indices();
    for (int t = 0; t < m; ++t)
      fit.P.coeffs()[t] = scale * sol.duals[t] / std::pow(radius, multi_index_order(idx[t]));
  }
  fill_error(fit, ball, ids, x0);

  if (constraint) {
    fit.t_correction = solve_correction(fit.P, x0, *constraint);
    fit.constrained = true;
    for (int a = 0; a < n; ++a) {
      MultiIndex s(n, 0);
      s[a] = 2;
      fit.P.set_coefficient(s, fit.P.coefficient(s) + fit.t_correction);
    }
    fill_error(fit, ball, ids, x0);
  }
  return fit;
}

int alternation_count(const SampledFunction& u, const Eigen::VectorXd& x0, const MinimaxFit& fit, double tol) {
  int count = 0, last = 0;
  for (int i = 0; i < u.size(); ++i) {
    const double r = u.values[i] - fit.P(u.points.col(i) - x0);
    if (std::abs(r) < fit.error * (1.0 - tol) || fit.error == 0) continue;
    const int s = r > 0 ? 1 : -1;
    if (s != last) {
      ++count;
      last = s;
    }
  }
  return count;
}

}  // namespace nelliptic
