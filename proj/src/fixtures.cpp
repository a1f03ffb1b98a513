#include "nelliptic/fixtures.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "nelliptic/error.hpp"
#include "nelliptic/text.hpp"

namespace nelliptic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OperatorSpec laplacian(int n) { return OperatorSpec(family::LinearConstant{SymMatrixd::identity(n), Eigen::VectorXd::Zero(n), 0.0}); }

/// Radial function u(|x|) from u' and u''.
void make_radial(AnalyticFunction& f, std::function<double(double)> u, std::function<double(double)> du,
                 std::function<double(double)> ddu) {
  f.eval = [u](const Eigen::VectorXd& x) { return u(x.norm()); };
  f.grad = [du](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double r = x.norm();
    return du(r) / r * x;
  };
  f.hess = [du, ddu](const Eigen::VectorXd& x) {
    const double r = x.norm();
    const Eigen::VectorXd e = x / r;
    const Eigen::MatrixXd P = e * e.transpose();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(x.size(), x.size());
    return SymMatrixd::from_dense(ddu(r) * P + du(r) / r * (I - P));
  };
}

AnalyticFunction pmc(double theta) {
  require(theta > 0 && theta < 0.5, ErrorKind::parameter,
          "pmc: theta must lie in (0, 1/2) for the prescribed mean curvature counterexample");
  AnalyticFunction f;
  f.name = "pmc";
  f.dim = 2;
  f.params = {theta};
  const double t = theta;
  auto u = [t](double r) { return r < 1 ? -std::pow(1 - r, t) : std::pow(r - 1, t); };
  auto du = [t](double r) { return t * std::pow(std::abs(r - 1), t - 1); };
  auto ddu = [t](double r) {
    return r < 1 ? t * (1 - t) * std::pow(1 - r, t - 2) : -t * (1 - t) * std::pow(r - 1, t - 2);
  };
  make_radial(f, u, du, ddu);
  f.singular_distance = [](const Eigen::VectorXd& x) { return std::min(x.norm(), std::abs(x.norm() - 1)); };
  f.op = OperatorSpec(family::MeanCurvature{});
  f.rhs = [du, ddu](const Eigen::VectorXd& x) {
    const double r = x.norm(), d = du(r), w2 = 1 + d * d;
    return ddu(r) / (w2 * std::sqrt(w2)) + d / (r * std::sqrt(w2));
  };
  f.description = "-(1-|x|)^theta inside the unit circle, (|x|-1)^theta outside; C^theta across |x| = 1";
  return f;
}

AnalyticFunction hq(double theta) {
  require(theta > 0 && theta < 1, ErrorKind::parameter, "hq: theta must lie in (0, 1) for the Hessian quotient example");
  AnalyticFunction f;
  f.name = "hq";
  f.dim = 3;
  f.params = {theta};
  const double t = theta;
  f.eval = [t](const Eigen::VectorXd& x) {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]) + std::pow(std::abs(x[2]), 1 + t) / (1 + t);
  };
  f.grad = [t](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double s = x[2] < 0 ? -1.0 : 1.0;
    return Eigen::Vector3d(x[0], x[1], s * std::pow(std::abs(x[2]), t));
  };
  f.hess = [t](const Eigen::VectorXd& x) {
    return SymMatrixd::diagonal(Eigen::Vector3d(1, 1, t * std::pow(std::abs(x[2]), t - 1)));
  };
  f.singular_distance = [](const Eigen::VectorXd& x) { return std::abs(x[2]); };
  f.op = OperatorSpec(family::HessianQuotient{2, 1});
  f.rhs = [t](const Eigen::VectorXd& x) {
    const double mu = t * std::pow(std::abs(x[2]), t - 1);
    return (1 + 2 * mu) / (2 + mu);
  };
  f.description = "|x'|^2/2 + |x_3|^(1+theta)/(1+theta) for sigma_2/sigma_1 in R^3; C^{1,theta} at 0";
  return f;
}

AnalyticFunction slag(double theta) {
  require(theta > 0 && theta < 1, ErrorKind::parameter,
          "slag: theta must lie in (0, 1) for the Lagrangian phase example");
  AnalyticFunction f;
  f.name = "slag";
  f.dim = 2;
  f.params = {theta};
  const double t = theta;
  f.eval = [t](const Eigen::VectorXd& x) { return std::pow(std::abs(x[0]), 1 + t) / (1 + t) + 0.5 * x[1] * x[1]; };
  f.grad = [t](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double s = x[0] < 0 ? -1.0 : 1.0;
    return Eigen::Vector2d(s * std::pow(std::abs(x[0]), t), x[1]);
  };
  f.hess = [t](const Eigen::VectorXd& x) {
    return SymMatrixd::diagonal(Eigen::Vector2d(t * std::pow(std::abs(x[0]), t - 1), 1));
  };
  f.singular_distance = [](const Eigen::VectorXd& x) { return std::abs(x[0]); };
  f.op = OperatorSpec(family::Lagrangian{});
  f.rhs = [t](const Eigen::VectorXd& x) { return 0.75 * M_PI - std::atan(std::pow(std::abs(x[0]), 1 - t) / t); };
  f.description = "|x_1|^(1+theta)/(1+theta) + x_2^2/2 for the Lagrangian phase; C^{1,theta} at 0 only";
  return f;
}

AnalyticFunction quadratic(const std::vector<double>& diag) {
  const int n = static_cast<int>(diag.size());
  require(n >= 1, ErrorKind::parameter, "quadratic: need at least one coefficient");
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) a[i] = diag[i];
  AnalyticFunction f;
  f.name = "quadratic";
  f.dim = n;
  f.params = diag;
  f.eval = [a](const Eigen::VectorXd& x) { return 0.5 * x.dot(a.cwiseProduct(x)); };
  f.grad = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a.cwiseProduct(x); };
  f.hess = [a](const Eigen::VectorXd&) { return SymMatrixd::diagonal(a); };
  f.singular_distance = [](const Eigen::VectorXd&) { return kInf; };
  f.op = OperatorSpec(family::MongeAmpere{});
  const double det = a.prod();
  f.rhs = [det](const Eigen::VectorXd&) { return det; };
  f.description = "sum a_i x_i^2 / 2";
  return f;
}

AnalyticFunction power(double beta, int n) {
  require(beta > 0, ErrorKind::parameter, "power: beta must be positive");
  require(n >= 1 && n <= 3, ErrorKind::parameter, "power: dimension must be 1, 2 or 3");
  AnalyticFunction f;
  f.name = "power";
  f.dim = n;
  f.params = {beta, double(n)};
  const double b = beta;
  make_radial(
      f, [b](double r) { return std::pow(r, b); }, [b](double r) { return b * std::pow(r, b - 1); },
      [b](double r) { return b * (b - 1) * std::pow(r, b - 2); });
  f.singular_distance = [](const Eigen::VectorXd& x) { return x.norm(); };
  f.op = laplacian(n);
  f.rhs = [b, n](const Eigen::VectorXd& x) { return b * (b + n - 2) * std::pow(x.norm(), b - 2); };
  f.description = "|x|^beta";
  return f;
}

AnalyticFunction harmonic(int k) {
  require(k >= 1 && k <= 8, ErrorKind::parameter, "harmonic: degree must be in 1..8");
  AnalyticFunction f;
  f.name = "harmonic";
  f.dim = 2;
  f.params = {double(k)};
  // Re (x1 + i x2)^k and its derivatives through k z^{k-1}, k(k-1) z^{k-2}.
  auto zpow = [](const Eigen::VectorXd& x, int m) {
    std::complex<double> z(x[0], x[1]), w(1, 0);
    for (int i = 0; i < m; ++i) w *= z;
    return w;
  };
  f.eval = [k, zpow](const Eigen::VectorXd& x) { return zpow(x, k).real(); };
  f.grad = [k, zpow](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const std::complex<double> d = double(k) * zpow(x, k - 1);
    return Eigen::Vector2d(d.real(), -d.imag());
  };
  f.hess = [k, zpow](const Eigen::VectorXd& x) {
    const std::complex<double> d = k >= 2 ? double(k * (k - 1)) * zpow(x, k - 2) : 0.0;
    Eigen::Matrix2d h;
    h << d.real(), -d.imag(), -d.imag(), -d.real();
    return SymMatrixd::from_dense(h);
  };
  f.singular_distance = [](const Eigen::VectorXd&) { return kInf; };
  f.op = laplacian(2);
  f.rhs = [](const Eigen::VectorXd&) { return 0.0; };
  f.description = "Re (x1 + i x2)^k";
  return f;
}

AnalyticFunction ma_exp(int n) {
  require(n >= 1 && n <= 3, ErrorKind::parameter, "ma_exp: dimension must be 1, 2 or 3");
  AnalyticFunction f;
  f.name = "ma_exp";
  f.dim = n;
  f.params = {double(n)};
  f.eval = [](const Eigen::VectorXd& x) { return std::exp(0.5 * x.squaredNorm()); };
  f.grad = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return std::exp(0.5 * x.squaredNorm()) * x; };
  f.hess = [n](const Eigen::VectorXd& x) {
    return SymMatrixd::from_dense(std::exp(0.5 * x.squaredNorm()) *
                                  (Eigen::MatrixXd::Identity(n, n) + x * x.transpose()));
  };
  f.singular_distance = [](const Eigen::VectorXd&) { return kInf; };
  f.op = OperatorSpec(family::MongeAmpere{});
  f.rhs = [n](const Eigen::VectorXd& x) { return std::exp(n * 0.5 * x.squaredNorm()) * (1 + x.squaredNorm()); };
  f.description = "exp(|x|^2/2), strictly convex";
  return f;
}

}  // namespace

Jet AnalyticFunction::jet(const Eigen::VectorXd& x) const {
  require(x.size() == dim, ErrorKind::invalid_input, name + ": point dimension mismatch");
  require(singular_distance(x) > 0, ErrorKind::singularity, name + ": point lies on the singular set");
  return Jet{hess(x), grad(x), eval(x), x};
}

double AnalyticFunction::residual(const Eigen::VectorXd& x) const {
  require(op.has_value(), ErrorKind::invalid_input, name + ": no equation attached");
  return evaluate(*op, jet(x)) - rhs(x);
}

SampledFunction AnalyticFunction::sample(const Eigen::MatrixXd& points) const {
  require(points.rows() == dim, ErrorKind::invalid_input, name + ": sample dimension mismatch");
  SampledFunction s{points, Eigen::VectorXd(points.cols())};
  for (Eigen::Index i = 0; i < points.cols(); ++i) s.values[i] = eval(points.col(i));
  return s;
}

std::string AnalyticFunction::spec() const {
  std::string s = name;
  for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : ":") + format_double(params[i]);
  return s;
}

AnalyticFunction fixture(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::vector<double> p =
      colon == std::string::npos ? std::vector<double>{} : parse_double_list(spec.substr(colon + 1));
  auto count = [&](std::size_t lo, std::size_t hi) {
    require(p.size() >= lo && p.size() <= hi, ErrorKind::invalid_input, "fixture '" + spec + "': wrong number of parameters");
  };
  auto as_int = [&](double v) {
    require(v == std::floor(v), ErrorKind::parameter, "fixture '" + spec + "': expected an integer parameter");
    return static_cast<int>(v);
  };
  if (name == "pmc") {
    count(1, 1);
    return pmc(p[0]);
  }
  if (name == "hq") {
    count(1, 1);
    return hq(p[0]);
  }
  if (name == "slag") {
    count(1, 1);
    return slag(p[0]);
  }
  if (name == "quadratic") return quadratic(p.empty() ? std::vector<double>{1.0, 1.0} : p);
  if (name == "power") {
    count(1, 2);
    return power(p[0], p.size() == 2 ? as_int(p[1]) : 2);
  }
  if (name == "harmonic") {
    count(0, 1);
    return harmonic(p.empty() ? 3 : as_int(p[0]));
  }
  if (name == "ma_exp") {
    count(0, 1);
    return ma_exp(p.empty() ? 2 : as_int(p[0]));
  }
  throw Error(ErrorKind::invalid_input, "unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() { return {"pmc", "hq", "slag", "quadratic", "power", "harmonic", "ma_exp"}; }

double slag_phase_margin(double theta) {
  require(theta > 0 && theta < 1, ErrorKind::parameter, "slag: theta must lie in (0, 1)");
  // f = pi/4 + arctan(theta |x1|^(theta-1)) sweeps (pi/4, 3pi/4) as |x1| runs over (0, inf).
  const double sup_f = 0.75 * M_PI, inf_f = 0.25 * M_PI;
  return std::min(M_PI - sup_f, inf_f + M_PI);
}

std::vector<FixtureClaim> fixture_claims() {
  return {
      {"pmc:0.3", Eigen::Vector2d(1, 0), 0, 0.3, "prescribed mean curvature counterexample: C^theta on the unit circle"},
      {"slag:0.4", Eigen::Vector2d(0, 0), 1, 0.4, "Lagrangian phase example: C^{1,theta} at the origin only"},
      {"hq:0.5", Eigen::Vector3d(0, 0, 0), 1, 0.5, "Hessian quotient example: C^{1,theta} at the origin"},
      {"quadratic", Eigen::Vector2d(0.3, -0.2), 2, std::nullopt, "quadratic calibration: exact at degree 2"},
  };
}

Polynomial taylor_of(const AnalyticFunction& u, const Eigen::VectorXd& x0, int k) {
  require(k >= 0 && k <= 2, ErrorKind::parameter, "taylor_of: degree must be 0, 1 or 2");
  require(x0.size() == u.dim, ErrorKind::invalid_input, "taylor_of: point dimension mismatch");
  require(u.singular_distance(x0) > 0, ErrorKind::singularity, u.name + ": Taylor polynomial at a singular point");
  const int n = u.dim;
  Polynomial P(n, k);
  P.set_coefficient(MultiIndex(n, 0), u.eval(x0));
  if (k >= 1) {
    const Eigen::VectorXd g = u.grad(x0);
    for (int a = 0; a < n; ++a) {
      MultiIndex s(n, 0);
      s[a] = 1;
      P.set_coefficient(s, g[a]);
    }
  }
  if (k >= 2) {
    const SymMatrixd h = u.hess(x0);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        MultiIndex s(n, 0);
        ++s[a];
        ++s[b];
        P.set_coefficient(s, h(a, b));
      }
  }
  return P;
}

}  // namespace nelliptic
