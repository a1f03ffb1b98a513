#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nelliptic/minimax.hpp"
#include "nelliptic/operators.hpp"
#include "nelliptic/polynomial.hpp"

namespace nelliptic {

/// A closed-form function with analytic derivatives, the equation it solves
/// and the pointwise regularity it is known to have.
struct AnalyticFunction {
  std::string name;
  int dim = 0;
  std::vector<double> params;
  std::function<double(const Eigen::VectorXd&)> eval;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<SymMatrixd(const Eigen::VectorXd&)> hess;
  /// Distance to the set where the function fails to be C^2 (infinity if none).
  std::function<double(const Eigen::VectorXd&)> singular_distance;
  std::optional<OperatorSpec> op;
  /// Right-hand side of op; closed form where one is known.
  std::function<double(const Eigen::VectorXd&)> rhs;
  std::string description;

  /// Jet (D^2u, Du, u, x) at a non-singular point.
  Jet jet(const Eigen::VectorXd& x) const;
  /// F(D^2u, Du, u, x) - f(x).
  double residual(const Eigen::VectorXd& x) const;
  SampledFunction sample(const Eigen::MatrixXd& points) const;
  /// Canonical "name:p1,p2" form accepted by fixture().
  std::string spec() const;
};

/// pmc:theta, hq:theta, slag:theta, quadratic[:a1,..,an], power:beta[,n],
/// harmonic[:k], ma_exp[:n].
AnalyticFunction fixture(const std::string& spec);
std::vector<std::string> fixture_names();

/// Supercritical margin inf min(n pi/2 - f, f + n pi/2) of the Lagrangian
/// phase fixture; f ranges over (pi/4, 3pi/4) so this is pi/4 for every theta.
double slag_phase_margin(double theta);

struct FixtureClaim {
  std::string fixture;
  Eigen::VectorXd point;
  int k = 0;
  /// Empty for polynomial fixtures (exactly representable at degree k).
  std::optional<double> alpha;
  std::string citation;
};
std::vector<FixtureClaim> fixture_claims();

/// Degree-k Taylor polynomial (k <= 2) in z = x - x0 from the analytic derivatives.
Polynomial taylor_of(const AnalyticFunction& u, const Eigen::VectorXd& x0, int k);

}  // namespace nelliptic
