#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "nelliptic/operators.hpp"
#include "nelliptic/polynomial.hpp"

namespace nelliptic {

/// Values u(x_i) at sample points stored as the columns of `points`.
struct SampledFunction {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
  /// The samples with |x - x0| <= radius (plus a relative 1e-12 slack).
  SampledFunction restricted(const Eigen::VectorXd& x0, double radius) const;
};

/// F(D^2P + tI, DP(0), P(0), x0) = f0, with t searched in [-rho/2, rho/2].
struct FitConstraint {
  OperatorSpec op;
  double f0 = 0.0;
  double rho = 4.0;
};

struct MinimaxFit {
  /// P in the local variable z = x - x0.
  Polynomial P;
  double error = 0.0;
  std::vector<int> active_points;
  bool constrained = false;
  double t_correction = 0.0;
};

/// Best sup-norm approximation of u on the samples inside B_radius(x0) by
/// polynomials of degree <= k, optionally followed by the t I correction.
MinimaxFit minimax_fit(const SampledFunction& u, const Eigen::VectorXd& x0, double radius, int degree,
                       const std::optional<FitConstraint>& constraint = std::nullopt);

/// Unique t with F(D^2P(0) + tI, DP(0), P(0), x0) = f0 on the admissible part
/// of [-rho/2, rho/2]; constraint-infeasible error when there is no sign change.
double solve_correction(const Polynomial& P, const Eigen::VectorXd& x0, const FitConstraint& constraint);

/// Largest number of alternating-sign residuals u_i - P(x_i - x0) at level
/// >= error (1 - tol), taken in the order of the samples.
int alternation_count(const SampledFunction& u, const Eigen::VectorXd& x0, const MinimaxFit& fit, double tol = 1e-6);

/// (2m+1)^n tensor lattice on [-r, r]^n around x0, intersected with the ball.
Eigen::MatrixXd ball_lattice(const Eigen::VectorXd& x0, double radius, int m = 8);

}  // namespace nelliptic
