#pragma once

#include <Eigen/Dense>

#include <vector>

namespace nelliptic::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
  Status status = Status::iteration_limit;
  Eigen::VectorXd x;
  /// Simplex multipliers of the equality rows at the final basis.
  Eigen::VectorXd duals;
  double objective = 0.0;
  std::vector<int> basis;
  int iterations = 0;
};

struct Options {
  double tolerance = 1e-11;
  int max_iterations = 100000;
  /// Consecutive degenerate pivots before switching from Dantzig to Bland pricing.
  int degenerate_switch = 50;
};

/// maximize c.x subject to A x = b, x >= 0, by a two-phase revised simplex
/// with artificial slacks. Rows with negative b are negated internally.
Solution maximize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Options& options = {});

}  // namespace nelliptic::lp
