#include "nelliptic/simplex.hpp"

#include <cmath>
#include <limits>

#include "nelliptic/error.hpp"

namespace nelliptic::lp {

namespace {

// Columns 0..n-1 are structural, n..n+m-1 artificial (identity).
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Options& o)
      : a_(a), b_(b), m_(static_cast<int>(a.rows())), n_(static_cast<int>(a.cols())), opt_(o) {
    for (int i = 0; i < m_; ++i) basis_.push_back(n_ + i);
  }

  Eigen::VectorXd column(int j) const {
    if (j < n_) return a_.col(j);
    return Eigen::VectorXd::Unit(m_, j - n_);
  }

  Eigen::MatrixXd basis_matrix() const {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
    return B;
  }

  // Runs the simplex on cost vector `cost` (length n + m) over allowed columns.
  Status run(const Eigen::VectorXd& cost, bool allow_artificial, int& iterations) {
    int degenerate = 0;
    bool bland = false;
    while (iterations < opt_.max_iterations) {
      lu_.compute(basis_matrix());
      xb_ = lu_.solve(b_);
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      pi_ = lu_.transpose().solve(cb);

      const double scale = 1.0 + pi_.cwiseAbs().maxCoeff();
      int enter = -1;
      double best = opt_.tolerance * scale;
      const int limit = allow_artificial ? n_ + m_ : n_;
      std::vector<char> in_basis(n_ + m_, 0);
      for (int v : basis_) in_basis[v] = 1;
      for (int j = 0; j < limit; ++j) {
        if (in_basis[j]) continue;
        const double d = cost[j] - (j < n_ ? pi_.dot(a_.col(j)) : pi_[j - n_]);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return Status::optimal;

      const Eigen::VectorXd dir = lu_.solve(column(enter));
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      const double piv_tol = 1e-9 * (1.0 + dir.cwiseAbs().maxCoeff());
      for (int i = 0; i < m_; ++i) {
        if (dir[i] <= piv_tol) continue;
        const double r = std::max(xb_[i], 0.0) / dir[i];
        if (r < ratio - 1e-14 || (r <= ratio + 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
          ratio = std::min(ratio, r);
          leave = i;
        }
      }
      if (leave < 0) return Status::unbounded;
      if (ratio <= 1e-14) {
        if (++degenerate >= opt_.degenerate_switch) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      basis_[leave] = enter;
      ++iterations;
    }
    return Status::iteration_limit;
  }

  // Pivots basic artificials at zero level out of the basis where possible.
  bool drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      lu_.compute(basis_matrix());
      const Eigen::VectorXd row = lu_.transpose().solve(Eigen::VectorXd::Unit(m_, i));
      int best = -1;
      double best_val = 1e-9;
      std::vector<char> in_basis(n_ + m_, 0);
      for (int v : basis_) in_basis[v] = 1;
      for (int j = 0; j < n_; ++j) {
        if (in_basis[j]) continue;
        const double v = std::abs(row.dot(a_.col(j)));
        if (v > best_val) {
          best_val = v;
          best = j;
        }
      }
      if (best < 0) return false;
      basis_[i] = best;
    }
    return true;
  }

  const Eigen::MatrixXd& a_;
  Eigen::VectorXd b_;
  int m_, n_;
  Options opt_;
  std::vector<int> basis_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::VectorXd xb_, pi_;
};

}  // namespace

Solution maximize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Options& options) {
  require(A.rows() == b.size() && A.cols() == c.size(), ErrorKind::invalid_input, "simplex: dimension mismatch");
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  Eigen::MatrixXd a = A;
  Eigen::VectorXd rhs = b;
  std::vector<double> row_sign(m, 1.0);
  for (int i = 0; i < m; ++i)
    if (rhs[i] < 0) {
      a.row(i) *= -1.0;
      rhs[i] = -rhs[i];
      row_sign[i] = -1.0;
    }

  Solution sol;
  Tableau t(a, rhs, options);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  Status s = t.run(phase1, true, sol.iterations);
  if (s != Status::optimal) {
    sol.status = s;
    return sol;
  }
  const double infeas = -t.xb_.dot([&] {
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb[i] = phase1[t.basis_[i]];
    return cb;
  }());
  if (infeas > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
    sol.status = Status::infeasible;
    return sol;
  }
  require(t.drive_out_artificials(), ErrorKind::rank, "simplex: redundant equality rows");

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  sol.status = t.run(phase2, false, sol.iterations);
  sol.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (t.basis_[i] < n) sol.x[t.basis_[i]] = std::max(t.xb_[i], 0.0);
  sol.duals = t.pi_;
  for (int i = 0; i < m; ++i) sol.duals[i] *= row_sign[i];
  sol.objective = c.dot(sol.x);
  sol.basis = t.basis_;
  return sol;
}

}  // namespace nelliptic::lp
