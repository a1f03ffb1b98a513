#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "nelliptic/sym_matrix.hpp"

namespace nelliptic {

using MultiIndex = std::vector<int>;

int multi_index_order(const MultiIndex& sigma);
double multi_index_factorial(const MultiIndex& sigma);

/// All multi-indices with |sigma| <= degree in graded order: by total degree,
/// then lexicographically descending ((2,0), (1,1), (0,2), ...).
const std::vector<MultiIndex>& multi_indices(int dim, int degree);

/// Number of monomials of degree <= k in n variables.
int poly_space_dim(int dim, int degree);

/// P(x) = sum_{|sigma| <= k} a_sigma / sigma! x^sigma.
///
/// Coefficients are stored in the order of `multi_indices(dim, degree)`, so
/// a_sigma is exactly the derivative D^sigma P(0).
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int dim, int degree);
  Polynomial(int dim, int degree, Eigen::VectorXd coeffs);

  static Polynomial zero(int dim, int degree) { return Polynomial(dim, degree); }
  static Polynomial constant(int dim, double c);
  /// (1/2) x^T A x + b.x + c
  static Polynomial quadratic(const SymMatrixd& a, const Eigen::VectorXd& b, double c);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<MultiIndex>& indices() const { return multi_indices(dim_, degree_); }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  double coefficient(const MultiIndex& sigma) const;
  void set_coefficient(const MultiIndex& sigma, double a);
  int index_of(const MultiIndex& sigma) const;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// sum r^{|sigma|} |a_sigma|; norm() is norm(1).
  double norm(double r) const;
  double norm() const { return norm(1.0); }

  /// D^tau P; coefficients a_{sigma + tau}, degree lowered by |tau|.
  Polynomial derivative(const MultiIndex& tau) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  SymMatrixd hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Q(y) = P(c y): coefficient a_sigma scales by c^{|sigma|}.
  Polynomial rescaled(double c) const;
  /// Q(y) = P(y + shift), exact re-expansion.
  Polynomial translated(const Eigen::VectorXd& shift) const;
  /// Same polynomial viewed in a higher-degree space.
  Polynomial raised_to(int degree) const;
  /// Highest degree with a nonzero coefficient (0 for the zero polynomial).
  int effective_degree() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

 private:
  int dim_ = 0;
  int degree_ = 0;
  Eigen::VectorXd coeffs_;
};

/// Monomial basis values y^sigma / sigma! for every sigma of `multi_indices`.
Eigen::VectorXd monomial_row(const Eigen::Ref<const Eigen::VectorXd>& y, int degree);

}  // namespace nelliptic
