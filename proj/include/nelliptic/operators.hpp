#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>

#include "nelliptic/polynomial.hpp"
#include "nelliptic/spectral.hpp"
#include "nelliptic/sym_matrix.hpp"

namespace nelliptic {

/// Second-order jet (D^2u, Du, u, x) at a point.
struct Jet {
  SymMatrixd M;
  Eigen::VectorXd p;
  double s = 0.0;
  Eigen::VectorXd x;

  int dim() const { return M.dim(); }
  static Jet zero(int n) { return {SymMatrixd(n), Eigen::VectorXd::Zero(n), 0.0, Eigen::VectorXd::Zero(n)}; }
  static Jet of_matrix(const SymMatrixd& m) {
    Jet j = zero(m.dim());
    j.M = m;
    return j;
  }
};

namespace family {
struct PucciPlus { double lambda, Lambda; };
struct PucciMinus { double lambda, Lambda; };
/// tr(A M) + b.p + c s
struct LinearConstant { SymMatrixd A; Eigen::VectorXd b; double c = 0.0; };
/// (1/w)(I - p p^T / w^2) : M with w = sqrt(1 + |p|^2), the divergence form of
/// the prescribed mean curvature operator.
struct MeanCurvature {};
struct MongeAmpere {};
struct SigmaK { int k; };
struct HessianQuotient { int k, l; };
/// sum_i arctan(lambda_i)
struct Lagrangian {};
}  // namespace family

using Family = std::variant<family::PucciPlus, family::PucciMinus, family::LinearConstant, family::MeanCurvature,
                            family::MongeAmpere, family::SigmaK, family::HessianQuotient, family::Lagrangian>;

/// F(M, p, s, x), optionally shifted by a polynomial of degree <= 2:
/// G(J) = F(M + D^2P(x), p + DP(x), s + P(x), x) - offset.
struct OperatorSpec {
  Family family;
  std::optional<Polynomial> shift;
  double offset = 0.0;

  OperatorSpec() : family(family::Lagrangian{}) {}
  OperatorSpec(Family f) : family(std::move(f)) {}  // NOLINT(google-explicit-constructor)

  /// Canonical text form: pucci+:l:L, pucci-:l:L, linear:<rows>[:b][:c], mc,
  /// ma, sigma:k, quotient:k:l, slag. Shifted specs cannot be written.
  std::string to_string() const;
  static OperatorSpec parse(const std::string& text);

  bool depends_on_gradient() const;
  bool depends_on_value() const;
  /// Required dimension, if the family fixes one (LinearConstant).
  std::optional<int> fixed_dim() const;
};

/// Validates family parameters against a dimension; throws parameter errors.
void validate(const OperatorSpec& op, int n);

double evaluate(const OperatorSpec& op, const Jet& jet);

/// Jet moved by the shift polynomial (identity for unshifted specs).
Jet shifted_jet(const OperatorSpec& op, const Jet& jet);

/// Whether the (shifted) jet lies where the family is elliptic: convex for
/// Monge-Ampere, Gamma_k for sigma_k and the Hessian quotient, everywhere else.
bool admissible(const OperatorSpec& op, const Jet& jet);

/// G(M,p,s,x) = F(M + D^2P, p + DP(x), s + P(x), x) - offset. With
/// normalize_origin the offset is F at the jet of P at x = 0, so G(0,0,0,0) = 0.
OperatorSpec shift(const OperatorSpec& op, const Polynomial& p, bool normalize_origin);

}  // namespace nelliptic
