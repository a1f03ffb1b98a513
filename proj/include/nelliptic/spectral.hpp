#pragma once

#include <cmath>

#include "nelliptic/sym_matrix.hpp"

namespace nelliptic {

enum class PucciSign { plus, minus };

/// Pucci extremal value from a precomputed spectrum. No parameter checks;
/// callers that take user input go through `pucci`.
template <typename Scalar>
Scalar pucci_from_spectrum(const VectorX<Scalar>& ev, Scalar lambda, Scalar Lambda, PucciSign sign) {
  Scalar pos(0), neg(0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) (ev[i] > 0 ? pos : neg) += ev[i];
  return sign == PucciSign::plus ? Lambda * pos + lambda * neg : lambda * pos + Lambda * neg;
}

template <typename Scalar>
void check_pucci_parameters(Scalar lambda, Scalar Lambda) {
  require(std::isfinite(lambda) && std::isfinite(Lambda) && lambda > 0 && lambda <= Lambda,
          ErrorKind::parameter, "pucci: need 0 < lambda <= Lambda");
}

/// M+(M) = Lambda * sum of positive eigenvalues + lambda * sum of negative ones;
/// M-(M) swaps the weights.
template <typename Scalar>
Scalar pucci(const SymMatrix<Scalar>& m, Scalar lambda, Scalar Lambda, PucciSign sign) {
  check_pucci_parameters(lambda, Lambda);
  return pucci_from_spectrum(eigenvalues_sym(m), lambda, Lambda, sign);
}

/// sigma_k of a vector by the standard one-pass recurrence; sigma_0 = 1.
template <typename Scalar>
Scalar elementary_symmetric(const VectorX<Scalar>& x, int k) {
  const int n = static_cast<int>(x.size());
  if (k == 0) return Scalar(1);
  if (k < 0 || k > n) return Scalar(0);
  VectorX<Scalar> e = VectorX<Scalar>::Zero(k + 1);
  e[0] = Scalar(1);
  for (int i = 0; i < n; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += x[i] * e[j - 1];
  return e[k];
}

/// sigma_k with the i-th entry removed, i.e. d sigma_{k+1} / d x_i.
template <typename Scalar>
Scalar elementary_symmetric_without(const VectorX<Scalar>& x, int k, Eigen::Index skip) {
  VectorX<Scalar> y(x.size() - 1);
  for (Eigen::Index i = 0, j = 0; i < x.size(); ++i)
    if (i != skip) y[j++] = x[i];
  return elementary_symmetric(y, k);
}

/// Garding cone membership: sigma_i(x) > 0 for i = 1..k.
template <typename Scalar>
bool in_garding_cone(const VectorX<Scalar>& x, int k) {
  for (int i = 1; i <= k; ++i)
    if (!(elementary_symmetric(x, i) > 0)) return false;
  return true;
}

/// k-admissibility of a symmetric matrix: its spectrum lies in Gamma_k.
template <typename Scalar>
bool is_k_admissible(const SymMatrix<Scalar>& m, int k) {
  require(k >= 1 && k <= m.dim(), ErrorKind::parameter, "is_k_admissible: need 1 <= k <= n");
  return in_garding_cone(eigenvalues_sym(m), k);
}

}  // namespace nelliptic
