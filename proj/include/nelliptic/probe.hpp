#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nelliptic/operators.hpp"

namespace nelliptic {

/// Measured local ellipticity and structure constants of an operator on the
/// probe set |M|, |p|, |s| <= rho.
struct StructureConstants {
  double rho = 0.0;
  double lambda_hat = 0.0;
  double Lambda_hat = 0.0;
  double b0_hat = 0.0;
  double c0_hat = 0.0;
  /// (r, omega(r)) for the modulus of continuity of D_M F, monotone envelope.
  std::vector<std::pair<double, double>> modulus_samples;
  int violations = 0;
  int pairs_tested = 0;
  int samples_used = 0;
  int samples_rejected = 0;
  /// Margin applied to (lambda_hat, Lambda_hat) when certifying pairs.
  double certify_margin = 0.0;
};

struct ProbeOptions {
  int samples = 2000;
  std::uint64_t seed = 1;
  int threads = 1;
  double certify_margin = 1e-3;
  int modulus_levels = 12;
  int modulus_samples = 256;
};

/// Symmetric gradient G with F(M + eps N) ~ F(M) + eps tr(G N), by central
/// differences with step 1e-5 max(1, |M|).
SymMatrixd dm_gradient(const OperatorSpec& op, const Jet& jet);

StructureConstants ellipticity_probe(const OperatorSpec& op, double rho, int n, const ProbeOptions& options = {});

/// True when F(M+N) - F(M) lies between the Pucci bounds with the given
/// constants, up to 1e-6 (1 + |N|).
bool satisfies_ellipticity(const OperatorSpec& op, const Jet& jet, const SymMatrixd& n_shift, double lambda,
                           double Lambda);

/// The probe configuration used for a family when none is given: the
/// cone-restricted families are probed around the identity (shifted by
/// |x|^2/2 and normalized) with rho = 1/2, everything else unshifted with rho = 1.
struct ProbeTarget {
  OperatorSpec op;
  double rho;
};
ProbeTarget default_probe_target(const OperatorSpec& base, int n);

}  // namespace nelliptic
