#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "nelliptic/fixtures.hpp"
#include "nelliptic/grid.hpp"

namespace nelliptic {

/// Zero extension applied before taking the envelope: `pad` nodes on every
/// side of the original grid.
struct Extension {
  int pad = 0;
  std::vector<int> original_shape;
  Eigen::VectorXd original_origin;
};

struct EnvelopeResult {
  /// Envelope on the working grid (the doubled box for lower_convex_envelope).
  GridFunction gamma;
  /// Nodes where gamma meets the data to within the contact tolerance.
  std::vector<char> contact;
  /// Nodes the envelope was taken over.
  std::vector<char> mask;
  Extension extension;
  int sweeps = 0;

  /// Restriction of a working-grid field to the original grid.
  GridFunction restrict_to_domain(const GridFunction& working) const;
  std::vector<char> contact_on_domain() const;
};

/// Largest discretely convex minorant of the zero extension of -u^- on the
/// doubled box. 1D: exact lower hull. 2D: lower-hull sweeps along rows,
/// columns and both diagonals until nothing changes.
EnvelopeResult lower_convex_envelope(const GridFunction& u);

/// Same, for data v over the nodes of `mask` only (no extension, no u^-).
EnvelopeResult masked_envelope(const GridFunction& v, const std::vector<char>& mask);

/// Midpoint inequality v(x+e) + v(x-e) >= 2 v(x) - tol along axes and diagonals,
/// wherever all three nodes lie in the mask.
bool discretely_convex(const GridFunction& v, const std::vector<char>& mask, double tol);

/// Nodes inside the largest ball inscribed in the grid box.
std::vector<char> inscribed_ball_mask(const GridFunction& g);

struct AbpReport {
  double sup_uminus = 0.0;
  double contact_Ln_norm_fplus = 0.0;
  double ratio = 0.0;
  int contact_nodes = 0;
  int domain_nodes = 0;
  double lambda = 0.0, Lambda = 0.0, b0 = 0.0;
};

/// ABP quantities on the ball inscribed in the grid box: sup u^- against the
/// discrete L^n norm of f^+ over the contact set of the envelope of -u^-.
AbpReport abp_check(const GridFunction& u, const GridFunction& f, double lambda, double Lambda, double b0);

struct SectionOptions {
  int rays = 256;
  /// For analytic inputs: the section must stay within this distance of x0.
  double domain_radius = 4.0;
};

/// Boundary points of {u - l < h}, l the supporting affine function at x0,
/// located along equally spaced rays (two in 1D).
std::vector<Eigen::VectorXd> section(const AnalyticFunction& u, const Eigen::VectorXd& x0, double h,
                                    const SectionOptions& options = {});
std::vector<Eigen::VectorXd> section(const GridFunction& u, const Eigen::VectorXd& x0, double h,
                                    const SectionOptions& options = {});

struct Ellipsoid {
  Eigen::VectorXd center;
  /// {x : (x - c)^T A (x - c) <= 1}
  Eigen::MatrixXd A;
  int iterations = 0;
};

/// Minimum-volume enclosing ellipsoid: log-barrier Newton on the lifted
/// problem min -log det X, q_i^T X q_i <= 1 with q_i = (p_i, 1).
Ellipsoid mvee(const std::vector<Eigen::VectorXd>& points, double tol = 1e-9);

struct SectionNormalization {
  double h = 0.0;
  std::vector<Eigen::VectorXd> vertices;
  /// y = T x maps the enclosing ellipsoid onto the unit ball around `center`.
  Eigen::MatrixXd T;
  Eigen::VectorXd center;
  double detT = 0.0;
  double product = 0.0;
  /// Largest |T x - center| over the vertices and smallest distance from
  /// center to the image boundary (polygon edges or interval ends).
  double outer_radius = 0.0;
  double inner_radius = 0.0;
};

SectionNormalization john_normalize(const std::vector<Eigen::VectorXd>& vertices, double h, int n);

}  // namespace nelliptic
