#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nelliptic/grid.hpp"
#include "nelliptic/operators.hpp"
#include "nelliptic/spectral.hpp"

namespace nelliptic {

struct SolveConfig {
  /// Directions of the wide stencil, angles j pi / m for j < m.
  int stencil_directions = 8;
  /// Target sup-norm of the discrete residual.
  double tol = 1e-9;
  int max_iters = 200;
  double damping = 0.5;
  /// Mean curvature only: bound on |f| and on the deviation of g from an affine function.
  double delta_guard = 0.1;
  int threads = 1;
};

struct SolveResult {
  GridFunction u;
  std::string scheme;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

/// Integer stencil vectors round(R (cos j pi/m, sin j pi/m)) reduced to
/// primitive form, without duplicates.
std::vector<Eigen::Vector2i> stencil_vectors(int m, int radius);
/// Stencil radius used for m directions.
int stencil_radius(int m);

/// A : D^2u + b . Du = f on a 2D grid with u = g on the boundary, by the
/// 7-point scheme (mixed derivative along the diagonal matching sign a12).
SolveResult solve_linear(const SymMatrixd& A, const Eigen::VectorXd& b, const GridFunction& f, const GridFunction& g,
                         const SolveConfig& config = {});

/// M^+(D^2u) = f or M^-(D^2u) = f, extremizing over orthogonal stencil frames.
SolveResult solve_pucci(double lambda, double Lambda, PucciSign sign, const GridFunction& f, const GridFunction& g,
                        const SolveConfig& config = {});

/// min over stencil frames of (D_e u)^+ (D_e' u)^+ = f.
SolveResult solve_monge_ampere(const GridFunction& f, const GridFunction& g, const SolveConfig& config = {});

/// div(Du / sqrt(1 + |Du|^2)) = f by Picard iteration on frozen coefficients.
SolveResult solve_mean_curvature(const GridFunction& f, const GridFunction& g, const SolveConfig& config = {});

/// F(discrete jet) - f at interior nodes (central differences, 9-point
/// Hessian), zero on the boundary.
GridFunction residual(const OperatorSpec& op, const GridFunction& u, const GridFunction& f);

/// Central-difference jet of u at an interior node.
Jet discrete_jet(const GridFunction& u, int idx);

}  // namespace nelliptic
