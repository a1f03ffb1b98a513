#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nelliptic/fixtures.hpp"
#include "nelliptic/grid.hpp"
#include "nelliptic/minimax.hpp"
#include "nelliptic/operators.hpp"

namespace nelliptic {

struct CampanatoConfig {
  int k = 1;
  double eta = 0.5;
  double r0 = 0.5;
  int levels = 8;
  std::optional<FitConstraint> constraint;
  /// Optional cap on ||P_m||; scales above it are flagged.
  std::optional<double> norm_bound;
  /// Analytic inputs: ball_lattice density per scale.
  int lattice = 8;
  int threads = 1;
};

struct CampanatoScale {
  int m = 0;
  double r = 0.0;
  double error = 0.0;
  Polynomial P;
  /// ||P_m - P_{m-1}||_{r_m}; zero at m = 0.
  double step_norm = 0.0;
  /// sup over this scale's samples of |u - P_{m-1}|; equals error at m = 0.
  double inherited = 0.0;
  int samples = 0;
  bool usable = false;
  bool within_norm_bound = true;
};

enum class Classification { c_k_alpha, polynomial_exact, below_resolution };
std::string to_string(Classification c);

struct ExponentEstimate {
  double alpha = 0.0;
  double C = 0.0;
  bool clamped = false;
  int scales = 0;
};

struct RegularityReport {
  Eigen::VectorXd x0;
  int k = 0;
  double eta = 0.0, r0 = 0.0;
  double noise_floor = 0.0;
  std::vector<CampanatoScale> scales;
  std::optional<ExponentEstimate> estimate;
  Classification classification = Classification::below_resolution;
};

/// Minimax fits of degree k on B_{eta^m r0}(x0), m = 0..levels.
RegularityReport campanato_table(const SampledFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config,
                                 double noise_floor);
/// Analytic input: each scale is sampled on its own ball lattice. Noise floor 1e-12 (1 + max|u|).
RegularityReport campanato_table(const AnalyticFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config);
/// Grid input: noise floor 10 h^2 max|D^2 u_h| / 8. The point must lie at least a quarter
/// of the box half-width inside, and B_{r0}(x0) inside the box.
RegularityReport campanato_table(const GridFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config);

/// OLS slope of log E against log r, minus k, clamped to [0, 1];
/// C = exp(max(log E - (k + alpha) log r)).
ExponentEstimate estimate_exponent(const std::vector<std::pair<double, double>>& scales, int k);

/// (r, sup - inf over the samples in B_r(x0)).
std::vector<std::pair<double, double>> oscillation_profile(const SampledFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii);
std::vector<std::pair<double, double>> oscillation_profile(const AnalyticFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii, int lattice = 16);
std::vector<std::pair<double, double>> oscillation_profile(const GridFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii);

/// Least-squares slope of log osc against log r.
double log_log_slope(const std::vector<std::pair<double, double>>& profile);

/// max |u - P| / |x - x0|^{k + alpha} over the samples within the largest radius.
/// Analytic inputs take P from the derivatives at x0 where they are finite;
/// otherwise P is the minimax fit at the smallest radius.
double holder_seminorm(const AnalyticFunction& u, const Eigen::VectorXd& x0, int k, double alpha,
                       const std::vector<double>& radii, int lattice = 16);
double holder_seminorm(const SampledFunction& u, const Eigen::VectorXd& x0, int k, double alpha,
                       const std::vector<double>& radii);

enum class Side { sub, super, both };
enum class Verdict { pass, fail, vacuous, not_tested };
std::string to_string(Side s);
std::string to_string(Verdict v);
Side parse_side(const std::string& text);

struct ViscosityOptions {
  Side side = Side::both;
  double tol = 1e-6;
  /// Bound on |D phi| and |D^2 phi| of admissible test functions; unbounded by default.
  std::optional<double> rho;
  /// Nodes to test; every interior node when empty.
  std::vector<int> nodes;
  int slopes = 32;
  double inflation = 0.1;
  int threads = 1;
};

/// Test paraboloid phi(x) = u(x0) + p.(x - x0) + (x - x0)^T M (x - x0) / 2.
struct ViscosityWitness {
  int node = 0;
  Eigen::VectorXd x;
  Side side = Side::super;
  Eigen::VectorXd p;
  SymMatrixd M;
  double F = 0.0;
  double f = 0.0;
};

struct ViscosityPoint {
  int node = 0;
  Eigen::VectorXd x;
  Verdict sub = Verdict::not_tested;
  Verdict super = Verdict::not_tested;
};

struct ViscosityReport {
  std::vector<ViscosityPoint> points;
  std::vector<ViscosityWitness> witnesses;
  int count(Side side, Verdict v) const;
};

/// Supersolution: every touching-from-below candidate has F <= f + tol.
/// Subsolution: every touching-from-above candidate has F >= f - tol.
/// Candidates combine centered and one-sided second differences with a sweep
/// of slopes across the one-sided difference interval; each is lowered
/// (raised) by the smallest multiple of I that makes it touch on the 3^n stencil.
ViscosityReport check_viscosity(const GridFunction& u, const OperatorSpec& op, const GridFunction& f,
                                const ViscosityOptions& options = {});

/// Plot-ready CSV: r,E,osc per scale.
void write_campanato_csv(std::ostream& os, const RegularityReport& report,
                         const std::vector<std::pair<double, double>>& oscillation);

}  // namespace nelliptic
