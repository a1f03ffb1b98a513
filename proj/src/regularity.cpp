#include "nelliptic/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nelliptic/error.hpp"
#include "nelliptic/parallel.hpp"
#include "nelliptic/solver.hpp"
#include "nelliptic/text.hpp"

namespace nelliptic {

namespace {

void check_config(const CampanatoConfig& c, int dim, const Eigen::VectorXd& x0) {
  require(x0.size() == dim, ErrorKind::invalid_input, "campanato_table: point dimension does not match the input");
  require(c.k >= 0, ErrorKind::parameter, "campanato_table: k must be nonnegative");
  require(c.eta > 0 && c.eta <= 0.5, ErrorKind::parameter, "campanato_table: eta must lie in (0, 1/2]");
  require(c.r0 > 0 && std::isfinite(c.r0), ErrorKind::parameter, "campanato_table: r0 must be positive");
  require(c.levels >= 0 && c.levels <= 60, ErrorKind::parameter, "campanato_table: levels must lie in [0, 60]");
  require(c.lattice >= 1, ErrorKind::parameter, "campanato_table: lattice must be positive");
}

double sup_deviation(const SampledFunction& s, const Eigen::VectorXd& x0, const Polynomial& P) {
  double e = 0.0;
  for (int i = 0; i < s.size(); ++i) e = std::max(e, std::abs(s.values[i] - P(s.points.col(i) - x0)));
  return e;
}

template <typename SamplesAt>
RegularityReport campanato_core(SamplesAt&& samples_at, const Eigen::VectorXd& x0, const CampanatoConfig& config,
                                double noise_floor) {
  RegularityReport report;
  report.x0 = x0;
  report.k = config.k;
  report.eta = config.eta;
  report.r0 = config.r0;
  report.noise_floor = noise_floor;
  const int levels = config.levels + 1;
  std::vector<SampledFunction> samples(levels);
  report.scales.resize(levels);
  parallel_for(levels, config.threads, [&](std::size_t m) {
    CampanatoScale& s = report.scales[m];
    s.m = static_cast<int>(m);
    s.r = config.r0 * std::pow(config.eta, static_cast<double>(m));
    samples[m] = samples_at(s.r);
    const MinimaxFit fit = minimax_fit(samples[m], x0, s.r, config.k, config.constraint);
    s.P = fit.P;
    s.error = fit.error;
    s.samples = samples[m].size();
  });
  bool exact = true;
  for (int m = 0; m < levels; ++m) {
    CampanatoScale& s = report.scales[m];
    if (m == 0) {
      s.inherited = s.error;
    } else {
      s.step_norm = (s.P - report.scales[m - 1].P).norm(s.r);
      s.inherited = sup_deviation(samples[m], x0, report.scales[m - 1].P);
    }
    s.usable = s.error > noise_floor;
    exact = exact && !s.usable;
    if (config.norm_bound) s.within_norm_bound = s.P.norm() <= *config.norm_bound;
  }
  std::vector<std::pair<double, double>> usable;
  for (const CampanatoScale& s : report.scales)
    if (s.usable) usable.emplace_back(s.r, s.error);
  if (exact) {
    report.classification = Classification::polynomial_exact;
  } else if (usable.size() < 4) {
    report.classification = Classification::below_resolution;
  } else {
    report.estimate = estimate_exponent(usable, config.k);
    report.classification = Classification::c_k_alpha;
  }
  return report;
}

double max_abs_hessian(const GridFunction& u, int idx) {
  const Eigen::MatrixXd M = discrete_jet(u, idx).M.dense();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

double slope_of(const std::vector<std::pair<double, double>>& pts) {
  const int n = static_cast<int>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) sx += x, sy += y;
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  require(sxx > 0, ErrorKind::insufficient_data, "regression needs at least two distinct radii");
  return sxy / sxx;
}

Polynomial derivative_polynomial(const AnalyticFunction& u, const Eigen::VectorXd& x0, int k) {
  Polynomial P(u.dim, k);
  P.set_coefficient(MultiIndex(u.dim, 0), u.eval(x0));
  if (k >= 1) {
    const Eigen::VectorXd g = u.grad(x0);
    require(g.allFinite(), ErrorKind::singularity, "gradient is not finite");
    for (int i = 0; i < u.dim; ++i) {
      MultiIndex s(u.dim, 0);
      s[i] = 1;
      P.set_coefficient(s, g[i]);
    }
  }
  if (k >= 2) {
    const SymMatrixd H = u.hess(x0);
    require(H.all_finite(), ErrorKind::singularity, "Hessian is not finite");
    for (int i = 0; i < u.dim; ++i)
      for (int j = i; j < u.dim; ++j) {
        MultiIndex s(u.dim, 0);
        ++s[i];
        ++s[j];
        P.set_coefficient(s, H(i, j));
      }
  }
  require(k <= 2, ErrorKind::parameter, "derivatives beyond second order are not available");
  return P;
}

double seminorm_over(const SampledFunction& s, const Eigen::VectorXd& x0, const Polynomial& P, double power) {
  double best = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd z = s.points.col(i) - x0;
    const double d = z.norm();
    if (d <= 1e-14) continue;
    best = std::max(best, std::abs(s.values[i] - P(z)) / std::pow(d, power));
  }
  return best;
}

SampledFunction concatenate(const std::vector<SampledFunction>& parts, int dim) {
  int total = 0;
  for (const auto& p : parts) total += p.size();
  SampledFunction out{Eigen::MatrixXd(dim, total), Eigen::VectorXd(total)};
  int at = 0;
  for (const auto& p : parts) {
    out.points.middleCols(at, p.size()) = p.points;
    out.values.segment(at, p.size()) = p.values;
    at += p.size();
  }
  return out;
}

void check_radii(const std::vector<double>& radii) {
  require(!radii.empty(), ErrorKind::invalid_input, "need at least one radius");
  for (double r : radii) require(r > 0 && std::isfinite(r), ErrorKind::invalid_input, "radii must be positive");
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::c_k_alpha: return "C^k_alpha";
    case Classification::polynomial_exact: return "polynomial_exact";
    case Classification::below_resolution: return "below_resolution";
  }
  return "unknown";
}

RegularityReport campanato_table(const SampledFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config,
                                 double noise_floor) {
  check_config(config, u.dim(), x0);
  return campanato_core([&](double r) { return u.restricted(x0, r); }, x0, config, noise_floor);
}

RegularityReport campanato_table(const AnalyticFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config) {
  check_config(config, u.dim, x0);
  const SampledFunction top = u.sample(ball_lattice(x0, config.r0, config.lattice));
  const double floor = 1e-12 * (1 + top.values.cwiseAbs().maxCoeff());
  return campanato_core([&](double r) { return u.sample(ball_lattice(x0, r, config.lattice)); }, x0, config, floor);
}

RegularityReport campanato_table(const GridFunction& u, const Eigen::VectorXd& x0, const CampanatoConfig& config) {
  check_config(config, u.dim(), x0);
  const double h = u.h();
  require(config.r0 * std::pow(config.eta, config.levels) >= 2 * h * (1 - 1e-12), ErrorKind::parameter,
          "campanato_table: smallest radius must be at least twice the grid spacing");
  for (int a = 0; a < u.dim(); ++a) {
    const double lo = u.origin()[a], hi = lo + h * (u.shape()[a] - 1);
    const double margin = std::min(x0[a] - lo, hi - x0[a]);
    require(margin >= 0.125 * (hi - lo) * (1 - 1e-12), ErrorKind::precondition,
            "campanato_table: point is closer to the boundary than a quarter of the half-width");
    require(margin >= config.r0 * (1 - 1e-12), ErrorKind::precondition,
            "campanato_table: ball of radius r0 leaves the grid");
  }
  double curvature = 0.0;
  for (int i = 0; i < u.size(); ++i)
    if (!u.on_boundary(i) && (u.point(i) - x0).norm() <= config.r0) curvature = std::max(curvature, max_abs_hessian(u, i));
  const double floor = 10 * h * h * curvature / 8;
  const SampledFunction all = u.sample();
  return campanato_core([&](double r) { return all.restricted(x0, r); }, x0, config, floor);
}

ExponentEstimate estimate_exponent(const std::vector<std::pair<double, double>>& scales, int k) {
  require(scales.size() >= 4, ErrorKind::insufficient_data, "estimate_exponent: need at least 4 scales");
  std::vector<std::pair<double, double>> logs;
  for (const auto& [r, E] : scales) {
    require(r > 0 && E > 0, ErrorKind::insufficient_data, "estimate_exponent: radii and errors must be positive");
    logs.emplace_back(std::log(r), std::log(E));
  }
  ExponentEstimate out;
  out.scales = static_cast<int>(scales.size());
  const double raw = slope_of(logs) - k;
  out.alpha = std::clamp(raw, 0.0, 1.0);
  out.clamped = raw <= 1e-9 || raw >= 1 - 1e-9;
  double c = -INFINITY;
  for (const auto& [lr, lE] : logs) c = std::max(c, lE - (k + out.alpha) * lr);
  out.C = std::exp(c);
  return out;
}

std::vector<std::pair<double, double>> oscillation_profile(const SampledFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii) {
  check_radii(radii);
  std::vector<std::pair<double, double>> out;
  for (double r : radii) {
    const SampledFunction s = u.restricted(x0, r);
    require(s.size() > 0, ErrorKind::insufficient_data, "oscillation_profile: empty ball");
    out.emplace_back(r, s.values.maxCoeff() - s.values.minCoeff());
  }
  return out;
}

std::vector<std::pair<double, double>> oscillation_profile(const AnalyticFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii, int lattice) {
  check_radii(radii);
  std::vector<std::pair<double, double>> out;
  for (double r : radii) {
    const SampledFunction s = u.sample(ball_lattice(x0, r, lattice));
    out.emplace_back(r, s.values.maxCoeff() - s.values.minCoeff());
  }
  return out;
}

std::vector<std::pair<double, double>> oscillation_profile(const GridFunction& u, const Eigen::VectorXd& x0,
                                                           const std::vector<double>& radii) {
  return oscillation_profile(u.sample(), x0, radii);
}

double log_log_slope(const std::vector<std::pair<double, double>>& profile) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [r, v] : profile)
    if (r > 0 && v > 0) logs.emplace_back(std::log(r), std::log(v));
  require(logs.size() >= 2, ErrorKind::insufficient_data, "log_log_slope: need two positive entries");
  return slope_of(logs);
}

double holder_seminorm(const AnalyticFunction& u, const Eigen::VectorXd& x0, int k, double alpha,
                       const std::vector<double>& radii, int lattice) {
  check_radii(radii);
  require(k >= 0 && alpha >= 0, ErrorKind::parameter, "holder_seminorm: need k >= 0 and alpha >= 0");
  std::vector<SampledFunction> parts;
  for (double r : radii) parts.push_back(u.sample(ball_lattice(x0, r, lattice)));
  const SampledFunction all = concatenate(parts, u.dim);
  Polynomial P;
  try {
    P = derivative_polynomial(u, x0, k);
  } catch (const Error&) {
    const double rmin = *std::min_element(radii.begin(), radii.end());
    P = minimax_fit(u.sample(ball_lattice(x0, rmin, lattice)), x0, rmin, k).P;
  }
  return seminorm_over(all, x0, P, k + alpha);
}

double holder_seminorm(const SampledFunction& u, const Eigen::VectorXd& x0, int k, double alpha,
                       const std::vector<double>& radii) {
  check_radii(radii);
  require(k >= 0 && alpha >= 0, ErrorKind::parameter, "holder_seminorm: need k >= 0 and alpha >= 0");
  const double rmin = *std::min_element(radii.begin(), radii.end());
  const double rmax = *std::max_element(radii.begin(), radii.end());
  const Polynomial P = minimax_fit(u, x0, rmin, k).P;
  return seminorm_over(u.restricted(x0, rmax), x0, P, k + alpha);
}

std::string to_string(Side s) {
  switch (s) {
    case Side::sub: return "sub";
    case Side::super: return "super";
    case Side::both: return "both";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::vacuous: return "vacuous";
    case Verdict::not_tested: return "not_tested";
  }
  return "unknown";
}

Side parse_side(const std::string& text) {
  if (text == "sub") return Side::sub;
  if (text == "super") return Side::super;
  if (text == "both") return Side::both;
  throw Error(ErrorKind::invalid_input, "side must be sub, super or both, got '" + text + "'");
}

int ViscosityReport::count(Side side, Verdict v) const {
  int c = 0;
  for (const ViscosityPoint& p : points) c += (side == Side::sub ? p.sub : p.super) == v;
  return c;
}

ViscosityReport check_viscosity(const GridFunction& u, const OperatorSpec& op, const GridFunction& f,
                                const ViscosityOptions& options) {
  require(u.same_geometry(f), ErrorKind::invalid_input, "check_viscosity: u and f must share a grid");
  validate(op, u.dim());
  require(options.tol >= 0, ErrorKind::parameter, "check_viscosity: tol must be nonnegative");
  require(options.slopes >= 2, ErrorKind::parameter, "check_viscosity: need at least two slopes");
  const int n = u.dim();
  const double h = u.h();

  std::vector<int> nodes = options.nodes;
  if (nodes.empty())
    for (int i = 0; i < u.size(); ++i)
      if (!u.on_boundary(i)) nodes.push_back(i);
  for (int idx : nodes)
    require(idx >= 0 && idx < u.size() && !u.on_boundary(idx), ErrorKind::invalid_input,
            "check_viscosity: nodes must be interior");

  std::vector<std::vector<int>> offsets;
  for (int a = -1; a <= 1; ++a)
    for (int b = (n == 2 ? -1 : 0); b <= (n == 2 ? 1 : 0); ++b) {
      if (a == 0 && b == 0) continue;
      offsets.push_back(n == 2 ? std::vector<int>{a, b} : std::vector<int>{a});
    }

  struct NodeResult {
    ViscosityPoint point;
    std::optional<ViscosityWitness> sub, super;
  };
  std::vector<NodeResult> results(nodes.size());

  parallel_for(nodes.size(), options.threads, [&](std::size_t t) {
    const int idx = nodes[t];
    const Jet centered = discrete_jet(u, idx);
    const double u0 = u[idx];

    std::vector<SymMatrixd> bases{centered.M};
    for (int a = 0; a < n; ++a)
      for (int dir : {1, -1}) {
        std::vector<int> s1(n, 0), s2(n, 0);
        s1[a] = dir;
        s2[a] = 2 * dir;
        const int i1 = u.neighbor(idx, s1), i2 = u.neighbor(idx, s2);
        if (i2 < 0) continue;
        SymMatrixd M = centered.M;
        M.ref(a, a) = (u[i2] - 2 * u[i1] + u0) / (h * h);
        bases.push_back(M);
      }

    std::vector<Eigen::VectorXd> slopes{centered.p};
    for (int a = 0; a < n; ++a) {
      std::vector<int> s(n, 0);
      s[a] = 1;
      const double up = (u[u.neighbor(idx, s)] - u0) / h;
      s[a] = -1;
      const double down = (u0 - u[u.neighbor(idx, s)]) / h;
      const double mid = 0.5 * (up + down), half = 0.5 * std::abs(up - down) * (1 + options.inflation);
      for (int j = 0; j < options.slopes; ++j) {
        Eigen::VectorXd p = centered.p;
        p[a] = mid - half + 2 * half * j / (options.slopes - 1);
        slopes.push_back(p);
      }
    }

    std::vector<Eigen::VectorXd> zs;
    std::vector<double> du;
    for (const auto& off : offsets) {
      Eigen::VectorXd z(n);
      for (int a = 0; a < n; ++a) z[a] = off[a] * h;
      zs.push_back(z);
      du.push_back(u[u.neighbor(idx, off)] - u0);
    }

    NodeResult& out = results[t];
    out.point.node = idx;
    out.point.x = centered.x;
    const double fx = f[idx];

    const auto run_side = [&](bool below) {
      bool any = false, failed = false;
      std::optional<ViscosityWitness> worst;
      double worst_gap = 0.0;
      for (const SymMatrixd& M : bases) {
        const Eigen::MatrixXd Md = M.dense();
        for (const Eigen::VectorXd& p : slopes) {
          double kappa = 0.0;
          for (std::size_t i = 0; i < zs.size(); ++i) {
            const double z2 = zs[i].squaredNorm();
            const double d = du[i] - p.dot(zs[i]) - 0.5 * zs[i].dot(Md * zs[i]);
            kappa = std::max(kappa, (below ? -2 * d : 2 * d) / z2);
          }
          SymMatrixd Mt = M + SymMatrixd::scaled_identity(n, below ? -kappa : kappa);
          if (options.rho) {
            const double norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Mt.dense(), Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .cwiseAbs()
                                    .maxCoeff();
            if (p.norm() > *options.rho || norm > *options.rho) continue;
          }
          double F;
          try {
            F = evaluate(op, Jet{Mt, p, u0, centered.x});
          } catch (const Error&) {
            continue;
          }
          if (!std::isfinite(F)) continue;
          any = true;
          const double gap = below ? F - fx - options.tol : fx - options.tol - F;
          if (gap > 0) {
            failed = true;
            if (!worst || gap > worst_gap) {
              worst_gap = gap;
              worst = ViscosityWitness{idx, centered.x, below ? Side::super : Side::sub, p, Mt, F, fx};
            }
          }
        }
      }
      const Verdict v = failed ? Verdict::fail : any ? Verdict::pass : Verdict::vacuous;
      return std::make_pair(v, worst);
    };

    if (options.side != Side::sub) std::tie(out.point.super, out.super) = run_side(true);
    if (options.side != Side::super) std::tie(out.point.sub, out.sub) = run_side(false);
  });

  ViscosityReport report;
  for (NodeResult& r : results) {
    report.points.push_back(r.point);
    if (r.sub) report.witnesses.push_back(*r.sub);
    if (r.super) report.witnesses.push_back(*r.super);
  }
  return report;
}

void write_campanato_csv(std::ostream& os, const RegularityReport& report,
                         const std::vector<std::pair<double, double>>& oscillation) {
  os << "r,E,osc\n";
  for (std::size_t m = 0; m < report.scales.size(); ++m) {
    os << format_double(report.scales[m].r) << ',' << format_double(report.scales[m].error) << ',';
    if (m < oscillation.size()) os << format_double(oscillation[m].second);
    os << '\n';
  }
}

}  // namespace nelliptic
