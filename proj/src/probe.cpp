#include "nelliptic/probe.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "nelliptic/parallel.hpp"
#include "nelliptic/sampling.hpp"
#include "nelliptic/text.hpp"

namespace nelliptic {

namespace {

std::string describe(const Jet& j) {
  std::ostringstream os;
  os << "M=[";
  for (Eigen::Index i = 0; i < j.M.packed().size(); ++i) os << (i ? "," : "") << format_double(j.M.packed()[i]);
  os << "] p=[";
  for (Eigen::Index i = 0; i < j.p.size(); ++i) os << (i ? "," : "") << format_double(j.p[i]);
  os << "] s=" << format_double(j.s);
  return os.str();
}

double eval_in_probe(const OperatorSpec& op, const Jet& j) {
  try {
    return evaluate(op, j);
  } catch (const Error& e) {
    throw Error(ErrorKind::probe_domain, std::string("probe: evaluation failed at ") + describe(j) + ": " + e.what());
  }
}

double clamp_unit(double t) { return std::clamp(t, -1.0, 1.0); }

/// Maps a low-discrepancy point to a jet in the probe ball. Coordinates are
/// stretched by 5/4 and clamped so a fixed fraction lands on the boundary.
Jet jet_from_point(const std::vector<double>& h, int n, double rho) {
  std::size_t c = 0;
  Eigen::VectorXd eig(n);
  for (int a = 0; a < n; ++a) eig[a] = rho * clamp_unit(1.25 * (2.0 * h[c++] - 1.0));
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double phi = M_PI * h[c++];
      Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
      g(a, a) = g(b, b) = std::cos(phi);
      g(a, b) = -std::sin(phi);
      g(b, a) = std::sin(phi);
      q = q * g;
    }
  Jet j = Jet::zero(n);
  j.M = SymMatrixd::from_dense(q * eig.asDiagonal() * q.transpose());
  Eigen::VectorXd dir(n);
  for (int a = 0; a < n; ++a) dir[a] = 2.0 * h[c++] - 1.0;
  if (dir.norm() < 1e-12) dir = Eigen::VectorXd::Unit(n, 0);
  j.p = rho * std::min(1.0, 1.25 * h[c++]) * dir.normalized();
  j.s = rho * clamp_unit(1.25 * (2.0 * h[c++] - 1.0));
  Eigen::VectorXd xdir(n);
  for (int a = 0; a < n; ++a) xdir[a] = 2.0 * h[c++] - 1.0;
  if (xdir.norm() < 1e-12) xdir = Eigen::VectorXd::Unit(n, 0);
  j.x = std::pow(h[c++], 1.0 / n) * xdir.normalized();
  return j;
}

int halton_dims(int n) { return n + n * (n - 1) / 2 + n + 1 + 1 + n + 1; }

/// Center of the probe set plus the eigenvalue-cube vertices with |p| = |s| = rho.
std::vector<Jet> anchor_jets(int n, double rho) {
  std::vector<Jet> out{Jet::zero(n)};
  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd sign(n);
    for (int a = 0; a < n; ++a) sign[a] = (mask >> a) & 1 ? -1.0 : 1.0;
    Jet j = Jet::zero(n);
    j.M = SymMatrixd::diagonal(rho * sign);
    j.p = rho * sign / std::sqrt(double(n));
    j.s = rho * sign[0];
    out.push_back(std::move(j));
  }
  return out;
}

double step_for(double magnitude) { return 1e-5 * std::max(1.0, magnitude); }

struct SampleResult {
  bool admissible = false;
  double min_eig = 0.0, max_eig = 0.0, grad_p = 0.0, grad_s = 0.0;
  std::optional<std::string> error;
};

}  // namespace

SymMatrixd dm_gradient(const OperatorSpec& op, const Jet& jet) {
  const int n = jet.dim();
  const double h = step_for(spectral_radius(jet.M));
  SymMatrixd g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const SymMatrixd e = SymMatrixd::unit(n, i, j) * h;
      Jet plus = jet, minus = jet;
      plus.M += e;
      minus.M -= e;
      const double d = eval_in_probe(op, plus) - eval_in_probe(op, minus);
      g.ref(i, j) = i == j ? d / (2.0 * h) : d / (4.0 * h);
    }
  return g;
}

bool satisfies_ellipticity(const OperatorSpec& op, const Jet& jet, const SymMatrixd& n_shift, double lambda,
                           double Lambda) {
  Jet moved = jet;
  moved.M += n_shift;
  const double diff = eval_in_probe(op, moved) - eval_in_probe(op, jet);
  const Eigen::VectorXd ev = eigenvalues_sym(n_shift);
  const double tol = 1e-6 * (1.0 + std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1])));
  const double lo = pucci_from_spectrum(ev, lambda, Lambda, PucciSign::minus);
  const double hi = pucci_from_spectrum(ev, lambda, Lambda, PucciSign::plus);
  return diff >= lo - tol && diff <= hi + tol;
}

StructureConstants ellipticity_probe(const OperatorSpec& op, double rho, int n, const ProbeOptions& options) {
  require(rho > 0 && std::isfinite(rho), ErrorKind::parameter, "probe: rho must be positive");
  require(options.samples >= 1, ErrorKind::parameter, "probe: need at least one sample");
  validate(op, n);

  std::vector<Jet> jets = anchor_jets(n, rho);
  const HaltonSequence halton(halton_dims(n), options.seed);
  for (int i = 0; i < options.samples; ++i) jets.push_back(jet_from_point(halton.point(i + 1), n, rho));

  std::vector<SampleResult> results(jets.size());
  parallel_for(jets.size(), options.threads, [&](std::size_t i) {
    SampleResult& r = results[i];
    try {
      const Jet& j = jets[i];
      if (!admissible(op, j)) return;
      r.admissible = true;
      const Eigen::VectorXd ev = eigenvalues_sym(dm_gradient(op, j));
      r.min_eig = ev[0];
      r.max_eig = ev[ev.size() - 1];
      if (op.depends_on_gradient() || op.shift) {
        const double hp = step_for(j.p.norm());
        Eigen::VectorXd g(n);
        for (int a = 0; a < n; ++a) {
          Jet plus = j, minus = j;
          plus.p[a] += hp;
          minus.p[a] -= hp;
          g[a] = (eval_in_probe(op, plus) - eval_in_probe(op, minus)) / (2.0 * hp);
        }
        r.grad_p = g.norm();
      }
      if (op.depends_on_value() || op.shift) {
        const double hs = step_for(std::abs(j.s));
        Jet plus = j, minus = j;
        plus.s += hs;
        minus.s -= hs;
        r.grad_s = std::abs(eval_in_probe(op, plus) - eval_in_probe(op, minus)) / (2.0 * hs);
      }
    } catch (const Error& e) {
      r.error = e.what();
    }
  });

  StructureConstants out;
  out.rho = rho;
  out.certify_margin = options.certify_margin;
  bool first = true;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SampleResult& r = results[i];
    if (r.error) throw Error(ErrorKind::probe_domain, *r.error);
    if (!r.admissible) {
      ++out.samples_rejected;
      continue;
    }
    usable.push_back(i);
    out.lambda_hat = first ? r.min_eig : std::min(out.lambda_hat, r.min_eig);
    out.Lambda_hat = first ? r.max_eig : std::max(out.Lambda_hat, r.max_eig);
    out.b0_hat = std::max(out.b0_hat, r.grad_p);
    out.c0_hat = std::max(out.c0_hat, r.grad_s);
    first = false;
  }
  out.samples_used = static_cast<int>(usable.size());
  require(!usable.empty(), ErrorKind::probe_domain, "probe: no admissible sample in the probe set");
  out.lambda_hat = std::max(out.lambda_hat, 0.0);

  // Certification pairs (M, M + N) with both ends in the admissible probe set.
  const double lo = std::max(out.lambda_hat - options.certify_margin, 0.0);
  const double hi = out.Lambda_hat + options.certify_margin;
  const std::size_t m = usable.size();
  std::vector<int> pair_bad(2 * m, 0), pair_done(2 * m, 0);
  parallel_for(2 * m, options.threads, [&](std::size_t t) {
    const std::size_t i = usable[t % m];
    const std::size_t j = usable[t < m ? (t + 1) % m : (7 * (t - m) + 3) % m];
    if (i == j) return;
    Jet base = jets[i];
    const SymMatrixd shift_n = jets[j].M - base.M;
    Jet other = base;
    other.M = jets[j].M;
    if (!admissible(op, other)) return;
    pair_done[t] = 1;
    pair_bad[t] = satisfies_ellipticity(op, base, shift_n, lo, hi) ? 0 : 1;
  });
  for (std::size_t t = 0; t < 2 * m; ++t) {
    out.pairs_tested += pair_done[t];
    out.violations += pair_bad[t];
  }

  // Modulus of continuity of D_M F at x = 0 on a dyadic r-grid.
  const int levels = options.modulus_levels;
  const std::size_t mod_count = std::min<std::size_t>(m, static_cast<std::size_t>(options.modulus_samples));
  std::vector<double> omega(static_cast<std::size_t>(levels) * mod_count, 0.0);
  UniformStream dirs(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Jet> perturbations;
  perturbations.reserve(omega.size());
  for (std::size_t t = 0; t < omega.size(); ++t) {
    const int level = static_cast<int>(t / mod_count);
    const double r = rho * std::ldexp(1.0, -level);
    Jet base = jets[usable[t % mod_count]];
    base.x.setZero();
    Jet moved = base;
    Eigen::MatrixXd u(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) u(a, b) = u(b, a) = dirs.in(-1.0, 1.0);
    SymMatrixd du = SymMatrixd::from_dense(u);
    du *= r / std::max(spectral_radius(du), 1e-300);
    moved.M += du;
    const double rm = spectral_radius(moved.M);
    if (rm > rho) moved.M *= rho / rm;
    Eigen::VectorXd dp(n);
    for (int a = 0; a < n; ++a) dp[a] = dirs.in(-1.0, 1.0);
    moved.p += r * dp / std::max(dp.norm(), 1e-300);
    if (moved.p.norm() > rho) moved.p *= rho / moved.p.norm();
    moved.s = std::clamp(moved.s + r * dirs.in(-1.0, 1.0), -rho, rho);
    perturbations.push_back(std::move(moved));
  }
  parallel_for(omega.size(), options.threads, [&](std::size_t t) {
    Jet base = jets[usable[t % mod_count]];
    base.x.setZero();
    const Jet& moved = perturbations[t];
    if (!admissible(op, base) || !admissible(op, moved)) return;
    omega[t] = spectral_radius(dm_gradient(op, moved) - dm_gradient(op, base));
  });
  std::vector<double> per_level(levels, 0.0);
  for (std::size_t t = 0; t < omega.size(); ++t) {
    const std::size_t level = t / mod_count;
    per_level[level] = std::max(per_level[level], omega[t]);
  }
  double envelope = 0.0;
  for (int level = levels - 1; level >= 0; --level) {
    envelope = std::max(envelope, per_level[level]);
    out.modulus_samples.emplace_back(rho * std::ldexp(1.0, -level), envelope);
  }
  return out;
}

ProbeTarget default_probe_target(const OperatorSpec& base, int n) {
  const bool cone = std::holds_alternative<family::MongeAmpere>(base.family) ||
                    std::holds_alternative<family::SigmaK>(base.family) ||
                    std::holds_alternative<family::HessianQuotient>(base.family);
  if (!cone || base.shift) return {base, 1.0};
  const Polynomial half_square = Polynomial::quadratic(SymMatrixd::identity(n), Eigen::VectorXd::Zero(n), 0.0);
  return {shift(base, half_square, true), 0.5};
}

}  // namespace nelliptic
