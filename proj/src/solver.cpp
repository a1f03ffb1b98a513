#include "nelliptic/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nelliptic/error.hpp"
#include "nelliptic/minimax.hpp"
#include "nelliptic/parallel.hpp"

namespace nelliptic {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Entry {
  int offset;
  double weight;
};

/// Interior nodes are the unknowns; boundary nodes carry Dirichlet data.
struct Layout {
  std::vector<int> unknown;
  std::vector<int> nodes;
  int stride = 0;

  explicit Layout(const GridFunction& grid) : unknown(grid.size(), -1), stride(grid.shape()[1]) {
    for (int i = 0; i < grid.size(); ++i)
      if (!grid.on_boundary(i)) {
        unknown[i] = static_cast<int>(nodes.size());
        nodes.push_back(i);
      }
  }
  int offset(int d0, int d1) const { return d0 * stride + d1; }
};

void check_problem(const GridFunction& f, const GridFunction& g, const char* name) {
  const std::string who(name);
  require(f.dim() == 2 && g.dim() == 2, ErrorKind::invalid_input, who + ": grids must be two-dimensional");
  require(f.same_geometry(g), ErrorKind::invalid_input, who + ": f and g must share a grid");
  require(f.shape()[0] >= 3 && f.shape()[1] >= 3, ErrorKind::invalid_input, who + ": grid has no interior nodes");
  require(f.values().allFinite() && g.values().allFinite(), ErrorKind::invalid_input, who + ": non-finite data");
}

void check_config(const SolveConfig& c) {
  require(c.tol > 0 && std::isfinite(c.tol), ErrorKind::parameter, "solver: tol must be positive");
  require(c.stencil_directions >= 2 && c.stencil_directions % 2 == 0, ErrorKind::parameter,
          "solver: stencil_directions must be even and at least 2");
  require(c.max_iters >= 1, ErrorKind::parameter, "solver: max_iters must be positive");
  require(c.damping > 0 && c.damping < 1, ErrorKind::parameter, "solver: damping must lie in (0, 1)");
}

GridFunction boundary_copy(const GridFunction& g) {
  GridFunction u = g.like();
  for (int i = 0; i < g.size(); ++i)
    if (g.on_boundary(i)) u[i] = g[i];
  return u;
}

std::string history_text(const std::vector<double>& history) {
  std::ostringstream os;
  os.precision(3);
  const std::size_t first = history.size() > 8 ? history.size() - 8 : 0;
  for (std::size_t i = first; i < history.size(); ++i) os << (i > first ? " " : "") << history[i];
  return os.str();
}

// Linear 7-point scheme with variable coefficients.

struct Coefficients {
  double a11, a12, a22, b1, b2;
};

std::vector<Entry> seven_point(const Coefficients& c, double h, const Layout& layout) {
  const double m = std::abs(c.a12);
  const int s = c.a12 >= 0 ? 1 : -1;
  const double scale = std::max(std::abs(c.a11), std::abs(c.a22));
  double d1 = c.a11 - m, d2 = c.a22 - m;
  const double slack = 1e-12 * scale;
  require(d1 >= -slack && d2 >= -slack, ErrorKind::anisotropy,
          "linear scheme: need a11, a22 >= |a12| for a monotone 7-point stencil");
  d1 = std::max(d1, 0.0);
  d2 = std::max(d2, 0.0);
  const double h2 = h * h;
  double w_xp = d1 / h2, w_xm = d1 / h2, w_yp = d2 / h2, w_ym = d2 / h2, center = -(2 * d1 + 2 * d2 + 2 * m) / h2;
  const auto drift = [&](double b, double d, double& wp, double& wm) {
    if (b == 0) return;
    if (d / h2 >= std::abs(b) / (2 * h)) {
      wp += b / (2 * h);
      wm -= b / (2 * h);
    } else if (b > 0) {
      wp += b / h;
      center -= b / h;
    } else {
      wm -= b / h;
      center += b / h;
    }
  };
  drift(c.b1, d1, w_xp, w_xm);
  drift(c.b2, d2, w_yp, w_ym);
  std::vector<Entry> out{{0, center},
                         {layout.offset(1, 0), w_xp},
                         {layout.offset(-1, 0), w_xm},
                         {layout.offset(0, 1), w_yp},
                         {layout.offset(0, -1), w_ym}};
  if (m > 0) {
    out.push_back({layout.offset(1, s), m / h2});
    out.push_back({layout.offset(-1, -s), m / h2});
  }
  return out;
}

template <typename CoeffAt>
std::vector<std::vector<Entry>> linear_stencils(const GridFunction& grid, const Layout& layout, CoeffAt&& coeff_at) {
  std::vector<std::vector<Entry>> out(layout.nodes.size());
  for (std::size_t k = 0; k < layout.nodes.size(); ++k) out[k] = seven_point(coeff_at(layout.nodes[k]), grid.h(), layout);
  return out;
}

double apply(const std::vector<Entry>& row, const GridFunction& u, int idx) {
  double v = 0.0;
  for (const Entry& e : row) v += e.weight * u[idx + e.offset];
  return v;
}

/// Solves the linear system with rows given per unknown; boundary values from u.
void solve_rows(const std::vector<std::vector<Entry>>& rows, const Layout& layout, const GridFunction& f,
                GridFunction& u) {
  const int n = static_cast<int>(layout.nodes.size());
  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    const int idx = layout.nodes[k];
    rhs[k] = f[idx];
    for (const Entry& e : rows[k]) {
      const int j = idx + e.offset;
      if (layout.unknown[j] >= 0)
        triplets.emplace_back(k, layout.unknown[j], e.weight);
      else
        rhs[k] -= e.weight * u[j];
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(A);
  require(lu.info() == Eigen::Success, ErrorKind::iteration_limit, "linear scheme: factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  require(x.allFinite(), ErrorKind::iteration_limit, "linear scheme: solve produced non-finite values");
  for (int k = 0; k < n; ++k) u[layout.nodes[k]] = x[k];
}

double rows_residual(const std::vector<std::vector<Entry>>& rows, const Layout& layout, const GridFunction& f,
                     const GridFunction& u) {
  double r = 0.0;
  for (std::size_t k = 0; k < layout.nodes.size(); ++k) {
    const int idx = layout.nodes[k];
    r = std::max(r, std::abs(apply(rows[k], u, idx) - f[idx]));
  }
  return r;
}

Coefficients constant_coefficients(const SymMatrixd& A, const Eigen::VectorXd& b) {
  require(A.dim() == 2, ErrorKind::parameter, "solve_linear: A must be 2x2");
  require(b.size() == 0 || b.size() == 2, ErrorKind::parameter, "solve_linear: b must have 2 entries");
  require(A.packed().allFinite() && b.allFinite(), ErrorKind::parameter, "solve_linear: non-finite coefficients");
  require(A(0, 0) > 0 && A(0, 0) * A(1, 1) - A(0, 1) * A(0, 1) > 0, ErrorKind::parameter,
          "solve_linear: A must be positive definite");
  return {A(0, 0), A(0, 1), A(1, 1), b.size() ? b[0] : 0.0, b.size() ? b[1] : 0.0};
}

// Wide stencils.

Eigen::Vector2i primitive_direction(int radius, double angle) {
  Eigen::Vector2i e(static_cast<int>(std::lround(radius * std::cos(angle))),
                    static_cast<int>(std::lround(radius * std::sin(angle))));
  return e / std::gcd(std::abs(e[0]), std::abs(e[1]));
}

struct Frame {
  std::array<Eigen::Vector2i, 2> e;
};

class WideStencil {
 public:
  WideStencil(const GridFunction& grid, int m) : shape_(grid.shape()), max_radius_(stencil_radius(m)) {
    frames_.resize(max_radius_ + 1);
    for (int R = 1; R <= max_radius_; ++R) {
      std::vector<Eigen::Vector2i> seen;
      for (int j = 0; j < m / 2; ++j) {
        const Eigen::Vector2i e = primitive_direction(R, j * M_PI / m);
        if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
        seen.push_back(e);
        frames_[R].push_back({{e, Eigen::Vector2i(-e[1], e[0])}});
      }
    }
  }

  /// Frames whose vectors keep every neighbor inside the grid.
  const std::vector<Frame>& frames(const GridFunction& grid, int idx) const {
    const std::vector<int> c = grid.coords(idx);
    const int dist = std::min({c[0], shape_[0] - 1 - c[0], c[1], shape_[1] - 1 - c[1]});
    return frames_[std::min(dist, max_radius_)];
  }

 private:
  std::vector<int> shape_;
  int max_radius_;
  std::vector<std::vector<Frame>> frames_;
};

/// Value of the discrete operator at a node and its derivative entries.
struct NodeEval {
  double value = 0.0;
  std::array<Entry, 5> entries{};
  int count = 0;
};

struct Directional {
  double value;
  int offset;
  double scale;
};

Directional directional(const GridFunction& u, int idx, const Eigen::Vector2i& e, const Layout& layout) {
  const int off = layout.offset(e[0], e[1]);
  const double scale = 1.0 / (e.squaredNorm() * u.h() * u.h());
  return {(u[idx + off] + u[idx - off] - 2 * u[idx]) * scale, off, scale};
}

void set_entries(NodeEval& out, const Directional& a, double slope_a, const Directional& b, double slope_b) {
  out.entries = {Entry{0, -2 * (slope_a * a.scale + slope_b * b.scale)}, Entry{a.offset, slope_a * a.scale},
                 Entry{-a.offset, slope_a * a.scale}, Entry{b.offset, slope_b * b.scale},
                 Entry{-b.offset, slope_b * b.scale}};
  out.count = 5;
}

/// Newton on the nodal system F_h[u] = f with a residual-decrease line search
/// and nonlinear Gauss-Seidel sweeps after repeated line-search failures.
template <typename Eval>
SolveResult newton(GridFunction u, const GridFunction& f, const Layout& layout, const SolveConfig& config,
                   const std::string& scheme, Eval&& eval) {
  const int n = static_cast<int>(layout.nodes.size());
  SolveResult result;
  result.scheme = scheme;

  std::vector<NodeEval> evals(n);
  const auto evaluate_all = [&](const GridFunction& v, bool derivatives) {
    parallel_for(n, config.threads, [&](std::size_t k) { evals[k] = eval(v, layout.nodes[k], derivatives); });
    double r = 0.0;
    for (int k = 0; k < n; ++k) {
      const double rk = evals[k].value - f[layout.nodes[k]];
      r = std::isfinite(rk) ? std::max(r, std::abs(rk)) : INFINITY;
    }
    return r;
  };
  const auto node_residual = [&](const GridFunction& v, int idx) { return eval(v, idx, false).value - f[idx]; };

  // Monotone in u(idx): solve node_residual = 0 for u(idx) by bracketing and bisection.
  const auto gauss_seidel = [&](GridFunction& v, int sweeps) {
    for (int s = 0; s < sweeps; ++s)
      for (int idx : layout.nodes) {
        const double r0 = node_residual(v, idx);
        if (r0 == 0) continue;
        double step = std::max(1e-3, std::abs(v[idx])) * 1e-2;
        double lo = v[idx], hi = v[idx];
        for (int t = 0; t < 200; ++t) {
          if (r0 > 0) {
            hi += step;
            v[idx] = hi;
            if (node_residual(v, idx) <= 0) break;
            lo = hi;
          } else {
            lo -= step;
            v[idx] = lo;
            if (node_residual(v, idx) >= 0) break;
            hi = lo;
          }
          step *= 2;
        }
        for (int t = 0; t < 100 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++t) {
          v[idx] = 0.5 * (lo + hi);
          (node_residual(v, idx) > 0 ? lo : hi) = v[idx];
        }
        v[idx] = 0.5 * (lo + hi);
      }
  };

  int failures = 0;
  for (int iter = 0; iter <= config.max_iters; ++iter) {
    const double r = evaluate_all(u, true);
    result.history.push_back(r);
    result.iterations = iter;
    if (r <= config.tol) {
      result.residual = r;
      result.u = std::move(u);
      return result;
    }
    if (iter == config.max_iters) break;

    std::vector<Triplet> triplets;
    triplets.reserve(5 * n);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
      const int idx = layout.nodes[k];
      rhs[k] = -(evals[k].value - f[idx]);
      for (int j = 0; j < evals[k].count; ++j) {
        const int col = layout.unknown[idx + evals[k].entries[j].offset];
        if (col >= 0) triplets.emplace_back(k, col, evals[k].entries[j].weight);
      }
    }
    SparseMatrix J(n, n);
    J.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(J);
    bool accepted = false;
    if (lu.info() == Eigen::Success) {
      const Eigen::VectorXd delta = lu.solve(rhs);
      if (delta.allFinite()) {
        GridFunction trial = u;
        double alpha = 1.0;
        for (int t = 0; t < 12; ++t, alpha *= config.damping) {
          for (int k = 0; k < n; ++k) trial[layout.nodes[k]] = u[layout.nodes[k]] + alpha * delta[k];
          if (evaluate_all(trial, false) < r) {
            accepted = true;
            break;
          }
        }
        // Without a decrease the most damped step is still taken.
        u = std::move(trial);
      }
    }
    failures = accepted ? 0 : failures + 1;
    if (failures >= 3) {
      gauss_seidel(u, 10);
      failures = 0;
    }
  }
  throw Error(ErrorKind::iteration_limit, scheme + ": no convergence after " + std::to_string(config.max_iters) +
                                              " iterations; residual history " + history_text(result.history));
}

}  // namespace

int stencil_radius(int m) { return std::max(1, static_cast<int>(std::lround(m / 4.0))); }

std::vector<Eigen::Vector2i> stencil_vectors(int m, int radius) {
  std::vector<Eigen::Vector2i> out;
  for (int j = 0; j < m; ++j) {
    const Eigen::Vector2i e = primitive_direction(radius, j * M_PI / m);
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  return out;
}

SolveResult solve_linear(const SymMatrixd& A, const Eigen::VectorXd& b, const GridFunction& f, const GridFunction& g,
                         const SolveConfig& config) {
  check_config(config);
  check_problem(f, g, "solve_linear");
  const Coefficients c = constant_coefficients(A, b);
  const Layout layout(f);
  const auto rows = linear_stencils(f, layout, [&](int) { return c; });
  SolveResult result;
  result.scheme = "five_point_linear";
  result.u = boundary_copy(g);
  solve_rows(rows, layout, f, result.u);
  result.residual = rows_residual(rows, layout, f, result.u);
  result.iterations = 1;
  result.history = {result.residual};
  require(result.residual <= config.tol, ErrorKind::iteration_limit,
          "solve_linear: residual " + history_text(result.history) + " above tolerance");
  return result;
}

SolveResult solve_pucci(double lambda, double Lambda, PucciSign sign, const GridFunction& f, const GridFunction& g,
                        const SolveConfig& config) {
  check_pucci_parameters(lambda, Lambda);
  check_config(config);
  check_problem(f, g, "solve_pucci");
  const Layout layout(f);
  const WideStencil stencil(f, config.stencil_directions);
  const bool linear = lambda == Lambda;
  const bool plus = sign == PucciSign::plus;
  // Weight of a directional second difference t.
  const auto slope = [&](double t) { return (t > 0) == plus ? Lambda : lambda; };

  const auto eval = [&](const GridFunction& u, int idx, bool derivatives) {
    const auto& frames = stencil.frames(u, idx);
    // With lambda = Lambda every frame gives the same operator; use the axes.
    const std::size_t count = linear ? 1 : frames.size();
    NodeEval best;
    Directional ba{}, bb{};
    bool have = false;
    for (std::size_t i = 0; i < count; ++i) {
      const Directional a = directional(u, idx, frames[i].e[0], layout);
      const Directional b = directional(u, idx, frames[i].e[1], layout);
      const double v = slope(a.value) * a.value + slope(b.value) * b.value;
      if (!have || (plus ? v > best.value : v < best.value)) {
        best.value = v;
        ba = a;
        bb = b;
        have = true;
      }
    }
    if (derivatives) set_entries(best, ba, slope(ba.value), bb, slope(bb.value));
    return best;
  };

  SymMatrixd I = SymMatrixd::identity(2);
  SolveConfig inner = config;
  inner.tol = std::max(config.tol, 1e-6);
  GridFunction start = solve_linear(I * (plus ? 1.0 / Lambda : 1.0 / lambda), Eigen::VectorXd(), f, g, inner).u;
  return newton(std::move(start), f, layout, config, "wide_stencil_pucci", eval);
}

SolveResult solve_monge_ampere(const GridFunction& f, const GridFunction& g, const SolveConfig& config) {
  check_config(config);
  check_problem(f, g, "solve_monge_ampere");
  const Layout layout(f);
  for (int idx : layout.nodes)
    require(f[idx] > 0, ErrorKind::admissibility, "solve_monge_ampere: f must be positive at interior nodes");
  const WideStencil stencil(f, config.stencil_directions);

  const auto eval = [&](const GridFunction& u, int idx, bool derivatives) {
    const auto& frames = stencil.frames(u, idx);
    NodeEval best;
    Directional ba{}, bb{};
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const Directional a = directional(u, idx, frames[i].e[0], layout);
      const Directional b = directional(u, idx, frames[i].e[1], layout);
      const double v = std::max(a.value, 0.0) * std::max(b.value, 0.0);
      if (i == 0 || v < best.value) {
        best.value = v;
        ba = a;
        bb = b;
      }
    }
    if (derivatives) {
      // Keep the linearization elliptic off the convex cone.
      const double floor = 1e-2 * std::sqrt(f[idx]);
      set_entries(best, ba, std::max(bb.value, floor), bb, std::max(ba.value, floor));
    }
    return best;
  };

  GridFunction root = f.like();
  for (int i = 0; i < f.size(); ++i) root[i] = 2 * std::sqrt(std::max(f[i], 0.0));
  SolveConfig inner = config;
  inner.tol = std::max(config.tol, 1e-6);
  GridFunction start = solve_linear(SymMatrixd::identity(2), Eigen::VectorXd(), root, g, inner).u;
  return newton(std::move(start), f, layout, config, "wide_stencil_ma", eval);
}

SolveResult solve_mean_curvature(const GridFunction& f, const GridFunction& g, const SolveConfig& config) {
  check_config(config);
  check_problem(f, g, "solve_mean_curvature");
  require(config.delta_guard > 0, ErrorKind::parameter, "solve_mean_curvature: delta_guard must be positive");
  const Layout layout(f);
  double fmax = 0.0;
  for (int idx : layout.nodes) fmax = std::max(fmax, std::abs(f[idx]));
  std::ostringstream msg;
  msg.precision(4);
  msg << "solve_mean_curvature: small-data guard delta_guard = " << config.delta_guard << " violated: ";
  require(fmax <= config.delta_guard, ErrorKind::small_data, msg.str() + "sup|f| = " + std::to_string(fmax));

  std::vector<int> rim;
  for (int i = 0; i < g.size(); ++i)
    if (g.on_boundary(i)) rim.push_back(i);
  SampledFunction trace{Eigen::MatrixXd(2, rim.size()), Eigen::VectorXd(rim.size())};
  for (std::size_t k = 0; k < rim.size(); ++k) {
    trace.points.col(k) = g.point(rim[k]);
    trace.values[k] = g[rim[k]];
  }
  Eigen::VectorXd lo = trace.points.rowwise().minCoeff(), hi = trace.points.rowwise().maxCoeff();
  const Eigen::VectorXd center = 0.5 * (lo + hi);
  const double deviation = minimax_fit(trace, center, 0.5 * (hi - lo).norm() * (1 + 1e-9), 1).error;
  require(deviation <= config.delta_guard, ErrorKind::small_data,
          msg.str() + "boundary deviation from affine = " + std::to_string(deviation));

  const double h = f.h();
  const auto coefficients_of = [&](const GridFunction& u) {
    return [&u, h, stride = layout.stride](int idx) {
      const double p1 = (u[idx + stride] - u[idx - stride]) / (2 * h);
      const double p2 = (u[idx + 1] - u[idx - 1]) / (2 * h);
      const double w2 = 1 + p1 * p1 + p2 * p2, w = std::sqrt(w2);
      return Coefficients{(1 + p2 * p2) / (w * w2), -p1 * p2 / (w * w2), (1 + p1 * p1) / (w * w2), 0.0, 0.0};
    };
  };

  SolveResult result;
  result.scheme = "frozen_coefficient_mc";
  SolveConfig inner = config;
  inner.tol = std::max(config.tol, 1e-6);
  GridFunction u = solve_linear(SymMatrixd::identity(2), Eigen::VectorXd(), f, g, inner).u;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    GridFunction next = u;
    try {
      solve_rows(linear_stencils(f, layout, coefficients_of(u)), layout, f, next);
    } catch (const Error& e) {
      throw Error(ErrorKind::small_data, "solve_mean_curvature: Picard step failed (" + std::string(e.what()) +
                                             "); data too large for delta_guard regime");
    }
    u = std::move(next);
    const double r = rows_residual(linear_stencils(f, layout, coefficients_of(u)), layout, f, u);
    result.history.push_back(r);
    result.iterations = iter;
    require(std::isfinite(r), ErrorKind::small_data, "solve_mean_curvature: Picard iteration diverged");
    if (r <= config.tol) {
      result.residual = r;
      result.u = std::move(u);
      return result;
    }
  }
  throw Error(ErrorKind::small_data, "solve_mean_curvature: Picard iteration did not converge in " +
                                         std::to_string(config.max_iters) + " steps; residual history " +
                                         history_text(result.history));
}

Jet discrete_jet(const GridFunction& u, int idx) {
  const int n = u.dim();
  const double h = u.h();
  Jet jet = Jet::zero(n);
  jet.s = u[idx];
  jet.x = u.point(idx);
  std::vector<int> step(n, 0);
  const auto at = [&](const std::vector<int>& s) { return u[u.neighbor(idx, s)]; };
  for (int a = 0; a < n; ++a) {
    std::fill(step.begin(), step.end(), 0);
    step[a] = 1;
    const double up = at(step);
    step[a] = -1;
    const double down = at(step);
    jet.p[a] = (up - down) / (2 * h);
    jet.M.ref(a, a) = (up - 2 * u[idx] + down) / (h * h);
  }
  if (n == 2)
    jet.M.ref(0, 1) = (at({1, 1}) - at({1, -1}) - at({-1, 1}) + at({-1, -1})) / (4 * h * h);
  return jet;
}

GridFunction residual(const OperatorSpec& op, const GridFunction& u, const GridFunction& f) {
  require(u.same_geometry(f), ErrorKind::invalid_input, "residual: u and f must share a grid");
  validate(op, u.dim());
  GridFunction out = u.like();
  for (int i = 0; i < u.size(); ++i)
    if (!u.on_boundary(i)) out[i] = evaluate(op, discrete_jet(u, i)) - f[i];
  return out;
}

}  // namespace nelliptic
