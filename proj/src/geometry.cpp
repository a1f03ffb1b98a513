#include "nelliptic/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "nelliptic/error.hpp"

namespace nelliptic {

namespace {

const std::vector<std::vector<int>>& directions(int dim) {
  static const std::vector<std::vector<int>> d1{{1}};
  static const std::vector<std::vector<int>> d2{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  return dim == 1 ? d1 : d2;
}

/// Replaces y by its lower convex hull at equally spaced abscissae; returns the largest decrease.
double lower_hull_line(std::vector<double>& y) {
  const int m = static_cast<int>(y.size());
  if (m < 3) return 0.0;
  std::vector<int> hull;
  for (int i = 0; i < m; ++i) {
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      // drop b when it lies on or above the chord from a to i
      const double cross = (b - a) * (y[i] - y[a]) - (i - a) * (y[b] - y[a]);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  double change = 0.0;
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const int a = hull[s], b = hull[s + 1];
    for (int i = a + 1; i < b; ++i) {
      const double w = double(i - a) / (b - a);
      const double v = (1 - w) * y[a] + w * y[b];
      if (v < y[i]) {
        change = std::max(change, y[i] - v);
        y[i] = v;
      }
    }
  }
  return change;
}

/// Maximal runs of masked nodes along direction d, in a fixed order.
std::vector<std::vector<int>> lines_along(const GridFunction& g, const std::vector<char>& mask, const std::vector<int>& d) {
  std::vector<int> back(d.size());
  for (std::size_t a = 0; a < d.size(); ++a) back[a] = -d[a];
  std::vector<std::vector<int>> lines;
  for (int idx = 0; idx < g.size(); ++idx) {
    if (!mask[idx]) continue;
    const int prev = g.neighbor(idx, back);
    if (prev >= 0 && mask[prev]) continue;
    std::vector<int> line{idx};
    for (int cur = g.neighbor(idx, d); cur >= 0 && mask[cur]; cur = g.neighbor(cur, d)) line.push_back(cur);
    if (line.size() >= 3) lines.push_back(std::move(line));
  }
  return lines;
}

EnvelopeResult envelope_of(const GridFunction& data, const std::vector<char>& mask, double contact_tol) {
  EnvelopeResult out;
  out.gamma = data;
  out.mask = mask;
  std::vector<std::vector<std::vector<int>>> all_lines;
  for (const auto& d : directions(data.dim())) all_lines.push_back(lines_along(data, mask, d));
  const double scale = 1.0 + data.values().cwiseAbs().maxCoeff();
  std::vector<double> buf;
  const int max_sweeps = data.dim() == 1 ? 1 : 20000;
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    double change = 0.0;
    for (const auto& lines : all_lines)
      for (const auto& line : lines) {
        buf.resize(line.size());
        for (std::size_t i = 0; i < line.size(); ++i) buf[i] = out.gamma[line[i]];
        change = std::max(change, lower_hull_line(buf));
        for (std::size_t i = 0; i < line.size(); ++i) out.gamma[line[i]] = buf[i];
      }
    if (change <= 1e-14 * scale) break;
  }
  out.sweeps = std::min(out.sweeps, max_sweeps);
  out.contact.assign(data.size(), 0);
  for (int i = 0; i < data.size(); ++i)
    out.contact[i] = mask[i] && std::abs(out.gamma[i] - data[i]) <= contact_tol;
  return out;
}

}  // namespace

GridFunction EnvelopeResult::restrict_to_domain(const GridFunction& working) const {
  GridFunction g(extension.original_shape, extension.original_origin, working.h());
  for (int i = 0; i < g.size(); ++i) {
    std::vector<int> c = g.coords(i);
    for (int& v : c) v += extension.pad;
    g[i] = working[working.index(c)];
  }
  return g;
}

std::vector<char> EnvelopeResult::contact_on_domain() const {
  GridFunction marks = gamma.like();
  for (int i = 0; i < marks.size(); ++i) marks[i] = contact[i];
  const GridFunction r = restrict_to_domain(marks);
  std::vector<char> out(r.size());
  for (int i = 0; i < r.size(); ++i) out[i] = r[i] != 0.0;
  return out;
}

EnvelopeResult lower_convex_envelope(const GridFunction& u) {
  require(u.values().allFinite(), ErrorKind::invalid_input, "envelope: non-finite values");
  int pad = 0;
  for (int s : u.shape()) pad = std::max(pad, (s - 1) / 2);
  std::vector<int> shape;
  Eigen::VectorXd origin = u.origin();
  for (int a = 0; a < u.dim(); ++a) {
    shape.push_back(u.shape()[a] + 2 * pad);
    origin[a] -= pad * u.h();
  }
  GridFunction data(shape, origin, u.h());
  for (int i = 0; i < u.size(); ++i) {
    std::vector<int> c = u.coords(i);
    for (int& v : c) v += pad;
    data[data.index(c)] = std::min(u[i], 0.0);
  }
  const double tol = 1e-9 * (1.0 + u.values().cwiseAbs().maxCoeff());
  EnvelopeResult r = envelope_of(data, std::vector<char>(data.size(), 1), tol);
  r.extension = {pad, u.shape(), u.origin()};
  return r;
}

EnvelopeResult masked_envelope(const GridFunction& v, const std::vector<char>& mask) {
  require(static_cast<int>(mask.size()) == v.size(), ErrorKind::invalid_input, "envelope: mask size mismatch");
  const double tol = 1e-9 * (1.0 + v.values().cwiseAbs().maxCoeff());
  EnvelopeResult r = envelope_of(v, mask, tol);
  r.extension = {0, v.shape(), v.origin()};
  return r;
}

bool discretely_convex(const GridFunction& v, const std::vector<char>& mask, double tol) {
  for (const auto& d : directions(v.dim())) {
    std::vector<int> back(d.size());
    for (std::size_t a = 0; a < d.size(); ++a) back[a] = -d[a];
    for (int i = 0; i < v.size(); ++i) {
      if (!mask[i]) continue;
      const int p = v.neighbor(i, d), m = v.neighbor(i, back);
      if (p < 0 || m < 0 || !mask[p] || !mask[m]) continue;
      if (v[p] + v[m] < 2 * v[i] - tol) return false;
    }
  }
  return true;
}

std::vector<char> inscribed_ball_mask(const GridFunction& g) {
  Eigen::VectorXd center(g.dim());
  double radius = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    const double len = (g.shape()[a] - 1) * g.h();
    center[a] = g.origin()[a] + 0.5 * len;
    radius = std::min(radius, 0.5 * len);
  }
  std::vector<char> mask(g.size());
  for (int i = 0; i < g.size(); ++i) mask[i] = (g.point(i) - center).norm() <= radius * (1 + 1e-12);
  return mask;
}

AbpReport abp_check(const GridFunction& u, const GridFunction& f, double lambda, double Lambda, double b0) {
  require(u.same_geometry(f), ErrorKind::invalid_input, "abp: u and f grids differ");
  require(lambda > 0 && lambda <= Lambda && b0 >= 0, ErrorKind::parameter, "abp: need 0 < lambda <= Lambda, b0 >= 0");
  const std::vector<char> mask = inscribed_ball_mask(u);
  const double scale = 1.0 + u.values().cwiseAbs().maxCoeff();
  // boundary: nodes just outside the ball next to it, plus ball nodes on the box edge
  for (int i = 0; i < u.size(); ++i) {
    bool ring = mask[i] && u.on_boundary(i);
    for (int a = 0; a < u.dim() && !mask[i] && !ring; ++a)
      for (int s : {-1, 1}) {
        std::vector<int> step(u.dim(), 0);
        step[a] = s;
        const int nb = u.neighbor(i, step);
        if (nb >= 0 && mask[nb]) ring = true;
      }
    if (ring)
      require(u[i] >= -1e-9 * scale, ErrorKind::precondition,
              "abp: u is negative on the boundary of the domain ball");
  }
  GridFunction data = u;
  for (int i = 0; i < data.size(); ++i) data[i] = mask[i] ? std::min(u[i], 0.0) : 0.0;
  const EnvelopeResult env = masked_envelope(data, mask);

  AbpReport r;
  r.lambda = lambda;
  r.Lambda = Lambda;
  r.b0 = b0;
  const int n = u.dim();
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (!mask[i]) continue;
    ++r.domain_nodes;
    r.sup_uminus = std::max(r.sup_uminus, -std::min(u[i], 0.0));
    if (env.contact[i]) {
      ++r.contact_nodes;
      sum += std::pow(std::max(f[i], 0.0), n) * std::pow(u.h(), n);
    }
  }
  r.contact_Ln_norm_fplus = std::pow(sum, 1.0 / n);
  if (r.sup_uminus > 0) r.ratio = r.contact_Ln_norm_fplus > 0 ? r.sup_uminus / r.contact_Ln_norm_fplus
                                                               : std::numeric_limits<double>::infinity();
  return r;
}

namespace {

std::vector<Eigen::VectorXd> ray_directions(int n, int rays) {
  require(n == 1 || n == 2, ErrorKind::invalid_input, "section: only n = 1, 2 are supported");
  if (n == 1) return {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  require(rays >= 3, ErrorKind::parameter, "section: need at least 3 rays");
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j < rays; ++j) {
    const double a = 2 * M_PI * j / rays;
    out.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
  }
  return out;
}

/// phi(t) = u(x0 + t dir) - l(x0 + t dir) - h along each ray, with u(x) = nullopt outside the domain.
std::vector<Eigen::VectorXd> trace_section(const std::function<std::optional<double>(const Eigen::VectorXd&)>& u,
                                           const Eigen::VectorXd& x0, const Eigen::VectorXd& slope, double h,
                                           double step, int rays) {
  require(h > 0 && std::isfinite(h), ErrorKind::parameter, "section: height must be positive");
  const auto u0 = u(x0);
  require(u0.has_value(), ErrorKind::invalid_input, "section: center outside the domain");
  const double scale = 1.0 + std::abs(*u0) + slope.norm();
  const double tol = 1e-6 * h + 1e-12 * scale;
  std::vector<Eigen::VectorXd> verts;
  for (const Eigen::VectorXd& dir : ray_directions(static_cast<int>(x0.size()), rays)) {
    auto phi = [&](double t) -> std::optional<double> {
      const auto v = u(x0 + t * dir);
      if (!v) return std::nullopt;
      return *v - *u0 - t * slope.dot(dir) - h;
    };
    double lo = 0.0, prev = -h, hi = 0.0;
    for (int k = 1;; ++k) {
      const double t = k * step;
      const auto v = phi(t);
      require(v.has_value(), ErrorKind::section_escape, "section: S_h reaches the domain boundary");
      require(*v >= prev - tol, ErrorKind::precondition, "section: u - l decreases along a ray (u is not convex)");
      if (*v >= 0) {
        hi = t;
        break;
      }
      lo = t;
      prev = *v;
    }
    const double width_tol = 1e-10 * 2 * hi;
    while (hi - lo > width_tol) {
      const double mid = 0.5 * (lo + hi);
      if (*phi(mid) < 0) lo = mid;
      else hi = mid;
    }
    verts.push_back(x0 + 0.5 * (lo + hi) * dir);
  }
  return verts;
}

double bilinear(const GridFunction& g, const Eigen::VectorXd& x, bool& inside) {
  std::vector<int> base(g.dim());
  std::vector<double> frac(g.dim());
  inside = true;
  for (int a = 0; a < g.dim(); ++a) {
    const double s = (x[a] - g.origin()[a]) / g.h();
    if (s < -1e-12 || s > g.shape()[a] - 1 + 1e-12) {
      inside = false;
      return 0.0;
    }
    const int b = std::clamp(static_cast<int>(std::floor(s)), 0, g.shape()[a] - 2);
    base[a] = b;
    frac[a] = std::clamp(s - b, 0.0, 1.0);
  }
  double v = 0.0;
  for (int corner = 0; corner < (1 << g.dim()); ++corner) {
    std::vector<int> c = base;
    double w = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int bit = (corner >> a) & 1;
      c[a] += bit;
      w *= bit ? frac[a] : 1 - frac[a];
    }
    if (w != 0.0) v += w * g[g.index(c)];
  }
  return v;
}

}  // namespace

std::vector<Eigen::VectorXd> section(const AnalyticFunction& u, const Eigen::VectorXd& x0, double h,
                                    const SectionOptions& options) {
  require(x0.size() == u.dim, ErrorKind::invalid_input, "section: point dimension mismatch");
  const double R = options.domain_radius;
  auto value = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    if ((x - x0).norm() > R) return std::nullopt;
    return u.eval(x);
  };
  return trace_section(value, x0, u.grad(x0), h, R / 2048, options.rays);
}

std::vector<Eigen::VectorXd> section(const GridFunction& u, const Eigen::VectorXd& x0, double h,
                                    const SectionOptions& options) {
  require(x0.size() == u.dim(), ErrorKind::invalid_input, "section: point dimension mismatch");
  auto value = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    bool inside = false;
    const double v = bilinear(u, x, inside);
    if (!inside) return std::nullopt;
    return v;
  };
  Eigen::VectorXd slope(u.dim());
  for (int a = 0; a < u.dim(); ++a) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(u.dim(), a) * u.h();
    const auto p = value(x0 + e), m = value(x0 - e);
    require(p && m, ErrorKind::section_escape, "section: center too close to the grid boundary");
    slope[a] = (*p - *m) / (2 * u.h());
  }
  return trace_section(value, x0, slope, h, 0.5 * u.h(), options.rays);
}

Ellipsoid mvee(const std::vector<Eigen::VectorXd>& points, double tol) {
  require(!points.empty(), ErrorKind::invalid_input, "mvee: no points");
  const int d = static_cast<int>(points[0].size());
  const int N = static_cast<int>(points.size());
  Eigen::MatrixXd P(d, N);
  for (int i = 0; i < N; ++i) {
    require(points[i].size() == d, ErrorKind::invalid_input, "mvee: mixed point dimensions");
    P.col(i) = points[i];
  }
  // whiten first; the problem is affine equivariant
  const Eigen::VectorXd mean = P.rowwise().mean();
  const Eigen::MatrixXd C = P.colwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov(C * C.transpose() / N);
  require(N > d && cov.eigenvalues().minCoeff() > 1e-20 * std::max(1.0, cov.eigenvalues().maxCoeff()),
          ErrorKind::rank, "mvee: points are affinely degenerate");
  const Eigen::MatrixXd L = cov.operatorInverseSqrt();
  const int D = d + 1;
  Eigen::MatrixXd Q(D, N);
  Q.topRows(d) = L * C;
  Q.row(d).setOnes();

  // Lifted problem: minimize -log det X subject to q_i^T X q_i <= 1, by a
  // log-barrier Newton method in the packed entries of X.
  std::vector<Eigen::MatrixXd> basis;
  for (int a = 0; a < D; ++a)
    for (int b = a; b < D; ++b) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(D, D);
      E(a, b) = E(b, a) = 1.0;
      basis.push_back(E);
    }
  const int K = static_cast<int>(basis.size());
  Eigen::MatrixXd qe(N, K);
  for (int k = 0; k < K; ++k) qe.col(k) = (Q.transpose() * basis[k]).cwiseProduct(Q.transpose()).rowwise().sum();

  auto slack = [&](const Eigen::MatrixXd& X) {
    return Eigen::VectorXd(1.0 - (Q.transpose() * X).cwiseProduct(Q.transpose()).rowwise().sum().array());
  };
  auto barrier = [&](const Eigen::MatrixXd& X, double t, bool& ok) {
    const Eigen::VectorXd s = slack(X);
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    ok = s.minCoeff() > 0 && llt.info() == Eigen::Success;
    if (!ok) return 0.0;
    const double logdet = 2 * llt.matrixLLT().diagonal().array().log().sum();
    return -t * logdet - s.array().log().sum();
  };

  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(D, D) / (1.01 * Q.colwise().squaredNorm().maxCoeff());
  Ellipsoid e;
  for (double t = 1.0; N / t > tol * 1e-3; t *= 20) {
    for (int it = 0; it < 100; ++it, ++e.iterations) {
      const Eigen::VectorXd s = slack(X);
      const Eigen::MatrixXd Xi = X.inverse();
      Eigen::VectorXd g(K);
      Eigen::MatrixXd H(K, K);
      const Eigen::VectorXd inv_s = s.cwiseInverse();
      const Eigen::MatrixXd weighted = qe.transpose() * inv_s.cwiseAbs2().asDiagonal();
      for (int k = 0; k < K; ++k) {
        g[k] = -t * (Xi * basis[k]).trace() + qe.col(k).dot(inv_s);
        for (int l = 0; l < K; ++l)
          H(k, l) = t * (Xi * basis[k] * Xi * basis[l]).trace() + weighted.row(k).dot(qe.col(l));
      }
      const Eigen::VectorXd step = -H.ldlt().solve(g);
      const double decrement = -g.dot(step);
      if (decrement < 1e-14) break;
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(D, D);
      for (int k = 0; k < K; ++k) V += step[k] * basis[k];
      bool ok = true;
      const double f0 = barrier(X, t, ok);
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const double f1 = barrier(X + alpha * V, t, ok);
        if (ok && f1 <= f0 - 0.25 * alpha * decrement) break;
      }
      X += alpha * V;
    }
  }

  // slice of the lifted ellipsoid at the last coordinate = 1, then back to the original frame
  const Eigen::MatrixXd X11 = X.topLeftCorner(d, d);
  const Eigen::VectorXd x12 = X.topRightCorner(d, 1);
  const Eigen::VectorXd cw = -X11.ldlt().solve(x12);
  e.center = mean + L.inverse() * cw;
  e.A = L.transpose() * X11 * L;
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, (p - e.center).dot(e.A * (p - e.center)));
  e.A /= worst;
  return e;
}

SectionNormalization john_normalize(const std::vector<Eigen::VectorXd>& vertices, double h, int n) {
  require(h > 0, ErrorKind::parameter, "john_normalize: h must be positive");
  require(!vertices.empty() && vertices[0].size() == n, ErrorKind::invalid_input,
          "john_normalize: vertex dimension mismatch");
  const Ellipsoid e = mvee(vertices);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.A);
  SectionNormalization out;
  out.h = h;
  out.vertices = vertices;
  out.T = es.operatorSqrt();
  out.center = out.T * e.center;
  out.detT = std::sqrt(e.A.determinant());
  out.product = e.A.determinant() * std::pow(h, n);
  std::vector<Eigen::VectorXd> img;
  for (const auto& v : vertices) img.push_back(out.T * v);
  for (const auto& y : img) out.outer_radius = std::max(out.outer_radius, (y - out.center).norm());
  out.inner_radius = std::numeric_limits<double>::infinity();
  if (n == 1) {
    for (const auto& y : img) out.inner_radius = std::min(out.inner_radius, std::abs(y[0] - out.center[0]));
  } else {
    for (std::size_t i = 0; i < img.size(); ++i) {
      const Eigen::Vector2d a = img[i], b = img[(i + 1) % img.size()];
      const Eigen::Vector2d t = b - a, c = out.center;
      const double len = t.norm();
      if (len == 0) continue;
      const double cross = t.x() * (c - a).y() - t.y() * (c - a).x();
      out.inner_radius = std::min(out.inner_radius, std::abs(cross) / len);
    }
  }
  return out;
}

}  // namespace nelliptic
