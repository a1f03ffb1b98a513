#include "nelliptic/polynomial.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

namespace nelliptic {

int multi_index_order(const MultiIndex& sigma) { return std::accumulate(sigma.begin(), sigma.end(), 0); }

double multi_index_factorial(const MultiIndex& sigma) {
  double f = 1.0;
  for (int s : sigma)
    for (int j = 2; j <= s; ++j) f *= j;
  return f;
}

namespace {

void enumerate_exact(int dim, int remaining, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  const int pos = static_cast<int>(prefix.size());
  if (pos == dim - 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int s = remaining; s >= 0; --s) {
    prefix.push_back(s);
    enumerate_exact(dim, remaining - s, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

const std::vector<MultiIndex>& multi_indices(int dim, int degree) {
  require(dim >= 1 && degree >= 0, ErrorKind::invalid_input, "multi_indices: need dim >= 1, degree >= 0");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<std::vector<MultiIndex>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, degree}];
  if (!slot) {
    slot = std::make_unique<std::vector<MultiIndex>>();
    for (int d = 0; d <= degree; ++d) {
      MultiIndex prefix;
      enumerate_exact(dim, d, prefix, *slot);
    }
  }
  return *slot;
}

int poly_space_dim(int dim, int degree) { return static_cast<int>(multi_indices(dim, degree).size()); }

Eigen::VectorXd monomial_row(const Eigen::Ref<const Eigen::VectorXd>& y, int degree) {
  const int n = static_cast<int>(y.size());
  // scaled powers y_i^j / j!
  Eigen::MatrixXd pw(n, degree + 1);
  for (int i = 0; i < n; ++i) {
    pw(i, 0) = 1.0;
    for (int j = 1; j <= degree; ++j) pw(i, j) = pw(i, j - 1) * y[i] / j;
  }
  const auto& idx = multi_indices(n, degree);
  Eigen::VectorXd row(idx.size());
  for (std::size_t t = 0; t < idx.size(); ++t) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= pw(i, idx[t][i]);
    row[static_cast<Eigen::Index>(t)] = v;
  }
  return row;
}

Polynomial::Polynomial(int dim, int degree)
    : dim_(dim), degree_(degree), coeffs_(Eigen::VectorXd::Zero(poly_space_dim(dim, degree))) {}

Polynomial::Polynomial(int dim, int degree, Eigen::VectorXd coeffs)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)) {
  require(coeffs_.size() == poly_space_dim(dim, degree), ErrorKind::invalid_input,
          "Polynomial: coefficient count does not match dim/degree");
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim, 0);
  p.coeffs_[0] = c;
  return p;
}

Polynomial Polynomial::quadratic(const SymMatrixd& a, const Eigen::VectorXd& b, double c) {
  const int n = a.dim();
  require(b.size() == n, ErrorKind::invalid_input, "Polynomial::quadratic: dimension mismatch");
  Polynomial p(n, 2);
  MultiIndex sigma(n, 0);
  p.set_coefficient(sigma, c);
  for (int i = 0; i < n; ++i) {
    sigma.assign(n, 0);
    sigma[i] = 1;
    p.set_coefficient(sigma, b[i]);
    for (int j = i; j < n; ++j) {
      sigma.assign(n, 0);
      ++sigma[i];
      ++sigma[j];
      p.set_coefficient(sigma, a(i, j));
    }
  }
  return p;
}

int Polynomial::index_of(const MultiIndex& sigma) const {
  const auto& idx = indices();
  for (std::size_t t = 0; t < idx.size(); ++t)
    if (idx[t] == sigma) return static_cast<int>(t);
  return -1;
}

double Polynomial::coefficient(const MultiIndex& sigma) const {
  const int t = index_of(sigma);
  return t < 0 ? 0.0 : coeffs_[t];
}

void Polynomial::set_coefficient(const MultiIndex& sigma, double a) {
  const int t = index_of(sigma);
  require(t >= 0, ErrorKind::invalid_input, "Polynomial: multi-index outside P_k");
  coeffs_[t] = a;
}

double Polynomial::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == dim_, ErrorKind::invalid_input, "Polynomial: point dimension mismatch");
  return monomial_row(x, degree_).dot(coeffs_);
}

double Polynomial::norm(double r) const {
  const auto& idx = indices();
  double s = 0.0;
  for (std::size_t t = 0; t < idx.size(); ++t)
    s += std::pow(r, multi_index_order(idx[t])) * std::abs(coeffs_[static_cast<Eigen::Index>(t)]);
  return s;
}

Polynomial Polynomial::derivative(const MultiIndex& tau) const {
  require(static_cast<int>(tau.size()) == dim_, ErrorKind::invalid_input, "derivative: index dimension");
  const int order = multi_index_order(tau);
  if (order > degree_) return Polynomial(dim_, 0);
  Polynomial out(dim_, degree_ - order);
  const auto& idx = out.indices();
  MultiIndex shifted(dim_);
  for (std::size_t t = 0; t < idx.size(); ++t) {
    for (int i = 0; i < dim_; ++i) shifted[i] = idx[t][i] + tau[i];
    out.coeffs_[static_cast<Eigen::Index>(t)] = coefficient(shifted);
  }
  return out;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd g(dim_);
  MultiIndex tau(dim_, 0);
  for (int i = 0; i < dim_; ++i) {
    tau.assign(dim_, 0);
    tau[i] = 1;
    g[i] = derivative(tau)(x);
  }
  return g;
}

SymMatrixd Polynomial::hessian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  SymMatrixd h(dim_);
  MultiIndex tau(dim_, 0);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      tau.assign(dim_, 0);
      ++tau[i];
      ++tau[j];
      h.ref(i, j) = derivative(tau)(x);
    }
  return h;
}

Polynomial Polynomial::rescaled(double c) const {
  Polynomial out = *this;
  const auto& idx = indices();
  for (std::size_t t = 0; t < idx.size(); ++t)
    out.coeffs_[static_cast<Eigen::Index>(t)] *= std::pow(c, multi_index_order(idx[t]));
  return out;
}

Polynomial Polynomial::translated(const Eigen::VectorXd& shift) const {
  // a'_sigma = D^sigma P(shift)
  Polynomial out(dim_, degree_);
  const auto& idx = indices();
  for (std::size_t t = 0; t < idx.size(); ++t)
    out.coeffs_[static_cast<Eigen::Index>(t)] = derivative(idx[t])(shift);
  return out;
}

Polynomial Polynomial::raised_to(int degree) const {
  if (degree == degree_) return *this;
  Polynomial out(dim_, degree);
  const auto& idx = indices();
  for (std::size_t t = 0; t < idx.size(); ++t) {
    const double a = coeffs_[static_cast<Eigen::Index>(t)];
    if (multi_index_order(idx[t]) <= degree) out.set_coefficient(idx[t], a);
    else require(a == 0.0, ErrorKind::invalid_input, "raised_to: would drop a nonzero coefficient");
  }
  return out;
}

int Polynomial::effective_degree() const {
  const auto& idx = indices();
  int d = 0;
  for (std::size_t t = 0; t < idx.size(); ++t)
    if (coeffs_[static_cast<Eigen::Index>(t)] != 0.0) d = std::max(d, multi_index_order(idx[t]));
  return d;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  require(o.dim_ == dim_, ErrorKind::invalid_input, "Polynomial: dimension mismatch");
  const int d = std::max(degree_, o.degree_);
  if (degree_ < d) *this = raised_to(d);
  coeffs_ += o.raised_to(d).coeffs_;
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) { return *this += o * -1.0; }

Polynomial& Polynomial::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

}  // namespace nelliptic
