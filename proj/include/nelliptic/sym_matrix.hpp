#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "nelliptic/error.hpp"

namespace nelliptic {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense symmetric n x n matrix. Only the upper triangle is stored, packed
/// row-major, so symmetry holds by construction.
template <typename Scalar>
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), packed_(VectorX<Scalar>::Zero(packed_size(n))) {
    require(n >= 1, ErrorKind::invalid_input, "SymMatrix: dimension must be >= 1");
  }

  /// Builds from the upper triangle of `m`; the lower triangle is ignored.
  template <typename Derived>
  static SymMatrix from_dense(const Eigen::MatrixBase<Derived>& m) {
    require(m.rows() == m.cols(), ErrorKind::invalid_input, "SymMatrix: matrix must be square");
    SymMatrix out(static_cast<int>(m.rows()));
    for (int i = 0; i < out.n_; ++i)
      for (int j = i; j < out.n_; ++j) out.packed_[out.offset(i, j)] = m(i, j);
    return out;
  }

  static SymMatrix from_packed(int n, const VectorX<Scalar>& upper) {
    SymMatrix out(n);
    require(upper.size() == packed_size(n), ErrorKind::invalid_input,
            "SymMatrix: packed entry count must be n(n+1)/2");
    out.packed_ = upper;
    return out;
  }

  static SymMatrix identity(int n) { return scaled_identity(n, Scalar(1)); }

  static SymMatrix scaled_identity(int n, Scalar s) {
    SymMatrix out(n);
    for (int i = 0; i < n; ++i) out.packed_[out.offset(i, i)] = s;
    return out;
  }

  static SymMatrix diagonal(const VectorX<Scalar>& d) {
    SymMatrix out(static_cast<int>(d.size()));
    for (int i = 0; i < out.n_; ++i) out.packed_[out.offset(i, i)] = d[i];
    return out;
  }

  /// E_ij + E_ji for i != j, E_ii otherwise.
  static SymMatrix unit(int n, int i, int j) {
    SymMatrix out(n);
    out.ref(i, j) = Scalar(1);
    return out;
  }

  static constexpr Eigen::Index packed_size(int n) { return Eigen::Index(n) * (n + 1) / 2; }

  int dim() const { return n_; }
  const VectorX<Scalar>& packed() const { return packed_; }

  Scalar operator()(int i, int j) const { return packed_[offset(i, j)]; }
  Scalar& ref(int i, int j) { return packed_[offset(i, j)]; }

  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) m(i, j) = m(j, i) = packed_[offset(i, j)];
    return m;
  }

  Scalar trace() const {
    Scalar t(0);
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  bool all_finite() const { return packed_.allFinite(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same(o);
    packed_ += o.packed_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same(o);
    packed_ -= o.packed_;
    return *this;
  }
  SymMatrix& operator*=(Scalar s) {
    packed_ *= s;
    return *this;
  }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, Scalar s) { return a *= s; }
  friend SymMatrix operator*(Scalar s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= Scalar(-1); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.n_ == b.n_ && a.packed_ == b.packed_;
  }

 private:
  Eigen::Index offset(int i, int j) const {
    if (i > j) std::swap(i, j);
    // row-major upper triangle: rows 0..i-1 contribute (n - r) entries each
    return Eigen::Index(i) * n_ - Eigen::Index(i) * (i - 1) / 2 + (j - i);
  }
  void check_same(const SymMatrix& o) const {
    require(o.n_ == n_, ErrorKind::invalid_input, "SymMatrix: dimension mismatch");
  }

  int n_ = 0;
  VectorX<Scalar> packed_;
};

template <typename Scalar>
struct SymEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // column i pairs with values[i]; empty if not requested
};

/// Cyclic Jacobi rotations until the off-diagonal mass is at round-off level.
template <typename Scalar>
SymEigen<Scalar> eigen_sym(const SymMatrix<Scalar>& m, bool want_vectors = true, int max_sweeps = 100) {
  require(m.all_finite(), ErrorKind::invalid_input, "eigenvalues_sym: non-finite entry");
  const int n = m.dim();
  MatrixX<Scalar> a = m.dense();
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  const Scalar floor = std::sqrt(std::max(a.squaredNorm(), std::numeric_limits<Scalar>::min())) * eps * eps;

  int sweep = 0;
  bool rotated = true;
  for (; sweep < max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (std::abs(apq) <= Scalar(0.5) * eps * (std::abs(a(p, p)) + std::abs(a(q, q))) ||
            std::abs(apq) <= floor) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }
        rotated = true;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (int k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        if (want_vectors) {
          for (int k = 0; k < n; ++k) {
            const Scalar vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  require(!rotated, ErrorKind::iteration_limit, "eigenvalues_sym: Jacobi sweeps exhausted");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  SymEigen<Scalar> out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a(order[i], order[i]);
  if (want_vectors) {
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> eigenvalues_sym(const SymMatrix<Scalar>& m) {
  return eigen_sym(m, false).values;
}

/// |M|: the spectral radius.
template <typename Scalar>
Scalar spectral_radius(const SymMatrix<Scalar>& m) {
  const VectorX<Scalar> ev = eigenvalues_sym(m);
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

using SymMatrixd = SymMatrix<double>;

}  // namespace nelliptic
