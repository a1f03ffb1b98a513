#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nelliptic/minimax.hpp"

namespace nelliptic {

/// Uniform tensor grid in one or two dimensions. Values are row-major: the
/// last axis varies fastest, node (i, j) sits at origin + h (i, j).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<int> shape, Eigen::VectorXd origin, double h);
  /// Nodes covering [lo, hi] per axis with spacing h (hi - lo must be a multiple of h).
  static GridFunction box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double h);

  int dim() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  const Eigen::VectorXd& origin() const { return origin_; }
  double h() const { return h_; }
  int size() const { return static_cast<int>(values_.size()); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double& operator[](int idx) { return values_[idx]; }
  double operator[](int idx) const { return values_[idx]; }

  /// Multi-index of a flat node index and back.
  std::vector<int> coords(int idx) const;
  int index(const std::vector<int>& c) const;
  /// Flat index of the node offset by `step`, or -1 outside the grid.
  int neighbor(int idx, const std::vector<int>& step) const;
  bool on_boundary(int idx) const;
  Eigen::VectorXd point(int idx) const;

  GridFunction& fill(const std::function<double(const Eigen::VectorXd&)>& f);
  GridFunction like() const { return GridFunction(shape_, origin_, h_); }
  bool same_geometry(const GridFunction& o) const;
  SampledFunction sample() const;

 private:
  std::vector<int> shape_;
  Eigen::VectorXd origin_;
  double h_ = 0.0;
  Eigen::VectorXd values_;
};

void write_grid(std::ostream& os, const GridFunction& g);
GridFunction read_grid(std::istream& is);
void save_grid(const std::string& path, const GridFunction& g);
GridFunction load_grid(const std::string& path);

/// Expressions in x1, x2 (x is x1), numbers, + - * / ^, parentheses, |x| and abs(...).
using ScalarField = std::function<double(const Eigen::VectorXd&)>;
ScalarField parse_expression(const std::string& text);

}  // namespace nelliptic
