#include "nelliptic/grid.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "nelliptic/error.hpp"
#include "nelliptic/text.hpp"

namespace nelliptic {

GridFunction::GridFunction(std::vector<int> shape, Eigen::VectorXd origin, double h)
    : shape_(std::move(shape)), origin_(std::move(origin)), h_(h) {
  require(dim() == 1 || dim() == 2, ErrorKind::invalid_input, "grid: only 1D and 2D grids are supported");
  require(origin_.size() == dim(), ErrorKind::invalid_input, "grid: origin dimension mismatch");
  require(h_ > 0 && std::isfinite(h_), ErrorKind::invalid_input, "grid: spacing must be positive");
  int total = 1;
  for (int s : shape_) {
    require(s >= 1, ErrorKind::invalid_input, "grid: shape entries must be positive");
    total *= s;
  }
  values_ = Eigen::VectorXd::Zero(total);
}

GridFunction GridFunction::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double h) {
  require(lo.size() == hi.size(), ErrorKind::invalid_input, "grid: box corner dimension mismatch");
  require(h > 0, ErrorKind::invalid_input, "grid: spacing must be positive");
  std::vector<int> shape;
  for (Eigen::Index a = 0; a < lo.size(); ++a) {
    const double cells = (hi[a] - lo[a]) / h;
    const double rounded = std::round(cells);
    require(rounded >= 2 && std::abs(cells - rounded) <= 1e-9 * std::max(1.0, cells), ErrorKind::invalid_input,
            "grid: box extent must be a multiple of h with at least two cells");
    shape.push_back(static_cast<int>(rounded) + 1);
  }
  return GridFunction(shape, lo, h);
}

std::vector<int> GridFunction::coords(int idx) const {
  std::vector<int> c(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    c[a] = idx % shape_[a];
    idx /= shape_[a];
  }
  return c;
}

int GridFunction::index(const std::vector<int>& c) const {
  int idx = 0;
  for (int a = 0; a < dim(); ++a) idx = idx * shape_[a] + c[a];
  return idx;
}

int GridFunction::neighbor(int idx, const std::vector<int>& step) const {
  std::vector<int> c = coords(idx);
  for (int a = 0; a < dim(); ++a) {
    c[a] += step[a];
    if (c[a] < 0 || c[a] >= shape_[a]) return -1;
  }
  return index(c);
}

bool GridFunction::on_boundary(int idx) const {
  const std::vector<int> c = coords(idx);
  for (int a = 0; a < dim(); ++a)
    if (c[a] == 0 || c[a] == shape_[a] - 1) return true;
  return false;
}

Eigen::VectorXd GridFunction::point(int idx) const {
  const std::vector<int> c = coords(idx);
  Eigen::VectorXd x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = origin_[a] + h_ * c[a];
  return x;
}

GridFunction& GridFunction::fill(const std::function<double(const Eigen::VectorXd&)>& f) {
  for (int i = 0; i < size(); ++i) values_[i] = f(point(i));
  return *this;
}

bool GridFunction::same_geometry(const GridFunction& o) const {
  return shape_ == o.shape_ && origin_ == o.origin_ && h_ == o.h_;
}

SampledFunction GridFunction::sample() const {
  SampledFunction s{Eigen::MatrixXd(dim(), size()), values_};
  for (int i = 0; i < size(); ++i) s.points.col(i) = point(i);
  return s;
}

void write_grid(std::ostream& os, const GridFunction& g) {
  os << "nelliptic-grid v1\n";
  os << "dim " << g.dim() << "\n";
  os << "shape";
  for (int s : g.shape()) os << ' ' << s;
  os << "\norigin";
  for (int a = 0; a < g.dim(); ++a) os << ' ' << format_double(g.origin()[a]);
  os << "\nspacing " << format_double(g.h()) << "\n";
  for (int i = 0; i < g.size(); ++i) os << format_double(g[i]) << "\n";
}

GridFunction read_grid(std::istream& is) {
  std::string line;
  auto next_fields = [&](const std::string& key) {
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::invalid_input, "grid file: missing '" + key + "' line");
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    require(head == key, ErrorKind::invalid_input, "grid file: expected '" + key + "', got '" + line + "'");
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    return fields;
  };
  require(static_cast<bool>(std::getline(is, line)) && line == "nelliptic-grid v1", ErrorKind::invalid_input,
          "grid file: bad header");
  const auto d = next_fields("dim");
  require(d.size() == 1, ErrorKind::invalid_input, "grid file: malformed dim line");
  const int n = parse_int(d[0]);
  require(n == 1 || n == 2, ErrorKind::invalid_input, "grid file: dim must be 1 or 2");
  const auto sh = next_fields("shape");
  const auto org = next_fields("origin");
  const auto sp = next_fields("spacing");
  require(static_cast<int>(sh.size()) == n && static_cast<int>(org.size()) == n && sp.size() == 1,
          ErrorKind::invalid_input, "grid file: header field counts do not match dim");
  std::vector<int> shape;
  Eigen::VectorXd origin(n);
  for (int a = 0; a < n; ++a) {
    shape.push_back(parse_int(sh[a]));
    origin[a] = parse_double(org[a]);
  }
  GridFunction g(shape, origin, parse_double(sp[0]));
  for (int i = 0; i < g.size(); ++i) {
    require(static_cast<bool>(std::getline(is, line)), ErrorKind::invalid_input, "grid file: too few values");
    g[i] = parse_double(line);
  }
  while (std::getline(is, line))
    require(line.find_first_not_of(" \t\r") == std::string::npos, ErrorKind::invalid_input,
            "grid file: trailing data after values");
  return g;
}

void save_grid(const std::string& path, const GridFunction& g) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::invalid_input, "cannot write grid file '" + path + "'");
  write_grid(os, g);
  require(static_cast<bool>(os), ErrorKind::invalid_input, "error writing grid file '" + path + "'");
}

GridFunction load_grid(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::invalid_input, "cannot open grid file '" + path + "'");
  return read_grid(is);
}

namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(const Eigen::VectorXd& x) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Constant : Node {
  double v;
  explicit Constant(double v) : v(v) {}
  double eval(const Eigen::VectorXd&) const override { return v; }
};

struct Coordinate : Node {
  int axis;
  explicit Coordinate(int a) : axis(a) {}
  double eval(const Eigen::VectorXd& x) const override {
    require(axis < x.size(), ErrorKind::invalid_input, "expression: x" + std::to_string(axis + 1) + " out of range");
    return x[axis];
  }
};

struct Norm : Node {
  double eval(const Eigen::VectorXd& x) const override { return x.norm(); }
};

struct Unary : Node {
  char op;
  NodePtr a;
  Unary(char op, NodePtr a) : op(op), a(std::move(a)) {}
  double eval(const Eigen::VectorXd& x) const override {
    const double v = a->eval(x);
    return op == '-' ? -v : std::abs(v);
  }
};

struct Binary : Node {
  char op;
  NodePtr a, b;
  Binary(char op, NodePtr a, NodePtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
  double eval(const Eigen::VectorXd& x) const override {
    const double u = a->eval(x), v = b->eval(x);
    switch (op) {
      case '+': return u + v;
      case '-': return u - v;
      case '*': return u * v;
      case '/': return u / v;
      default: return std::pow(u, v);
    }
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    require(pos_ == s_.size(), ErrorKind::invalid_input, "expression: unexpected '" + s_.substr(pos_) + "'");
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::invalid_input, "expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }

  NodePtr expr() {
    NodePtr a = term();
    while (true) {
      if (accept("+")) a = std::make_shared<Binary>('+', a, term());
      else if (accept("-")) a = std::make_shared<Binary>('-', a, term());
      else return a;
    }
  }
  NodePtr term() {
    NodePtr a = unary();
    while (true) {
      if (accept("*")) a = std::make_shared<Binary>('*', a, unary());
      else if (accept("/")) a = std::make_shared<Binary>('/', a, unary());
      else return a;
    }
  }
  NodePtr unary() {
    if (accept("-")) return std::make_shared<Unary>('-', unary());
    if (accept("+")) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept("^")) return std::make_shared<Binary>('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (accept("(")) {
      NodePtr e = expr();
      if (!accept(")")) fail("expected ')'");
      return e;
    }
    if (accept("|x|")) return std::make_shared<Norm>();
    if (accept("abs(")) {
      NodePtr e = expr();
      if (!accept(")")) fail("expected ')'");
      return std::make_shared<Unary>('a', e);
    }
    if (pos_ < s_.size() && s_[pos_] == 'x') {
      ++pos_;
      std::size_t end = pos_;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      const int axis = end == pos_ ? 1 : parse_int(s_.substr(pos_, end - pos_));
      if (axis < 1 || axis > 3) fail("coordinate index out of range");
      pos_ = end;
      return std::make_shared<Coordinate>(axis - 1);
    }
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               ((s_[end] == 'e' || s_[end] == 'E') && end > pos_) ||
                               ((s_[end] == '-' || s_[end] == '+') && end > pos_ && (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
      ++end;
    if (end == pos_) fail("expected a number, coordinate, |x| or abs(...)");
    const double v = parse_double(s_.substr(pos_, end - pos_));
    pos_ = end;
    return std::make_shared<Constant>(v);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarField parse_expression(const std::string& text) {
  NodePtr root = Parser(text).parse();
  return [root](const Eigen::VectorXd& x) { return root->eval(x); };
}

}  // namespace nelliptic
