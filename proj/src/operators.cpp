#include "nelliptic/operators.hpp"

#include <cmath>
#include <sstream>

#include "nelliptic/text.hpp"

namespace nelliptic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string matrix_text(const SymMatrixd& a) {
  std::ostringstream os;
  for (int i = 0; i < a.dim(); ++i) {
    if (i) os << ';';
    for (int j = 0; j < a.dim(); ++j) os << (j ? "," : "") << format_double(a(i, j));
  }
  return os.str();
}

SymMatrixd parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto vals = parse_double_list(rows[i]);
    require(static_cast<int>(vals.size()) == n, ErrorKind::invalid_input, "linear: matrix must be square");
    for (int j = 0; j < n; ++j) m(i, j) = vals[j];
  }
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()),
          ErrorKind::invalid_input, "linear: matrix must be symmetric");
  return SymMatrixd::from_dense(m);
}

double hessian_quotient(const Eigen::VectorXd& ev, int k, int l, double scale) {
  const double sl = elementary_symmetric(ev, l);
  require(std::abs(sl) > 1e-14 * std::pow(std::max(1.0, scale), l), ErrorKind::singular_evaluation,
          "quotient: sigma_l vanishes at the jet");
  return elementary_symmetric(ev, k) / sl;
}

}  // namespace

std::string OperatorSpec::to_string() const {
  require(!shift, ErrorKind::invalid_input, "shifted operator specs have no text form");
  return std::visit(
      overloaded{
          [](const family::PucciPlus& f) { return "pucci+:" + format_double(f.lambda) + ":" + format_double(f.Lambda); },
          [](const family::PucciMinus& f) { return "pucci-:" + format_double(f.lambda) + ":" + format_double(f.Lambda); },
          [](const family::LinearConstant& f) {
            std::string s = "linear:" + matrix_text(f.A);
            const bool has_b = f.b.size() > 0 && !f.b.isZero(0.0);
            if (has_b || f.c != 0.0) {
              s += ":";
              for (Eigen::Index i = 0; i < f.A.dim(); ++i)
                s += (i ? "," : "") + format_double(f.b.size() ? f.b[i] : 0.0);
            }
            if (f.c != 0.0) s += ":" + format_double(f.c);
            return s;
          },
          [](const family::MeanCurvature&) { return std::string("mc"); },
          [](const family::MongeAmpere&) { return std::string("ma"); },
          [](const family::SigmaK& f) { return "sigma:" + std::to_string(f.k); },
          [](const family::HessianQuotient& f) {
            return "quotient:" + std::to_string(f.k) + ":" + std::to_string(f.l);
          },
          [](const family::Lagrangian&) { return std::string("slag"); },
      },
      family);
}

OperatorSpec OperatorSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& head = parts[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    require(parts.size() >= lo && parts.size() <= hi, ErrorKind::invalid_input,
            "operator spec '" + text + "': wrong number of fields");
  };
  OperatorSpec op;
  if (head == "pucci+" || head == "pucci-") {
    need(3, 3);
    const double l = parse_double(parts[1]), L = parse_double(parts[2]);
    check_pucci_parameters(l, L);
    if (head == "pucci+") op.family = family::PucciPlus{l, L};
    else op.family = family::PucciMinus{l, L};
  } else if (head == "linear") {
    need(2, 4);
    family::LinearConstant f;
    f.A = parse_matrix(parts[1]);
    f.b = Eigen::VectorXd::Zero(f.A.dim());
    if (parts.size() >= 3) {
      const auto b = parse_double_list(parts[2]);
      require(static_cast<int>(b.size()) == f.A.dim(), ErrorKind::invalid_input, "linear: b has wrong length");
      for (int i = 0; i < f.A.dim(); ++i) f.b[i] = b[i];
    }
    if (parts.size() == 4) f.c = parse_double(parts[3]);
    op.family = f;
  } else if (head == "mc") {
    need(1, 1);
    op.family = family::MeanCurvature{};
  } else if (head == "ma") {
    need(1, 1);
    op.family = family::MongeAmpere{};
  } else if (head == "sigma") {
    need(2, 2);
    const int k = parse_int(parts[1]);
    require(k >= 1, ErrorKind::parameter, "sigma: need k >= 1");
    op.family = family::SigmaK{k};
  } else if (head == "quotient") {
    need(3, 3);
    const int k = parse_int(parts[1]), l = parse_int(parts[2]);
    require(l >= 1 && l < k, ErrorKind::parameter, "quotient: need 1 <= l < k");
    op.family = family::HessianQuotient{k, l};
  } else if (head == "slag") {
    need(1, 1);
    op.family = family::Lagrangian{};
  } else {
    throw Error(ErrorKind::invalid_input, "unknown operator family '" + head + "'");
  }
  return op;
}

bool OperatorSpec::depends_on_gradient() const {
  if (const auto* lin = std::get_if<family::LinearConstant>(&family)) return lin->b.size() && !lin->b.isZero(0.0);
  return std::holds_alternative<family::MeanCurvature>(family);
}

bool OperatorSpec::depends_on_value() const {
  if (const auto* lin = std::get_if<family::LinearConstant>(&family)) return lin->c != 0.0;
  return false;
}

std::optional<int> OperatorSpec::fixed_dim() const {
  if (const auto* lin = std::get_if<family::LinearConstant>(&family)) return lin->A.dim();
  return std::nullopt;
}

void validate(const OperatorSpec& op, int n) {
  require(n >= 1, ErrorKind::invalid_input, "operator: dimension must be >= 1");
  std::visit(overloaded{
                 [](const family::PucciPlus& f) { check_pucci_parameters(f.lambda, f.Lambda); },
                 [](const family::PucciMinus& f) { check_pucci_parameters(f.lambda, f.Lambda); },
                 [n](const family::LinearConstant& f) {
                   require(f.A.dim() == n && f.b.size() == n, ErrorKind::invalid_input,
                           "linear: coefficient dimension mismatch");
                 },
                 [](const family::MeanCurvature&) {},
                 [](const family::MongeAmpere&) {},
                 [n](const family::SigmaK& f) {
                   require(f.k >= 1 && f.k <= n, ErrorKind::parameter, "sigma_k: need 1 <= k <= n");
                 },
                 [n](const family::HessianQuotient& f) {
                   require(f.l >= 1 && f.l < f.k && f.k <= n, ErrorKind::parameter,
                           "quotient: need 1 <= l < k <= n");
                 },
                 [](const family::Lagrangian&) {},
             },
             op.family);
  if (op.shift) {
    require(op.shift->dim() == n, ErrorKind::invalid_input, "shift polynomial dimension mismatch");
    require(op.shift->effective_degree() <= 2, ErrorKind::parameter, "shift polynomial degree must be <= 2");
  }
}

Jet shifted_jet(const OperatorSpec& op, const Jet& jet) {
  if (!op.shift) return jet;
  const Polynomial& P = *op.shift;
  Jet out = jet;
  out.M += P.hessian(jet.x);
  out.p += P.gradient(jet.x);
  out.s += P(jet.x);
  return out;
}

namespace {

double evaluate_family(const Family& fam, const Jet& j) {
  const int n = j.dim();
  require(j.p.size() == n && j.x.size() == n, ErrorKind::invalid_input, "evaluate: jet dimension mismatch");
  return std::visit(
      overloaded{
          [&](const family::PucciPlus& f) { return pucci(j.M, f.lambda, f.Lambda, PucciSign::plus); },
          [&](const family::PucciMinus& f) { return pucci(j.M, f.lambda, f.Lambda, PucciSign::minus); },
          [&](const family::LinearConstant& f) {
            require(f.A.dim() == n && f.b.size() == n, ErrorKind::invalid_input, "linear: dimension mismatch");
            return (f.A.dense().cwiseProduct(j.M.dense())).sum() + f.b.dot(j.p) + f.c * j.s;
          },
          [&](const family::MeanCurvature&) {
            const double w2 = 1.0 + j.p.squaredNorm();
            const Eigen::MatrixXd m = j.M.dense();
            return (m.trace() - j.p.dot(m * j.p) / w2) / std::sqrt(w2);
          },
          [&](const family::MongeAmpere&) { return j.M.dense().determinant(); },
          [&](const family::SigmaK& f) {
            require(f.k >= 1 && f.k <= n, ErrorKind::parameter, "sigma_k: need 1 <= k <= n");
            return elementary_symmetric(eigenvalues_sym(j.M), f.k);
          },
          [&](const family::HessianQuotient& f) {
            require(f.l >= 1 && f.l < f.k && f.k <= n, ErrorKind::parameter, "quotient: need 1 <= l < k <= n");
            const Eigen::VectorXd ev = eigenvalues_sym(j.M);
            return hessian_quotient(ev, f.k, f.l, ev.cwiseAbs().maxCoeff());
          },
          [&](const family::Lagrangian&) {
            const Eigen::VectorXd ev = eigenvalues_sym(j.M);
            double s = 0.0;
            for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::atan(ev[i]);
            return s;
          },
      },
      fam);
}

}  // namespace

double evaluate(const OperatorSpec& op, const Jet& jet) {
  return evaluate_family(op.family, shifted_jet(op, jet)) - op.offset;
}

bool admissible(const OperatorSpec& op, const Jet& jet) {
  const Jet j = shifted_jet(op, jet);
  return std::visit(overloaded{
                        [&](const family::MongeAmpere&) { return eigenvalues_sym(j.M)[0] >= 0.0; },
                        [&](const family::SigmaK& f) { return in_garding_cone(eigenvalues_sym(j.M), f.k); },
                        [&](const family::HessianQuotient& f) {
                          return in_garding_cone(eigenvalues_sym(j.M), f.k);
                        },
                        [](const auto&) { return true; },
                    },
                    op.family);
}

OperatorSpec shift(const OperatorSpec& op, const Polynomial& p, bool normalize_origin) {
  require(p.effective_degree() <= 2, ErrorKind::parameter, "shift: polynomial degree must be <= 2");
  const int n = p.dim();
  const Polynomial p2 = p.degree() <= 2 ? p.raised_to(2) : [&] {
    Polynomial q(n, 2);
    const auto& idx = q.indices();
    for (std::size_t t = 0; t < idx.size(); ++t) q.coeffs()[static_cast<Eigen::Index>(t)] = p.coefficient(idx[t]);
    return q;
  }();
  OperatorSpec out = op;
  out.shift = op.shift ? *op.shift + p2 : p2;
  if (normalize_origin) out.offset = evaluate_family(op.family, shifted_jet(out, Jet::zero(n)));
  return out;
}

}  // namespace nelliptic
