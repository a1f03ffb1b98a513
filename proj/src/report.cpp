#include "nelliptic/report.hpp"

namespace nelliptic {

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Json to_json(const SymMatrixd& m) { return to_json(Eigen::MatrixXd(m.dense())); }

Json to_json(const Polynomial& p) {
  Json terms = Json::array();
  const auto& idx = p.indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (p.coeffs()[i] != 0.0) terms.push_back({{"sigma", idx[i]}, {"a", p.coeffs()[i]}});
  return {{"dim", p.dim()}, {"degree", p.degree()}, {"terms", terms}};
}

Polynomial polynomial_from_json(const Json& j) {
  try {
    Polynomial p(j.at("dim").get<int>(), j.at("degree").get<int>());
    for (const auto& t : j.at("terms")) p.set_coefficient(t.at("sigma").get<MultiIndex>(), t.at("a").get<double>());
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("polynomial json: ") + e.what());
  }
}

Json to_json(const StructureConstants& c) {
  Json modulus = Json::array();
  for (const auto& [r, w] : c.modulus_samples) modulus.push_back({r, w});
  return {{"rho", c.rho},
          {"lambda_hat", c.lambda_hat},
          {"Lambda_hat", c.Lambda_hat},
          {"b0_hat", c.b0_hat},
          {"c0_hat", c.c0_hat},
          {"modulus", modulus},
          {"violations", c.violations},
          {"pairs_tested", c.pairs_tested},
          {"samples_used", c.samples_used},
          {"samples_rejected", c.samples_rejected},
          {"certify_margin", c.certify_margin}};
}

Json to_json(const MinimaxFit& fit) {
  Json out{{"P", to_json(fit.P)}, {"error", fit.error}, {"active_points", fit.active_points}};
  out["constrained"] = fit.constrained;
  if (fit.constrained) out["t_correction"] = fit.t_correction;
  return out;
}

Json to_json(const RegularityReport& r) {
  Json scales = Json::array();
  for (const auto& s : r.scales)
    scales.push_back({{"m", s.m},
                      {"r", s.r},
                      {"E", s.error},
                      {"P", to_json(s.P)},
                      {"step_norm", s.step_norm},
                      {"inherited", s.inherited},
                      {"samples", s.samples},
                      {"usable", s.usable},
                      {"within_norm_bound", s.within_norm_bound}});
  Json out{{"x0", to_json(r.x0)}, {"k", r.k}, {"eta", r.eta}, {"r0", r.r0}, {"noise_floor", r.noise_floor},
           {"scales", scales}};
  if (r.estimate)
    out["estimate"] = {{"alpha_hat", r.estimate->alpha},
                       {"C_hat", r.estimate->C},
                       {"clamped", r.estimate->clamped},
                       {"scales", r.estimate->scales}};
  else
    out["estimate"] = nullptr;
  out["classification"] = to_string(r.classification);
  return out;
}

Json to_json(const ViscosityReport& r) {
  Json counts = Json::object();
  for (Side side : {Side::sub, Side::super}) {
    Json c = Json::object();
    for (Verdict v : {Verdict::pass, Verdict::fail, Verdict::vacuous, Verdict::not_tested})
      c[to_string(v)] = r.count(side, v);
    counts[to_string(side)] = c;
  }
  Json witnesses = Json::array();
  for (const auto& w : r.witnesses)
    witnesses.push_back({{"node", w.node},
                         {"x", to_json(w.x)},
                         {"side", to_string(w.side)},
                         {"p", to_json(w.p)},
                         {"M", to_json(w.M)},
                         {"F", w.F},
                         {"f", w.f}});
  return {{"nodes", r.points.size()}, {"counts", counts}, {"witnesses", witnesses}};
}

Json to_json(const AbpReport& r) {
  return {{"sup_uminus", r.sup_uminus},     {"contact_Ln_norm_fplus", r.contact_Ln_norm_fplus},
          {"ratio", r.ratio},               {"contact_nodes", r.contact_nodes},
          {"domain_nodes", r.domain_nodes}, {"lambda", r.lambda},
          {"Lambda", r.Lambda},             {"b0", r.b0}};
}

Json to_json(const SectionNormalization& s) {
  Json vertices = Json::array();
  for (const auto& v : s.vertices) vertices.push_back(to_json(v));
  return {{"h", s.h},
          {"vertices", vertices},
          {"T", to_json(s.T)},
          {"center", to_json(s.center)},
          {"detT", s.detT},
          {"product", s.product},
          {"outer_radius", s.outer_radius},
          {"inner_radius", s.inner_radius}};
}

Json to_json(const SolveResult& r) {
  return {{"scheme", r.scheme}, {"residual", r.residual}, {"iterations", r.iterations}, {"history", r.history}};
}

Json to_json(const Error& e) { return {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}; }

}  // namespace nelliptic
