#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include "nelliptic/error.hpp"
#include "nelliptic/geometry.hpp"
#include "nelliptic/minimax.hpp"
#include "nelliptic/polynomial.hpp"
#include "nelliptic/probe.hpp"
#include "nelliptic/regularity.hpp"
#include "nelliptic/solver.hpp"

namespace nelliptic {

using Json = nlohmann::ordered_json;

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const SymMatrixd& m);
/// {dim, degree, terms: [{sigma, a}]} with a = D^sigma P(0); zero terms omitted.
Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j);

Json to_json(const StructureConstants& c);
Json to_json(const MinimaxFit& fit);
Json to_json(const RegularityReport& r);
Json to_json(const ViscosityReport& r);
Json to_json(const AbpReport& r);
Json to_json(const SectionNormalization& s);
/// Everything but the grid values.
Json to_json(const SolveResult& r);
Json to_json(const Error& e);

}  // namespace nelliptic
