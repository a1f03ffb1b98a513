#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nelliptic {

enum class ErrorKind {
  invalid_input,
  parameter,
  singular_evaluation,
  probe_domain,
  rank,
  constraint_infeasible,
  singularity,
  anisotropy,
  admissibility,
  iteration_limit,
  small_data,
  section_escape,
  precondition,
  insufficient_data,
  usage,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::singular_evaluation: return "singular_evaluation";
    case ErrorKind::probe_domain: return "probe_domain";
    case ErrorKind::rank: return "rank";
    case ErrorKind::constraint_infeasible: return "constraint_infeasible";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::anisotropy: return "anisotropy";
    case ErrorKind::admissibility: return "admissibility";
    case ErrorKind::iteration_limit: return "iteration_limit";
    case ErrorKind::small_data: return "small_data";
    case ErrorKind::section_escape: return "section_escape";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace nelliptic
