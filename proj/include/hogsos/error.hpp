#pragma once

#include <stdexcept>
#include <string>

namespace hogsos {

enum class errc {
  arity_mismatch,
  sort_mismatch,
  ill_typed,
  parse_error,
  no_rule_applies,
  rule_table_invalid,
  flatness_violation,
  probe_set_empty,
  stage_too_large,
  env_length_mismatch,
  malformed_distribution,
  uninhabited_at_size,
  unbound_metavariable,
  universe_explosion,
  fuel_exhausted,
  config_error,
  unsupported,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::arity_mismatch: return "ArityMismatch";
    case errc::sort_mismatch: return "SortMismatch";
    case errc::ill_typed: return "IllTyped";
    case errc::parse_error: return "ParseError";
    case errc::no_rule_applies: return "NoRuleApplies";
    case errc::rule_table_invalid: return "RuleTableInvalid";
    case errc::flatness_violation: return "FlatnessViolation";
    case errc::probe_set_empty: return "ProbeSetEmpty";
    case errc::stage_too_large: return "StageTooLarge";
    case errc::env_length_mismatch: return "EnvLengthMismatch";
    case errc::malformed_distribution: return "MalformedDistribution";
    case errc::uninhabited_at_size: return "UninhabitedAtSize";
    case errc::unbound_metavariable: return "UnboundMetavariable";
    case errc::universe_explosion: return "UniverseExplosion";
    case errc::fuel_exhausted: return "FuelExhausted";
    case errc::config_error: return "ConfigError";
    case errc::unsupported: return "Unsupported";
  }
  return "Error";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

}  // namespace hogsos
