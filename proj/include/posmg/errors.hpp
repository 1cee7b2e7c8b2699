#pragma once

#include <stdexcept>
#include <string>

namespace posmg {

// Failure categories surfaced to callers. The CLI maps `parse` to exit
// code 2 and everything else to exit code 1.
enum class Errc {
  label,                   // unknown state/action label
  distribution,            // malformed probability vector
  impossible_observation,  // filter denominator is zero
  policy_coverage,         // policy table missing a reachable state
  resource,                // reachable-set or enumeration cap exceeded
  parse,                   // unreadable or malformed input file
  internal,
};

class PosmgError : public std::runtime_error {
 public:
  PosmgError(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const { return code_; }

  static const char* code_name(Errc c) {
    switch (c) {
      case Errc::label: return "label";
      case Errc::distribution: return "distribution";
      case Errc::impossible_observation: return "impossible-observation";
      case Errc::policy_coverage: return "policy-coverage";
      case Errc::resource: return "resource";
      case Errc::parse: return "parse";
      case Errc::internal: return "internal";
    }
    return "unknown";
  }

 private:
  Errc code_;
};

}  // namespace posmg
