#pragma once

#include <stdexcept>
#include <string>

namespace rinv {

/// Failure categories shared by the library and the CLI exit-code contract.
enum class Errc {
  domain,           // argument outside the operation's mathematical domain
  config,           // malformed or inconsistent configuration
  out_of_radius,    // target outside the admissible ball
  non_convergence,  // iteration budget exhausted
  oracle_failure,   // an independent reference computation failed
  radius_breach,    // an iterate left the ball of validity
  path_refinement,  // a path segment is too long for the local radius
  inadmissible,     // sampled assumptions do not hold (e.g. divergent Neumann series)
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::config: return "config";
    case Errc::out_of_radius: return "out_of_radius";
    case Errc::non_convergence: return "non_convergence";
    case Errc::oracle_failure: return "oracle_failure";
    case Errc::radius_breach: return "radius_breach";
    case Errc::path_refinement: return "path_refinement";
    case Errc::inadmissible: return "inadmissible";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rinv
