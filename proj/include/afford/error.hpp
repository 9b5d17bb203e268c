#pragma once

#include <stdexcept>
#include <string>

namespace afford {

enum class ErrorCode {
  format_error,         // file did not parse under the named format
  invalid_input,        // preconditions on caller data violated
  degenerate_geometry,  // geometry too degenerate to process
  numeric_blowup,       // NaN/inf appeared in simulation state
  no_stable_pose,       // every drop failed to settle
  provider_unavailable, // remote transport failed after retries
  malformed_output,     // provider output failed schema validation after retries
  fixture_miss,         // replay provider has no fixture for the request
  empty_profile,        // every motion plan was dropped during resolution
  unknown_body,         // body id not present in the world
  io_error,             // filesystem failure
  config_error,         // bad configuration value or unknown key
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::format_error: return "format_error";
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::numeric_blowup: return "numeric_blowup";
    case ErrorCode::no_stable_pose: return "no_stable_pose";
    case ErrorCode::provider_unavailable: return "provider_unavailable";
    case ErrorCode::malformed_output: return "malformed_output";
    case ErrorCode::fixture_miss: return "fixture_miss";
    case ErrorCode::empty_profile: return "empty_profile";
    case ErrorCode::unknown_body: return "unknown_body";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::config_error: return "config_error";
  }
  return "unknown";
}

class AffordError : public std::runtime_error {
 public:
  AffordError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace afford
