#pragma once

#include <stdexcept>
#include <string>

namespace ck {

enum class ErrorCode {
  AlphabetMismatch,
  NotStrictlyPositive,
  DerivativeUnavailable,
  Domain,
  NonConverged,
  UnsupportedPhi,
  Disconnected,
  NoFactorizationFound,
  NotPsd,
  BridgeViolation,
  SizeLimit,
  OverlappingSets,
  ParseError,
  ValidationError,
};

const char* code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ck
