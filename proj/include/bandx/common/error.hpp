#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bandx {

enum class ErrorCode {
  SyntaxError,
  UnknownVersion,
  UnresolvedConstant,
  KeyMismatch,
  UnsupportedAlgorithm,
  UnverifiedCredential,
  BadSignature,
  MalformedOffer,
  Expired,
  NoPath,
  StaleNonce,
  UnknownChallenge,
  ExpiredChallenge,
  ReplayedChallenge,
  PaymentRefused,
  CapacityExhausted,
  UnbundlingProhibited,
  UnknownReservation,
  OutsideInterval,
  BadRequest,
  PartialEstablishment,
  ScenarioParseError,
  AssertionFailed,
  ProtocolError,
  BindFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);
// Inverse of to_string; throws ProtocolError for unknown names.
ErrorCode error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace bandx
