#include "bandx/common/error.hpp"

#include <array>
#include <utility>

namespace bandx {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 27> kNames{{
    {ErrorCode::SyntaxError, "SyntaxError"},
    {ErrorCode::UnknownVersion, "UnknownVersion"},
    {ErrorCode::UnresolvedConstant, "UnresolvedConstant"},
    {ErrorCode::KeyMismatch, "KeyMismatch"},
    {ErrorCode::UnsupportedAlgorithm, "UnsupportedAlgorithm"},
    {ErrorCode::UnverifiedCredential, "UnverifiedCredential"},
    {ErrorCode::BadSignature, "BadSignature"},
    {ErrorCode::MalformedOffer, "MalformedOffer"},
    {ErrorCode::Expired, "Expired"},
    {ErrorCode::NoPath, "NoPath"},
    {ErrorCode::StaleNonce, "StaleNonce"},
    {ErrorCode::UnknownChallenge, "UnknownChallenge"},
    {ErrorCode::ExpiredChallenge, "ExpiredChallenge"},
    {ErrorCode::ReplayedChallenge, "ReplayedChallenge"},
    {ErrorCode::PaymentRefused, "PaymentRefused"},
    {ErrorCode::CapacityExhausted, "CapacityExhausted"},
    {ErrorCode::UnbundlingProhibited, "UnbundlingProhibited"},
    {ErrorCode::UnknownReservation, "UnknownReservation"},
    {ErrorCode::OutsideInterval, "OutsideInterval"},
    {ErrorCode::BadRequest, "BadRequest"},
    {ErrorCode::PartialEstablishment, "PartialEstablishment"},
    {ErrorCode::ScenarioParseError, "ScenarioParseError"},
    {ErrorCode::AssertionFailed, "AssertionFailed"},
    {ErrorCode::ProtocolError, "ProtocolError"},
    {ErrorCode::BindFailure, "BindFailure"},
    {ErrorCode::ConfigError, "ConfigError"},
    {ErrorCode::IoError, "IoError"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  throw Error(ErrorCode::ProtocolError, "unknown error code '" + std::string(name) + "'");
}

}  // namespace bandx
