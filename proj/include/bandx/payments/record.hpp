#pragma once

#include <string>
#include <string_view>

#include "bandx/common/time.hpp"
#include "bandx/credential/credential.hpp"

namespace bandx::payments {

// Everything needed to re-run a payment check later, with nothing else.
struct TransactionRecord {
  credential::Credential offer;
  credential::Credential microcheck;
  credential::Credential guarantor;
  credential::ActionAttributeSet action;
  credential::PublicKeyId merchant_key;
  Date received_at;
};

// Byte-exact text form (docs/formats.md). Throws BadRequest for action
// values containing newlines.
std::string serialize_record(const TransactionRecord& r);
// Throws BadRequest on malformed input; credentials are parsed checked.
TransactionRecord parse_record(std::string_view text);

// First 32 hex digits of SHA-256 over serialize_record.
std::string record_id(const TransactionRecord& r);

}  // namespace bandx::payments
