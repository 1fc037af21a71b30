#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bandx/credential/credential.hpp"

namespace bandx::credential {

enum class ParseMode {
  Checked,    // key material must be valid base64
  Unchecked,  // shape-only key check; for literal fixtures whose keys are elided
};

// Parses one credential block. Throws Error with SyntaxError (message carries
// "line:col" and the expected token), UnknownVersion or UnresolvedConstant.
Credential parse_credential(std::string_view text, ParseMode mode = ParseMode::Checked);

// Parses blank-line separated credential blocks (the offer export format).
std::vector<Credential> parse_credential_blocks(std::string_view text, ParseMode mode = ParseMode::Checked);

// Header-line text form, including the signature when present. Keys equal to
// a local constant's value are written by constant name.
std::string render_credential(const Credential& cred);
std::string render_credential_blocks(const std::vector<Credential>& creds);

// Deterministic encoding of every field except Signature; this is what
// signatures cover. Layout is documented in docs/formats.md.
std::string canonical_bytes(const Credential& cred);

std::string render_principal_expr(const PrincipalExpr& e);
std::string render_condition_expr(const ConditionExpr& e);
std::string render_conditions(const Conditions& c);
std::string quote(std::string_view s);

}  // namespace bandx::credential
