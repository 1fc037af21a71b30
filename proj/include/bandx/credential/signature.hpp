#pragma once

#include "bandx/credential/credential.hpp"
#include "bandx/credential/key.hpp"

namespace bandx::credential {

// Attaches a signature over canonical_bytes(cred). Throws KeyMismatch when
// the authorizer is not `key` (this includes POLICY assertions).
Credential sign_credential(Credential cred, const SigningKey& key);

// True iff the signature validates under the authorizer key over
// canonical_bytes. POLICY assertions are locally trusted and return true.
// Throws UnsupportedAlgorithm for unknown signature or key algorithms.
bool verify_signature(const Credential& cred);

// Detached signatures over arbitrary protocol bytes (challenge responses).
std::string sign_message(const SigningKey& key, std::string_view message);
bool verify_message(const PublicKeyId& signer, std::string_view signature, std::string_view message);

}  // namespace bandx::credential
