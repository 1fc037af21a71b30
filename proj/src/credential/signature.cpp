#include "bandx/credential/signature.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::credential {

Credential sign_credential(Credential cred, const SigningKey& key) {
  if (cred.authorizer.is_policy() || !(cred.authorizer.key_id() == key.id()))
    throw Error(ErrorCode::KeyMismatch, "authorizer " + cred.authorizer.str() + " is not signing key " + key.id().str());
  cred.signature = Signature{std::string(kSignatureAlgorithm), sign_message(key, canonical_bytes(cred))};
  cred.source_text.clear();
  return cred;
}

bool verify_signature(const Credential& cred) {
  if (cred.authorizer.is_policy()) return true;
  if (!cred.signature) return false;
  if (cred.signature->algorithm != kSignatureAlgorithm)
    throw Error(ErrorCode::UnsupportedAlgorithm, "signature algorithm " + cred.signature->algorithm);
  return verify_message(cred.authorizer.key_id(), cred.signature->value, canonical_bytes(cred));
}

std::string sign_message(const SigningKey& key, std::string_view message) {
  return crypto::base64_encode(key.sign(message));
}

bool verify_message(const PublicKeyId& signer, std::string_view signature, std::string_view message) {
  if (signer.algorithm() != kKeyAlgorithm) throw Error(ErrorCode::UnsupportedAlgorithm, "key algorithm " + signer.algorithm());
  auto pub = crypto::base64_decode(signer.material());
  auto sig = crypto::base64_decode(signature);
  if (!pub || !sig) return false;
  return crypto::ed25519_verify(*pub, *sig, message);
}

}  // namespace bandx::credential
