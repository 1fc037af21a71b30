#include "bandx/isp/pdp.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/compliance.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/payments/instruments.hpp"

namespace bandx::isp {

Pdp::Pdp(PublicKeyId isp_key, std::vector<PublicKeyId> trusted_guarantors)
    : isp_key_(std::move(isp_key)), payment_policy_(payments::make_merchant_policy(isp_key_, trusted_guarantors)) {
  activation_policy_.local_constants.emplace_back("ISP_KEY", isp_key_.str());
  activation_policy_.licensees = credential::PrincipalExpr::of(isp_key_);
}

bool Pdp::verify_payment(const Credential& guarantor, const Credential& offer, const Credential& check,
                         const ActionAttributeSet& action) const {
  ++decisions_;
  try {
    return payments::verify_payment(payment_policy_, guarantor, offer, check, action);
  } catch (const Error&) {
    return false;
  }
}

bool Pdp::verify_signed_message(const PublicKeyId& signer, const std::string& signature,
                                const std::string& bytes) const {
  ++decisions_;
  try {
    return credential::verify_message(signer, signature, bytes);
  } catch (const Error&) {
    return false;
  }
}

bool Pdp::verify_credential(const Credential& cred) const {
  ++decisions_;
  try {
    return !cred.authorizer.is_policy() && credential::verify_signature(cred);
  } catch (const Error&) {
    return false;
  }
}

bool Pdp::authorize_activation(const Credential& reservation_cred, const PublicKeyId& customer,
                               const ActionAttributeSet& action) const {
  ++decisions_;
  const Credential policy[] = {activation_policy_};
  const Credential creds[] = {reservation_cred};
  const PublicKeyId requesters[] = {customer};
  try {
    return credential::check_compliance(policy, creds, requesters, action);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace bandx::isp
