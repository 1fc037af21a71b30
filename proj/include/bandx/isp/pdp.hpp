#pragma once

#include <atomic>
#include <vector>

#include "bandx/credential/credential.hpp"

namespace bandx::isp {

using credential::ActionAttributeSet;
using credential::Credential;
using credential::PublicKeyId;

// Policy decision point for one ISP. Network elements hand it every
// signature and compliance question.
class Pdp {
 public:
  Pdp(PublicKeyId isp_key, std::vector<PublicKeyId> trusted_guarantors);

  const PublicKeyId& isp_key() const { return isp_key_; }
  const Credential& payment_policy() const { return payment_policy_; }

  // False for refused or unverifiable payments.
  bool verify_payment(const Credential& guarantor, const Credential& offer, const Credential& check,
                      const ActionAttributeSet& action) const;
  bool verify_signed_message(const PublicKeyId& signer, const std::string& signature, const std::string& bytes) const;
  bool verify_credential(const Credential& cred) const;
  // POLICY licensing this ISP, with the customer as requester.
  bool authorize_activation(const Credential& reservation_cred, const PublicKeyId& customer,
                            const ActionAttributeSet& action) const;

  std::uint64_t decisions() const { return decisions_; }

 private:
  PublicKeyId isp_key_;
  Credential payment_policy_;
  Credential activation_policy_;
  mutable std::atomic<std::uint64_t> decisions_{0};
};

}  // namespace bandx::isp
