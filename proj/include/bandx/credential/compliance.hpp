#pragma once

#include <span>

#include "bandx/credential/credential.hpp"

namespace bandx::credential {

struct ComplianceOptions {
  // Off only for literal fixtures whose keys cannot be verified.
  bool verify_signatures = true;
};

// Least-fixpoint delegation check. A principal is authorized when it is a
// requester, or when some credential it authored has satisfied conditions
// and a satisfied licensees expression. Returns POLICY's value.
//
// `policy` must contain only POLICY assertions and `creds` none. Throws
// UnverifiedCredential if a credential fails signature verification.
bool check_compliance(std::span<const Credential> policy, std::span<const Credential> creds,
                      std::span<const PublicKeyId> requesters, const ActionAttributeSet& action,
                      ComplianceOptions options = {});

}  // namespace bandx::credential
