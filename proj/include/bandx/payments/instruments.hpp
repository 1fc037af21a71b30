#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bandx/common/crypto.hpp"
#include "bandx/common/money.hpp"
#include "bandx/common/time.hpp"
#include "bandx/credential/credential.hpp"
#include "bandx/market/offer.hpp"

namespace bandx::payments {

using credential::Credential;
using credential::PublicKeyId;
using credential::SigningKey;

inline constexpr std::size_t kMinNonceHex = 12;

struct GuarantorView {
  PublicKeyId guarantor_key;
  PublicKeyId payer_key;
  Money per_check_limit;
  Date expiry;  // exclusive
};

struct MicrocheckView {
  PublicKeyId payer_key;
  PublicKeyId merchant_key;
  Money amount;
  std::string nonce;
  Date date;
};

// Conditions: app_domain, currency, `&amount < limit+0.01`, `date < expiry`.
Credential issue_guarantor_credential(const SigningKey& guarantor, const PublicKeyId& payer, const Money& limit,
                                      const Date& expiry);

// Pins app_domain, currency, amount, nonce and date. No reuse guard; see Checkbook.
Credential make_microcheck(const SigningKey& payer, const PublicKeyId& merchant, const Money& amount,
                           const std::string& nonce, const Date& date);

// Both throw BadRequest when the credential does not have the expected shape.
GuarantorView view_guarantor(const Credential& cred);
MicrocheckView view_microcheck(const Credential& cred);

// A payer's check writer. Remembers every nonce it has used.
class Checkbook {
 public:
  explicit Checkbook(SigningKey payer) : payer_(std::move(payer)) {}

  const SigningKey& payer() const { return payer_; }

  // Throws StaleNonce on reuse and BadRequest for a nonce shorter than 12 hex digits.
  Credential write(const PublicKeyId& merchant, const Money& amount, const std::string& nonce, const Date& date);
  std::string fresh_nonce(crypto::RandomSource& rng) const;

 private:
  SigningKey payer_;
  std::set<std::string> used_;
};

// POLICY licensing `(G1 || G2 ...) && MERCHANT` for the trusted guarantors.
Credential make_merchant_policy(const PublicKeyId& merchant, const std::vector<PublicKeyId>& guarantors);

// Attributes a merchant checks a payment against. `full_amount` restates the
// paid amount at the offer's full bandwidth, floor(amount * offer / purchased).
credential::ActionAttributeSet payment_action(const market::Offer& offer, std::int64_t purchased_mbps,
                                              const Money& amount, const std::string& nonce, const Date& date);

// check_compliance(policy, {guarantor, offer, check}, {}, action). Propagates
// UnverifiedCredential.
bool verify_payment(const Credential& merchant_policy, const Credential& guarantor, const Credential& offer,
                    const Credential& check, const credential::ActionAttributeSet& action);

}  // namespace bandx::payments
