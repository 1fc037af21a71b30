#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandx/common/money.hpp"
#include "bandx/common/time.hpp"
#include "bandx/credential/credential.hpp"
#include "bandx/credential/key.hpp"

namespace bandx::market {

enum class QosClass { Reserved, PremiumBestEffort };
std::string_view to_string(QosClass q);
std::optional<QosClass> qos_from_string(std::string_view s);

struct Link {
  std::string from;
  std::string to;

  std::string name() const { return from + "-" + to; }
  // "Dublin-NYC" -> {Dublin, NYC}; splits on the last hyphen.
  static std::optional<Link> from_name(std::string_view name);
  bool operator==(const Link&) const = default;
};

// A marketable link segment. Every structured field is derived from the
// credential's conditions; the credential is the single source of truth.
struct Offer {
  std::string offer_id;
  credential::PublicKeyId isp_key;
  Link link;
  std::int64_t bandwidth_mbps = 0;
  Money min_price;
  Date valid_until;  // last day on which `date < expiry` holds
  bool unbundling_allowed = false;
  QosClass qos_class = QosClass::Reserved;
  std::vector<std::string> path_hint;
  credential::Credential credential;
};

// Inputs for an ISP writing a new offer credential.
struct OfferTerms {
  Link link;
  std::int64_t bandwidth_mbps = 0;
  Money min_price;
  Date expires;  // exclusive: offer usable while date < expires
  bool unbundling_allowed = true;
  QosClass qos_class = QosClass::Reserved;
  std::vector<std::string> path_hint;
};

// Content hash of the signed credential.
std::string offer_id_of(const credential::Credential& cred);

// Structured view; throws MalformedOffer when a required attribute
// (link_name, bandwidth, amount, date bound, currency) is missing or bad.
// Does not check the signature.
Offer derive_offer(const credential::Credential& cred);

// Conditions: app_domain, currency, bandwidth (<= when un-bundling is
// allowed, == otherwise), link_name, full_amount price floor, date bound and
// the optional qos_class / path pins.
credential::Credential make_offer_credential(const OfferTerms& terms, const credential::SigningKey& isp);

}  // namespace bandx::market
