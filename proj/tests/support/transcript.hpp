#pragma once
// Reads transcripts back into envelopes and checks what the customer agent paid.

#include <map>
#include <string>
#include <vector>

#include "bandx/common/error.hpp"
#include "bandx/harness/codec.hpp"
#include "bandx/harness/envelope.hpp"
#include "bandx/market/offer.hpp"
#include "bandx/payments/instruments.hpp"

namespace transcript {

using namespace bandx;
using namespace bandx::harness;

struct Entry {
  bool request = true;
  std::string role;
  Envelope envelope;
};

inline std::vector<Entry> parse(std::string_view text) {
  std::vector<Entry> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    if (nl == std::string_view::npos || nl < 3 || (text[0] != '>' && text[0] != '<') || text[1] != ' ')
      throw Error(ErrorCode::ProtocolError, "bad transcript direction line");
    Entry e;
    e.request = text[0] == '>';
    e.role = std::string(text.substr(2, nl - 2));
    text.remove_prefix(nl + 1);
    auto decoded = decode_prefix(text);
    if (!decoded) throw Error(ErrorCode::ProtocolError, "truncated transcript");
    e.envelope = decoded->first;
    text.remove_prefix(decoded->second);
    out.push_back(std::move(e));
  }
  return out;
}

// ceil(min_price * b / B) by long division, kept apart from the library's own.
inline std::int64_t fair_price(std::int64_t min_minor, std::int64_t bought, std::int64_t offered) {
  std::int64_t num = min_minor * bought;
  return num / offered + (num % offered != 0 ? 1 : 0);
}

struct Honesty {
  int requests = 0;
  int checks = 0;
  std::vector<std::string> violations;
};

// For every reservation request: what each merchant was paid must not exceed
// the pro-rated price of that merchant's offers in the request.
inline Honesty audit_payments(std::string_view text) {
  Honesty h;
  for (const auto& e : parse(text)) {
    if (!e.request) continue;
    const auto& t = e.envelope.type;
    if (t != "RESERVE-SPOT" && t != "BOOK-FUTURE" && t != "KEEPALIVE") continue;
    std::map<std::string, std::int64_t> owed, paid;
    std::vector<credential::Credential> offers, checks = get_credentials(e.envelope.payload, "check");
    std::int64_t mbps = 0;
    if (t == "KEEPALIVE") continue;  // recurring payments reuse the booked offers; audited in isp tests
    auto req = get_request(e.envelope.payload);
    offers = req.offers;
    mbps = req.bandwidth_mbps;
    ++h.requests;
    for (const auto& o : offers) {
      auto offer = market::derive_offer(o);
      owed[offer.isp_key.str()] += fair_price(offer.min_price.minor, mbps, offer.bandwidth_mbps);
    }
    for (const auto& c : checks) {
      auto v = payments::view_microcheck(c);
      paid[v.merchant_key.str()] += v.amount.minor;
      ++h.checks;
    }
    for (const auto& [merchant, amount] : paid)
      if (amount > owed[merchant])
        h.violations.push_back(t + " seq " + std::to_string(e.envelope.seq) + " pays " + std::to_string(amount) +
                               " against " + std::to_string(owed[merchant]));
  }
  return h;
}

}  // namespace transcript
