#include "bandx/isp/protocol.hpp"

#include "bandx/credential/signature.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::isp {

std::string_view to_string(RequestKind k) { return k == RequestKind::Spot ? "spot" : "future"; }

std::string_view to_string(ReservationState s) {
  switch (s) {
    case ReservationState::Notional: return "notional";
    case ReservationState::Active: return "active";
    case ReservationState::Expired: return "expired";
    case ReservationState::Lapsed: return "lapsed";
  }
  return "?";
}

std::string signing_bytes(const ReservationRequest& req) {
  std::string out = "bandx-reserve\n";
  out += std::string(to_string(req.kind)) + "\n";
  out += req.challenge_id + "\n";
  out += std::to_string(req.bandwidth_mbps) + "\n";
  out += std::to_string(req.duration_seconds) + "\n";
  out += std::to_string(req.interval.start.seconds) + " " + std::to_string(req.interval.end.seconds) + "\n";
  out += req.customer_key.str() + "\n";
  auto add = [&](const Credential& c) {
    std::string b = credential::canonical_bytes(c);
    out += std::to_string(b.size()) + "\n" + b;
  };
  out += "offers " + std::to_string(req.offers.size()) + "\n";
  for (const auto& o : req.offers) add(o);
  add(req.guarantor);
  out += "checks " + std::to_string(req.checks.size()) + "\n";
  for (const auto& c : req.checks) add(c);
  return out;
}

void sign_request(ReservationRequest& req, const credential::SigningKey& customer) {
  req.customer_key = customer.id();
  req.signature = credential::sign_message(customer, signing_bytes(req));
}

std::string teardown_bytes(const std::string& reservation_id) { return "bandx-teardown\n" + reservation_id + "\n"; }

}  // namespace bandx::isp
