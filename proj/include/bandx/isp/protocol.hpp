#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bandx/common/time.hpp"
#include "bandx/credential/credential.hpp"
#include "bandx/isp/capacity.hpp"

namespace bandx::isp {

using credential::Credential;
using credential::PublicKeyId;

inline constexpr std::int64_t kDefaultChallengeTtl = 60;

struct Challenge {
  std::string challenge_id;  // 32 hex digits
  std::string ne_id;
  SimTime issued_at;
  std::int64_t ttl_seconds = kDefaultChallengeTtl;
};

enum class RequestKind { Spot, Future };
std::string_view to_string(RequestKind k);

// Signed answer to a challenge. `offers` is the whole plan in path order;
// `checks` pay for the receiving ISP's contiguous run of offers, one each.
struct ReservationRequest {
  RequestKind kind = RequestKind::Spot;
  std::string challenge_id;
  std::vector<Credential> offers;
  Credential guarantor;
  std::vector<Credential> checks;
  std::int64_t bandwidth_mbps = 0;
  std::int64_t duration_seconds = 0;  // spot
  Interval interval;                  // future
  PublicKeyId customer_key;
  std::string signature;  // base64, by customer_key over signing_bytes
};

// kind, challenge, bandwidth, duration, interval, customer, then every
// enclosed credential's canonical bytes, each length-prefixed.
std::string signing_bytes(const ReservationRequest& req);
void sign_request(ReservationRequest& req, const credential::SigningKey& customer);

std::string teardown_bytes(const std::string& reservation_id);

// Tells the customer where the next ISP's run of offers starts.
struct BoundaryReferral {
  std::string next_isp;
  std::string next_ne;
  std::string location;
  std::size_t next_offer_index = 0;
};

enum class ReservationState { Notional, Active, Expired, Lapsed };
std::string_view to_string(ReservationState s);

struct Segment {
  std::string ne_id;
  std::string link_name;
  bool operator==(const Segment&) const = default;
};

struct Reservation {
  std::string reservation_id;
  std::string isp;
  ReservationState state = ReservationState::Notional;
  std::vector<Segment> segments;
  std::int64_t bandwidth_mbps = 0;
  Interval interval;
  PublicKeyId customer_key;
  std::optional<SimTime> next_payment_due;
  bool best_effort = false;  // premium best-effort: admitted without a capacity charge
  bool charged = false;      // holds capacity on every segment
  std::vector<Credential> offers;
  Credential guarantor;
  std::optional<Credential> reservation_credential;
};

}  // namespace bandx::isp
