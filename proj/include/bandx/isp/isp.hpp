#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bandx/common/crypto.hpp"
#include "bandx/isp/capacity.hpp"
#include "bandx/isp/pdp.hpp"
#include "bandx/isp/protocol.hpp"
#include "bandx/isp/topology.hpp"
#include "bandx/market/offer.hpp"
#include "bandx/payments/record.hpp"

namespace bandx::isp {

struct IspConfig {
  std::int64_t challenge_ttl_seconds = kDefaultChallengeTtl;
  // Zero disables metering; otherwise reservations owe a keepalive payment
  // every period.
  std::int64_t keepalive_period_seconds = 0;
  std::vector<PublicKeyId> trusted_guarantors;
};

struct NetworkElement {
  struct Port {
    std::string to;
    IntervalLedger ledger;
  };

  std::string id;
  std::string location;
  std::map<std::string, Port> links;  // by link name
  std::map<std::string, Challenge> challenges;
  std::set<std::string> redeemed;
  std::set<std::string> active;  // reservation ids installed here
  std::uint64_t next_seq = 1;
};

// Spot handling outcome: this ISP's reservation, plus a referral when the
// plan continues past its run.
struct SpotOutcome {
  Reservation reservation;
  std::optional<BoundaryReferral> referral;
};

struct BookingOutcome {
  Credential reservation_credential;
  std::string reservation_id;
  std::optional<BoundaryReferral> referral;
};

// One provider: its network elements, decision point, booking database and
// deposit queue. Calls are serialized by the caller.
class Isp {
 public:
  Isp(std::string name, credential::SigningKey key, Topology topology, IspConfig config,
      std::unique_ptr<crypto::RandomSource> rng);

  const std::string& name() const { return name_; }
  const PublicKeyId& key_id() const { return key_.id(); }
  const credential::SigningKey& signing_key() const { return key_; }
  const Pdp& pdp() const { return pdp_; }
  const IspConfig& config() const { return config_; }
  // Other providers' keys, for naming the next ISP in a referral.
  void set_directory(std::map<std::string, std::string> key_to_isp) { directory_ = std::move(key_to_isp); }

  Challenge issue_challenge(const std::string& ne_id, SimTime now);
  SpotOutcome handle_spot_request(const std::string& ne_id, const ReservationRequest& req, SimTime now);
  BookingOutcome book_future(const std::string& ne_id, const ReservationRequest& req, SimTime now);
  Reservation activate_reservation(const std::string& ne_id, const Credential& cred, SimTime now);
  SimTime keepalive_payment(const std::string& reservation_id, const std::vector<Credential>& checks, SimTime now);
  std::size_t expire_reservations(SimTime now);
  void teardown(const std::string& reservation_id, const std::string& customer_signature, SimTime now);

  std::vector<payments::TransactionRecord> drain_deposits();
  std::size_t pending_deposits() const { return deposits_.size(); }

  const std::map<std::string, Reservation>& reservations() const { return reservations_; }
  const std::map<std::string, NetworkElement>& elements() const { return nes_; }
  const IntervalLedger* ledger(const std::string& link_name) const;

  // Ledger contents equal the charges implied by the reservation table and
  // no link is ever over capacity. Returns a description of each violation.
  std::vector<std::string> audit() const;

  // Test hook for the atomicity checks; makes admission on this link fail.
  void fail_link_for_testing(const std::string& link_name) { failing_link_ = link_name; }

 private:
  struct Admission;
  Admission admit(NetworkElement& ne, const ReservationRequest& req, SimTime now, const Interval& interval);
  NetworkElement& element(const std::string& ne_id);
  NetworkElement& owner_of(const std::string& link_name);
  std::vector<Segment> route(const market::Offer& offer) const;
  void propagate_path(Reservation& res);
  void release(Reservation& res);
  Credential make_reservation_credential(const Reservation& res, const std::vector<std::string>& links) const;

  std::string name_;
  credential::SigningKey key_;
  Topology topology_;
  std::map<std::string, std::string> directory_;  // key -> isp name
  IspConfig config_;
  std::unique_ptr<crypto::RandomSource> rng_;
  Pdp pdp_;
  std::map<std::string, NetworkElement> nes_;
  std::map<std::string, Reservation> reservations_;
  std::set<std::pair<std::string, std::string>> presented_checks_;  // (payer, nonce)
  std::deque<payments::TransactionRecord> deposits_;
  std::string failing_link_;
};

}  // namespace bandx::isp
