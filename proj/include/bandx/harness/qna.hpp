#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bandx/common/crypto.hpp"
#include "bandx/harness/transport.hpp"
#include "bandx/isp/protocol.hpp"
#include "bandx/isp/topology.hpp"
#include "bandx/market/path.hpp"
#include "bandx/payments/instruments.hpp"

namespace bandx::harness {

// One ISP's part of an end-to-end purchase.
struct Leg {
  std::string isp;
  std::string ne;
  std::string reservation_id;
  std::vector<market::PlanStep> steps;  // this ISP's run of the plan
  std::optional<credential::Credential> reservation_credential;
  isp::ReservationState state = isp::ReservationState::Notional;
};

struct PurchaseHandle {
  std::vector<Leg> legs;
  Money total;
};

// Handle files written by `bandx buy` / `bandx book`, in payload layout.
std::string encode_handle(const PurchaseHandle& h);
PurchaseHandle decode_handle(std::string_view text);

// Every check the agent wrote, next to the price it was asked to pay.
struct CheckLogEntry {
  std::string nonce;
  Money amount;
  Money prorated_price;
};

// Customer-side negotiation agent.
class QnaSession {
 public:
  QnaSession(std::string name, credential::SigningKey key, credential::Credential guarantor,
             std::unique_ptr<crypto::RandomSource> rng, Client& client, const isp::Topology& topology,
             std::map<std::string, std::string> isp_by_key);

  const std::string& name() const { return name_; }
  const credential::SigningKey& key() const { return book_.payer(); }

  // Throws NoPath, PaymentRefused, CapacityExhausted, ... from the first ISP,
  // or PartialEstablishment after releasing the legs already established.
  PurchaseHandle purchase_spot(const market::OfferQuery& q, std::int64_t duration_seconds, SimTime now);
  PurchaseHandle purchase_future(const market::OfferQuery& q, const isp::Interval& interval, SimTime now);
  void activate(PurchaseHandle& h, SimTime now);
  void keepalive(PurchaseHandle& h, SimTime now);
  void teardown(PurchaseHandle& h);

  const std::vector<CheckLogEntry>& check_log() const { return log_; }

 private:
  PurchaseHandle purchase(const market::OfferQuery& q, isp::RequestKind kind, std::int64_t duration,
                          const isp::Interval& interval, SimTime now);
  std::vector<credential::Credential> pay(const std::vector<market::PlanStep>& steps, SimTime now);
  std::string sender() const { return "qna:" + name_; }
  std::string isp_of(const market::Offer& o) const;

  std::string name_;
  payments::Checkbook book_;
  credential::Credential guarantor_;
  std::unique_ptr<crypto::RandomSource> rng_;
  Client& client_;
  const isp::Topology& topology_;
  std::map<std::string, std::string> isp_by_key_;
  std::vector<CheckLogEntry> log_;
};

}  // namespace bandx::harness
