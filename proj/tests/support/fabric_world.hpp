#pragma once
// A two-provider fabric (A: Rome, Milan, Paris; B: Paris, Dublin) with a
// customer, a guarantor and helpers that play the customer's side of the
// challenge/response exchange.

#include <map>
#include <string>
#include <vector>

#include "bandx/common/error.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/isp/fabric.hpp"
#include "bandx/market/path.hpp"
#include "bandx/payments/instruments.hpp"

namespace fabric_world {

using namespace bandx;
using namespace bandx::isp;
using credential::Credential;
using credential::SigningKey;

inline const char* kTopology = R"(# two providers meeting in Paris
isp A
isp B
ne R1 A Rome
ne M1 A Milan
ne PA A Paris
ne PB B Paris
ne D1 B Dublin
link R1 M1 100
link M1 PA 100
link R1 PA 100
link PB D1 100
)";

inline SigningKey isp_key(const std::string& name) { return SigningKey::derive("fabric:" + name); }

struct World {
  SigningKey guarantor = SigningKey::derive("fabric:cg");
  SigningKey rogue = SigningKey::derive("fabric:rogue-cg");
  SigningKey customer = SigningKey::derive("fabric:customer");
  Credential cwc;
  payments::Checkbook book{customer};
  std::unique_ptr<Fabric> fabric;
  SimTime now = start_of(Date::parse("20031119")).plus(9 * 3600);
  std::uint64_t nonce_seq = 0;

  explicit World(std::string topology = kTopology, IspConfig cfg = {}) {
    cfg.trusted_guarantors = {guarantor.id()};
    fabric = std::make_unique<Fabric>(
        parse_topology(topology), [](const std::string& n) { return isp_key(n); },
        [](const std::string& n) { return std::make_unique<crypto::SeededRandom>("fabric-rng:" + n); }, cfg);
    cwc = payments::issue_guarantor_credential(guarantor, customer.id(), Money{100000, "USD"}, Date::parse("20040324"));
  }

  Isp& isp(const std::string& name) { return fabric->isp(name); }

  market::Offer offer(const std::string& isp_name, const std::string& from, const std::string& to, std::int64_t mbps,
                      std::int64_t price, bool unbundle = true,
                      market::QosClass qos = market::QosClass::Reserved, std::vector<std::string> hint = {}) {
    market::OfferTerms t;
    t.link = {from, to};
    t.bandwidth_mbps = mbps;
    t.min_price = Money{price, "USD"};
    t.expires = Date::parse("20040101");
    t.unbundling_allowed = unbundle;
    t.qos_class = qos;
    t.path_hint = std::move(hint);
    return market::derive_offer(market::make_offer_credential(t, isp_key(isp_name)));
  }

  std::string next_nonce() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(++nonce_seq));
    return buf;
  }

  // Checks paying for the run of `plan` that starts at `first` and belongs
  // to the same ISP.
  std::vector<Credential> checks_for(const std::vector<market::Offer>& plan, std::size_t first, std::int64_t mbps,
                                     std::int64_t discount = 0) {
    std::vector<Credential> out;
    for (std::size_t k = first; k < plan.size() && plan[k].isp_key == plan[first].isp_key; ++k) {
      Money price = market::prorated_price(plan[k], mbps);
      price.minor -= discount;
      out.push_back(book.write(plan[k].isp_key, price, next_nonce(), date_of(now)));
    }
    return out;
  }

  ReservationRequest request(RequestKind kind, const std::string& ne, const std::vector<market::Offer>& plan,
                             std::size_t first, std::int64_t mbps, std::int64_t duration = 3600,
                             Interval interval = {}, std::optional<Credential> guarantor_cred = std::nullopt) {
    ReservationRequest r;
    r.kind = kind;
    r.challenge_id = fabric->isp_of_ne(ne).issue_challenge(ne, now).challenge_id;
    for (const auto& o : plan) r.offers.push_back(o.credential);
    r.guarantor = guarantor_cred ? *guarantor_cred : cwc;
    r.checks = checks_for(plan, first, mbps);
    r.bandwidth_mbps = mbps;
    r.duration_seconds = kind == RequestKind::Spot ? duration : 0;
    r.interval = interval;
    sign_request(r, customer);
    return r;
  }
};

// Load on every link recomputed from the reservation tables alone; checks
// it against the ledgers and against capacity.
inline std::vector<std::string> recompute_audit(const Fabric& f) {
  std::vector<std::string> problems;
  for (const auto& link : f.topology().links) {
    const NeSpec* ne = f.topology().find_ne(link.from);
    const Isp& isp = f.isp(ne->isp);
    std::vector<const Reservation*> holding;
    for (const auto& [id, res] : isp.reservations()) {
      bool holds = (res.state == ReservationState::Active ||
                    (res.state == ReservationState::Notional && res.charged)) && !res.best_effort;
      if (!holds) continue;
      for (const auto& s : res.segments)
        if (s.link_name == link.name()) holding.push_back(&res);
    }
    std::vector<SimTime> instants;
    for (const auto* r : holding) instants.push_back(r->interval.start);
    for (SimTime t : instants) {
      std::int64_t load = 0;
      for (const auto* r : holding)
        if (r->interval.start <= t && t < r->interval.end) load += r->bandwidth_mbps;
      if (load > link.capacity_mbps) problems.push_back(link.name() + " over capacity");
      if (isp.ledger(link.name())->load_at(t) != load) problems.push_back(link.name() + " ledger mismatch");
    }
    for (const auto& c : isp.ledger(link.name())->charges()) {
      bool known = false;
      for (const auto* r : holding) known = known || r->reservation_id == c.reservation_id;
      if (!known) problems.push_back(link.name() + " charge for " + c.reservation_id + " has no holder");
    }
  }
  return problems;
}

}  // namespace fabric_world
