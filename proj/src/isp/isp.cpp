#include "bandx/isp/isp.hpp"

#include <algorithm>
#include <deque>

#include "bandx/common/constants.hpp"
#include "bandx/common/error.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/credential/text.hpp"
#include "bandx/market/path.hpp"
#include "bandx/payments/instruments.hpp"

namespace bandx::isp {

using namespace credential;

struct Isp::Admission {
  Reservation res;
  std::vector<payments::TransactionRecord> records;
  std::vector<std::pair<std::string, std::string>> nonces;
  std::vector<std::string> link_names;
  std::optional<BoundaryReferral> referral;
};

namespace {

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : std::string(1, sep)) + p;
  return out;
}

}  // namespace

Isp::Isp(std::string name, SigningKey key, Topology topology, IspConfig config,
         std::unique_ptr<crypto::RandomSource> rng)
    : name_(std::move(name)),
      key_(std::move(key)),
      topology_(std::move(topology)),
      config_(std::move(config)),
      rng_(std::move(rng)),
      pdp_(key_.id(), config_.trusted_guarantors) {
  for (const auto& n : topology_.nes)
    if (n.isp == name_) nes_[n.id] = NetworkElement{n.id, n.location, {}, {}, {}, {}, 1};
  for (const auto& l : topology_.links) {
    auto it = nes_.find(l.from);
    if (it != nes_.end()) it->second.links.emplace(l.name(), NetworkElement::Port{l.to, IntervalLedger(l.capacity_mbps)});
  }
}

NetworkElement& Isp::element(const std::string& ne_id) {
  auto it = nes_.find(ne_id);
  if (it == nes_.end()) throw Error(ErrorCode::BadRequest, "no network element " + ne_id + " at " + name_);
  return it->second;
}

NetworkElement& Isp::owner_of(const std::string& link_name) {
  for (auto& [id, ne] : nes_)
    if (ne.links.count(link_name)) return ne;
  throw Error(ErrorCode::BadRequest, "no link " + link_name + " at " + name_);
}

const IntervalLedger* Isp::ledger(const std::string& link_name) const {
  for (const auto& [id, ne] : nes_) {
    auto it = ne.links.find(link_name);
    if (it != ne.links.end()) return &it->second.ledger;
  }
  return nullptr;
}

Challenge Isp::issue_challenge(const std::string& ne_id, SimTime now) {
  NetworkElement& ne = element(ne_id);
  Challenge c{rng_->hex(16), ne_id, now, config_.challenge_ttl_seconds};
  while (ne.challenges.count(c.challenge_id) || ne.redeemed.count(c.challenge_id)) c.challenge_id = rng_->hex(16);
  ne.challenges[c.challenge_id] = c;
  return c;
}

std::vector<Segment> Isp::route(const market::Offer& offer) const {
  const NeSpec* from = topology_.ne_at(name_, offer.link.from);
  const NeSpec* to = topology_.ne_at(name_, offer.link.to);
  if (!from || !to) throw Error(ErrorCode::NoPath, name_ + " has no element at both ends of " + offer.link.name());

  auto hop = [&](const std::string& a, const std::string& b) -> std::optional<Segment> {
    auto it = nes_.find(a);
    if (it == nes_.end()) return std::nullopt;
    for (const auto& [name, port] : it->second.links)
      if (port.to == b) return Segment{a, name};
    return std::nullopt;
  };

  std::vector<Segment> out;
  if (!offer.path_hint.empty()) {
    const auto& h = offer.path_hint;
    if (h.front() != from->id || h.back() != to->id)
      throw Error(ErrorCode::NoPath, "path hint for " + offer.link.name() + " does not join its endpoints");
    for (std::size_t i = 0; i + 1 < h.size(); ++i) {
      auto s = hop(h[i], h[i + 1]);
      if (!s) throw Error(ErrorCode::NoPath, "path hint hop " + h[i] + ">" + h[i + 1] + " is not a link");
      out.push_back(*s);
    }
    return out;
  }

  std::map<std::string, Segment> via;
  std::deque<std::string> queue{from->id};
  std::set<std::string> seen{from->id};
  while (!queue.empty() && !seen.count(to->id)) {
    std::string at = queue.front();
    queue.pop_front();
    for (const auto& [name, port] : nes_.at(at).links) {
      if (!seen.insert(port.to).second) continue;
      via[port.to] = Segment{at, name};
      queue.push_back(port.to);
    }
  }
  if (!seen.count(to->id)) throw Error(ErrorCode::NoPath, "no route inside " + name_ + " for " + offer.link.name());
  for (std::string at = to->id; at != from->id; at = via[at].ne_id) out.push_back(via[at]);
  std::reverse(out.begin(), out.end());
  return out;
}

Isp::Admission Isp::admit(NetworkElement& ne, const ReservationRequest& req, SimTime now, const Interval& interval) {
  if (ne.redeemed.count(req.challenge_id))
    throw Error(ErrorCode::ReplayedChallenge, "challenge " + req.challenge_id + " already redeemed");
  auto ch = ne.challenges.find(req.challenge_id);
  if (ch == ne.challenges.end()) throw Error(ErrorCode::UnknownChallenge, "challenge " + req.challenge_id);
  if (now.seconds >= ch->second.issued_at.seconds + ch->second.ttl_seconds) {
    ne.challenges.erase(ch);
    throw Error(ErrorCode::ExpiredChallenge, "challenge " + req.challenge_id);
  }
  if (!pdp_.verify_signed_message(req.customer_key, req.signature, signing_bytes(req)))
    throw Error(ErrorCode::BadSignature, "reservation request signature");
  ne.challenges.erase(ch);
  ne.redeemed.insert(req.challenge_id);

  if (req.bandwidth_mbps <= 0) throw Error(ErrorCode::BadRequest, "bandwidth must be positive");
  std::vector<market::Offer> offers;
  for (const auto& c : req.offers) offers.push_back(market::derive_offer(c));
  for (std::size_t k = 1; k < offers.size(); ++k)
    if (offers[k - 1].link.to != offers[k].link.from) throw Error(ErrorCode::BadRequest, "offers do not form a path");

  std::size_t first = offers.size();
  for (std::size_t k = 0; k < offers.size() && first == offers.size(); ++k)
    if (offers[k].isp_key == key_id() && offers[k].link.from == ne.location) first = k;
  if (first == offers.size())
    throw Error(ErrorCode::BadRequest, "no offer from " + name_ + " starts at " + ne.location);
  std::size_t last = first;
  while (last + 1 < offers.size() && offers[last + 1].isp_key == key_id()) ++last;
  if (req.checks.size() != last - first + 1)
    throw Error(ErrorCode::BadRequest, "expected " + std::to_string(last - first + 1) + " checks, got " +
                                           std::to_string(req.checks.size()));

  Admission a;
  a.res.isp = name_;
  a.res.bandwidth_mbps = req.bandwidth_mbps;
  a.res.interval = interval;
  a.res.customer_key = req.customer_key;
  a.res.guarantor = req.guarantor;
  a.res.best_effort = offers[first].qos_class == market::QosClass::PremiumBestEffort;

  const Date today = date_of(now);
  for (std::size_t k = first; k <= last; ++k) {
    const auto& o = offers[k];
    if ((o.qos_class == market::QosClass::PremiumBestEffort) != a.res.best_effort)
      throw Error(ErrorCode::BadRequest, "offers of one ISP mix service classes");
    if (!market::validate_unbundling(o, req.bandwidth_mbps))
      throw Error(ErrorCode::UnbundlingProhibited, o.link.name() + " sells exactly " +
                                                       std::to_string(o.bandwidth_mbps) + "Mbps");
    const Credential& check = req.checks[k - first];
    payments::MicrocheckView v;
    try {
      v = payments::view_microcheck(check);
    } catch (const Error& e) {
      throw Error(ErrorCode::PaymentRefused, e.detail());
    }
    std::pair<std::string, std::string> nonce{v.payer_key.str(), v.nonce};
    if (presented_checks_.count(nonce) || std::find(a.nonces.begin(), a.nonces.end(), nonce) != a.nonces.end())
      throw Error(ErrorCode::PaymentRefused, "check " + v.nonce + " already presented");
    auto action = payments::payment_action(o, req.bandwidth_mbps, v.amount, v.nonce, today);
    if (!pdp_.verify_payment(req.guarantor, o.credential, check, action))
      throw Error(ErrorCode::PaymentRefused, "payment for " + o.link.name() + " not authorized");
    a.nonces.push_back(nonce);
    a.records.push_back({o.credential, check, req.guarantor, action, key_id(), today});
    a.link_names.push_back(o.link.name());
    a.res.offers.push_back(o.credential);
    for (auto& s : route(o)) a.res.segments.push_back(std::move(s));
  }

  if (last + 1 < offers.size()) {
    const auto& next = offers[last + 1];
    auto dir = directory_.find(next.isp_key.str());
    if (dir == directory_.end()) throw Error(ErrorCode::NoPath, "offer " + next.link.name() + " is from an unknown ISP");
    const NeSpec* ingress = topology_.ne_at(dir->second, next.link.from);
    if (!ingress) throw Error(ErrorCode::NoPath, dir->second + " has no element at " + next.link.from);
    a.referral = BoundaryReferral{dir->second, ingress->id, next.link.from, last + 1};
  }

  a.res.reservation_id = ne.id + "-" + std::to_string(ne.next_seq++);
  return a;
}

void Isp::propagate_path(Reservation& res) {
  if (!res.best_effort) {
    std::vector<IntervalLedger*> charged;
    for (const auto& s : res.segments) {
      IntervalLedger& l = element(s.ne_id).links.at(s.link_name).ledger;
      if (s.link_name == failing_link_ || !l.fits(res.interval, res.bandwidth_mbps)) {
        for (auto* c : charged) c->release(res.reservation_id);
        throw Error(ErrorCode::CapacityExhausted, "link " + s.link_name + " cannot carry " +
                                                      std::to_string(res.bandwidth_mbps) + "Mbps more");
      }
      l.add({res.reservation_id, res.interval, res.bandwidth_mbps});
      charged.push_back(&l);
    }
  }
  res.charged = true;
}

void Isp::release(Reservation& res) {
  for (const auto& s : res.segments) {
    auto& ne = element(s.ne_id);
    ne.links.at(s.link_name).ledger.release(res.reservation_id);
    ne.active.erase(res.reservation_id);
  }
  res.charged = false;
}

SpotOutcome Isp::handle_spot_request(const std::string& ne_id, const ReservationRequest& req, SimTime now) {
  NetworkElement& ne = element(ne_id);
  if (req.kind != RequestKind::Spot) throw Error(ErrorCode::BadRequest, "not a spot request");
  if (req.duration_seconds <= 0) throw Error(ErrorCode::BadRequest, "spot duration must be positive");
  Admission a = admit(ne, req, now, Interval{now, now.plus(req.duration_seconds)});
  propagate_path(a.res);
  a.res.state = ReservationState::Active;
  for (const auto& s : a.res.segments) element(s.ne_id).active.insert(a.res.reservation_id);
  if (config_.keepalive_period_seconds > 0) a.res.next_payment_due = now.plus(config_.keepalive_period_seconds);

  presented_checks_.insert(a.nonces.begin(), a.nonces.end());
  deposits_.insert(deposits_.end(), a.records.begin(), a.records.end());
  reservations_[a.res.reservation_id] = a.res;
  return {a.res, a.referral};
}

Credential Isp::make_reservation_credential(const Reservation& res, const std::vector<std::string>& links) const {
  Credential c;
  c.local_constants = {{"ISP_KEY", key_id().str()}, {"CUSTOMER_KEY", res.customer_key.str()}};
  c.authorizer = Principal::key(key_id());
  c.licensees = PrincipalExpr::of(res.customer_key);
  c.conditions.clauses.push_back({ConditionExpr::all_of({
                                      attr_eq("app_domain", std::string(kAppDomain)),
                                      attr_eq("reservation_id", res.reservation_id),
                                      attr_eq("link_name", join(links, ',')),
                                      attr_eq("bandwidth", std::to_string(res.bandwidth_mbps)),
                                      attr_num("time", CompareOp::Ge, std::to_string(res.interval.start.seconds)),
                                      attr_num("time", CompareOp::Lt, std::to_string(res.interval.end.seconds)),
                                  }),
                                  true});
  return sign_credential(std::move(c), key_);
}

BookingOutcome Isp::book_future(const std::string& ne_id, const ReservationRequest& req, SimTime now) {
  NetworkElement& ne = element(ne_id);
  if (req.kind != RequestKind::Future) throw Error(ErrorCode::BadRequest, "not a futures request");
  if (req.interval.start <= now || req.interval.end <= req.interval.start)
    throw Error(ErrorCode::BadRequest, "futures interval must start in the future and be non-empty");
  Admission a = admit(ne, req, now, req.interval);
  propagate_path(a.res);
  a.res.state = ReservationState::Notional;
  a.res.reservation_credential = make_reservation_credential(a.res, a.link_names);

  presented_checks_.insert(a.nonces.begin(), a.nonces.end());
  deposits_.insert(deposits_.end(), a.records.begin(), a.records.end());
  reservations_[a.res.reservation_id] = a.res;
  return {*a.res.reservation_credential, a.res.reservation_id, a.referral};
}

Reservation Isp::activate_reservation(const std::string& ne_id, const Credential& cred, SimTime now) {
  element(ne_id);
  if (!pdp_.verify_credential(cred)) throw Error(ErrorCode::BadSignature, "reservation credential signature");
  std::string rid;
  std::string links;
  for (const auto* t : conjunction_terms(cred.conditions)) {
    if (t->attr.name == "reservation_id" && t->op == CompareOp::Eq) rid = t->literal.text;
    if (t->attr.name == "link_name" && t->op == CompareOp::Eq) links = t->literal.text;
  }
  auto it = reservations_.find(rid);
  if (rid.empty() || it == reservations_.end() || !it->second.reservation_credential ||
      canonical_bytes(*it->second.reservation_credential) != canonical_bytes(cred))
    throw Error(ErrorCode::UnknownReservation, "no booking for " + (rid.empty() ? std::string("credential") : rid));
  Reservation& res = it->second;
  if (!res.interval.contains(now))
    throw Error(ErrorCode::OutsideInterval, rid + " is valid from " + format_time(res.interval.start) + " to " +
                                                format_time(res.interval.end));
  if (res.state != ReservationState::Notional || !res.charged)
    throw Error(ErrorCode::BadRequest, rid + " is " + std::string(to_string(res.state)));

  ActionAttributeSet action{{"app_domain", std::string(kAppDomain)},
                            {"reservation_id", rid},
                            {"link_name", links},
                            {"bandwidth", std::to_string(res.bandwidth_mbps)},
                            {"time", std::to_string(now.seconds)}};
  if (!pdp_.authorize_activation(cred, res.customer_key, action))
    throw Error(ErrorCode::BadRequest, "reservation credential does not authorize activation of " + rid);

  res.state = ReservationState::Active;
  for (const auto& s : res.segments) element(s.ne_id).active.insert(rid);
  if (config_.keepalive_period_seconds > 0) res.next_payment_due = now.plus(config_.keepalive_period_seconds);
  return res;
}

SimTime Isp::keepalive_payment(const std::string& reservation_id, const std::vector<Credential>& checks, SimTime now) {
  auto it = reservations_.find(reservation_id);
  if (it == reservations_.end()) throw Error(ErrorCode::UnknownReservation, reservation_id);
  Reservation& res = it->second;
  if (res.state != ReservationState::Active || !res.next_payment_due)
    throw Error(ErrorCode::BadRequest, reservation_id + " is not an active metered reservation");
  if (checks.size() != res.offers.size())
    throw Error(ErrorCode::BadRequest, "expected " + std::to_string(res.offers.size()) + " checks");

  const Date today = date_of(now);
  std::vector<payments::TransactionRecord> records;
  std::vector<std::pair<std::string, std::string>> nonces;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    auto o = market::derive_offer(res.offers[k]);
    payments::MicrocheckView v;
    try {
      v = payments::view_microcheck(checks[k]);
    } catch (const Error& e) {
      throw Error(ErrorCode::PaymentRefused, e.detail());
    }
    std::pair<std::string, std::string> nonce{v.payer_key.str(), v.nonce};
    if (presented_checks_.count(nonce) || std::find(nonces.begin(), nonces.end(), nonce) != nonces.end())
      throw Error(ErrorCode::PaymentRefused, "check " + v.nonce + " already presented");
    auto action = payments::payment_action(o, res.bandwidth_mbps, v.amount, v.nonce, today);
    if (!pdp_.verify_payment(res.guarantor, o.credential, checks[k], action))
      throw Error(ErrorCode::PaymentRefused, "keepalive payment for " + o.link.name() + " not authorized");
    nonces.push_back(nonce);
    records.push_back({o.credential, checks[k], res.guarantor, action, key_id(), today});
  }
  presented_checks_.insert(nonces.begin(), nonces.end());
  deposits_.insert(deposits_.end(), records.begin(), records.end());
  res.next_payment_due = res.next_payment_due->plus(config_.keepalive_period_seconds);
  return *res.next_payment_due;
}

std::size_t Isp::expire_reservations(SimTime now) {
  std::size_t n = 0;
  for (auto& [id, res] : reservations_) {
    if (res.state == ReservationState::Active) {
      if (now >= res.interval.end) {
        res.state = ReservationState::Expired;
      } else if (res.next_payment_due && now > *res.next_payment_due) {
        res.state = ReservationState::Lapsed;
      } else {
        continue;
      }
      release(res);
      ++n;
    } else if (res.state == ReservationState::Notional && res.charged && now >= res.interval.end) {
      release(res);
    }
  }
  return n;
}

void Isp::teardown(const std::string& reservation_id, const std::string& customer_signature, SimTime now) {
  auto it = reservations_.find(reservation_id);
  if (it == reservations_.end()) throw Error(ErrorCode::UnknownReservation, reservation_id);
  Reservation& res = it->second;
  if (!pdp_.verify_signed_message(res.customer_key, customer_signature, teardown_bytes(reservation_id)))
    throw Error(ErrorCode::BadSignature, "teardown of " + reservation_id);
  if (res.state == ReservationState::Active) {
    res.state = ReservationState::Expired;
    if (now < res.interval.end) res.interval.end = std::max(now, res.interval.start);
    release(res);
  } else if (res.state == ReservationState::Notional && res.charged) {
    release(res);
  }
}

std::vector<payments::TransactionRecord> Isp::drain_deposits() {
  std::vector<payments::TransactionRecord> out(deposits_.begin(), deposits_.end());
  deposits_.clear();
  return out;
}

std::vector<std::string> Isp::audit() const {
  std::vector<std::string> problems;
  std::map<std::string, std::vector<std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t>>> expected;
  for (const auto& [id, res] : reservations_) {
    if (res.state == ReservationState::Active && !res.charged) problems.push_back(id + ": active but not charged");
    if (res.charged && !res.best_effort)
      for (const auto& s : res.segments)
        expected[s.link_name].emplace_back(id, res.interval.start.seconds, res.interval.end.seconds, res.bandwidth_mbps);
    for (const auto& s : res.segments) {
      bool installed = nes_.at(s.ne_id).active.count(id) > 0;
      if (installed != (res.state == ReservationState::Active))
        problems.push_back(id + ": installation at " + s.ne_id + " disagrees with state " +
                           std::string(to_string(res.state)));
    }
  }
  for (const auto& [ne_id, ne] : nes_) {
    for (const auto& [name, port] : ne.links) {
      std::vector<std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t>> actual;
      for (const auto& c : port.ledger.charges())
        actual.emplace_back(c.reservation_id, c.interval.start.seconds, c.interval.end.seconds, c.mbps);
      auto want = expected[name];
      std::sort(actual.begin(), actual.end());
      std::sort(want.begin(), want.end());
      if (actual != want) problems.push_back(name + ": ledger disagrees with reservation table");
      for (const auto& c : port.ledger.charges())
        if (port.ledger.load_at(c.interval.start) > port.ledger.capacity())
          problems.push_back(name + ": over capacity at " + format_time(c.interval.start));
    }
  }
  return problems;
}

}  // namespace bandx::isp
