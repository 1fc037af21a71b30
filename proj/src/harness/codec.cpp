#include "bandx/harness/codec.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::harness {

using credential::Credential;

namespace {

[[noreturn]] void protocol(const std::string& what) { throw Error(ErrorCode::ProtocolError, what); }

credential::PublicKeyId key_field(const Payload& p, std::string_view name) {
  auto k = credential::PublicKeyId::try_parse(p.get(name));
  if (!k) protocol("field " + std::string(name) + " is not a key");
  return *k;
}

Date date_field(const Payload& p, std::string_view name) {
  auto d = Date::try_parse(p.get(name));
  if (!d) protocol("field " + std::string(name) + " is not a date");
  return *d;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto at = s.find(sep, pos);
    if (at == std::string::npos) at = s.size();
    out.push_back(s.substr(pos, at - pos));
    pos = at + 1;
  }
  return out;
}

}  // namespace

void put_credential(Payload& p, const std::string& block, const Credential& c) {
  p.add_block(block, credential::render_credential(c));
}

Credential get_credential(const Payload& p, std::string_view block) { return credential::parse_credential(p.block(block)); }

std::vector<Credential> get_credentials(const Payload& p, std::string_view block) {
  std::vector<Credential> out;
  for (const auto& b : p.blocks(block)) out.push_back(credential::parse_credential(b));
  return out;
}

void put_request(Payload& p, const isp::ReservationRequest& r) {
  p.set("kind", std::string(isp::to_string(r.kind)));
  p.set("challenge", r.challenge_id);
  p.set("bandwidth", r.bandwidth_mbps);
  p.set("duration", r.duration_seconds);
  p.set("start", r.interval.start.seconds);
  p.set("end", r.interval.end.seconds);
  p.set("customer", r.customer_key.str());
  p.set("signature", r.signature);
  for (const auto& o : r.offers) put_credential(p, "offer", o);
  put_credential(p, "guarantor", r.guarantor);
  for (const auto& c : r.checks) put_credential(p, "check", c);
}

isp::ReservationRequest get_request(const Payload& p) {
  isp::ReservationRequest r;
  const auto& kind = p.get("kind");
  if (kind != "spot" && kind != "future") protocol("bad request kind " + kind);
  r.kind = kind == "spot" ? isp::RequestKind::Spot : isp::RequestKind::Future;
  r.challenge_id = p.get("challenge");
  r.bandwidth_mbps = p.get_int("bandwidth");
  r.duration_seconds = p.get_int("duration");
  r.interval = {SimTime{p.get_int("start")}, SimTime{p.get_int("end")}};
  r.customer_key = key_field(p, "customer");
  r.signature = p.get("signature");
  r.offers = get_credentials(p, "offer");
  r.guarantor = get_credential(p, "guarantor");
  r.checks = get_credentials(p, "check");
  return r;
}

void put_challenge(Payload& p, const isp::Challenge& c) {
  p.set("challenge", c.challenge_id);
  p.set("ne", c.ne_id);
  p.set("issued_at", c.issued_at.seconds);
  p.set("ttl", c.ttl_seconds);
}

isp::Challenge get_challenge(const Payload& p) {
  return {p.get("challenge"), p.get("ne"), SimTime{p.get_int("issued_at")}, p.get_int("ttl")};
}

std::string segments_str(const std::vector<isp::Segment>& segs) {
  std::string out;
  for (const auto& s : segs) out += (out.empty() ? "" : ",") + s.link_name;
  return out;
}

void put_reservation(Payload& p, const isp::Reservation& r) {
  p.set("reservation_id", r.reservation_id);
  p.set("isp", r.isp);
  p.set("state", std::string(isp::to_string(r.state)));
  p.set("bandwidth", r.bandwidth_mbps);
  p.set("start", r.interval.start.seconds);
  p.set("end", r.interval.end.seconds);
  p.set("customer", r.customer_key.str());
  p.set("segments", segments_str(r.segments));
  if (r.next_payment_due) p.set("next_payment_due", r.next_payment_due->seconds);
  if (r.best_effort) p.set("best_effort", "1");
}

isp::Reservation get_reservation(const Payload& p) {
  isp::Reservation r;
  r.reservation_id = p.get("reservation_id");
  r.isp = p.get("isp");
  const auto& state = p.get("state");
  bool found = false;
  for (auto s : {isp::ReservationState::Notional, isp::ReservationState::Active, isp::ReservationState::Expired,
                 isp::ReservationState::Lapsed})
    if (isp::to_string(s) == state) r.state = s, found = true;
  if (!found) protocol("bad reservation state " + state);
  r.bandwidth_mbps = p.get_int("bandwidth");
  r.interval = {SimTime{p.get_int("start")}, SimTime{p.get_int("end")}};
  r.customer_key = key_field(p, "customer");
  for (const auto& link : split(p.get("segments"), ','))
    if (!link.empty()) r.segments.push_back({link.substr(0, link.find('>')), link});
  if (p.has("next_payment_due")) r.next_payment_due = SimTime{p.get_int("next_payment_due")};
  r.best_effort = p.has("best_effort");
  return r;
}

void put_referral(Payload& p, const isp::BoundaryReferral& r) {
  p.set("next_isp", r.next_isp);
  p.set("next_ne", r.next_ne);
  p.set("location", r.location);
  p.set("next_offer_index", static_cast<std::int64_t>(r.next_offer_index));
}

std::optional<isp::BoundaryReferral> get_referral(const Payload& p) {
  if (!p.has("next_ne")) return std::nullopt;
  return isp::BoundaryReferral{p.get("next_isp"), p.get("next_ne"), p.get("location"),
                               static_cast<std::size_t>(p.get_int("next_offer_index"))};
}

void put_query(Payload& p, const market::OfferQuery& q) {
  p.set("from", q.from);
  p.set("to", q.to);
  p.set("bandwidth", q.min_bandwidth_mbps);
  p.set("needed_on", q.needed_on.str());
  p.set("currency", q.currency);
  p.set("qos_class", std::string(market::to_string(q.qos_class)));
  if (q.max_total_price) p.set("max_price", q.max_total_price->amount_str());
}

market::OfferQuery get_query(const Payload& p) {
  market::OfferQuery q;
  q.from = p.get("from");
  q.to = p.get("to");
  q.min_bandwidth_mbps = p.get_int("bandwidth");
  q.needed_on = date_field(p, "needed_on");
  if (auto c = p.find("currency")) q.currency = *c;
  if (auto qc = p.find("qos_class")) {
    auto parsed = market::qos_from_string(*qc);
    if (!parsed) protocol("bad qos_class " + *qc);
    q.qos_class = *parsed;
  }
  if (auto m = p.find("max_price")) {
    auto minor = parse_minor_units(*m);
    if (!minor) protocol("bad max_price " + *m);
    q.max_total_price = Money{*minor, q.currency};
  }
  return q;
}

void put_plan(Payload& p, const market::PathPlan& plan) {
  p.set("steps", static_cast<std::int64_t>(plan.steps.size()));
  p.set("total", plan.total_price.amount_str());
  p.set("currency", plan.total_price.currency);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    p.set("step." + std::to_string(i) + ".mbps", plan.steps[i].purchased_mbps);
    p.set("step." + std::to_string(i) + ".price", plan.steps[i].price.amount_str());
    put_credential(p, "offer", plan.steps[i].offer.credential);
  }
}

market::PathPlan get_plan(const Payload& p) {
  market::PathPlan plan;
  auto offers = get_credentials(p, "offer");
  if (static_cast<std::int64_t>(offers.size()) != p.get_int("steps")) protocol("plan step count mismatch");
  const std::string currency = p.get("currency");
  auto money = [&](const std::string& key) {
    auto minor = parse_minor_units(p.get(key));
    if (!minor) protocol("bad amount in " + key);
    return Money{*minor, currency};
  };
  for (std::size_t i = 0; i < offers.size(); ++i) {
    market::PlanStep s;
    s.offer = market::derive_offer(offers[i]);
    s.purchased_mbps = p.get_int("step." + std::to_string(i) + ".mbps");
    s.price = money("step." + std::to_string(i) + ".price");
    plan.steps.push_back(std::move(s));
  }
  plan.total_price = money("total");
  return plan;
}

}  // namespace bandx::harness
