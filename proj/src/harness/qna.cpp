#include "bandx/harness/qna.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/harness/codec.hpp"

namespace bandx::harness {

QnaSession::QnaSession(std::string name, credential::SigningKey key, credential::Credential guarantor,
                       std::unique_ptr<crypto::RandomSource> rng, Client& client, const isp::Topology& topology,
                       std::map<std::string, std::string> isp_by_key)
    : name_(std::move(name)),
      book_(std::move(key)),
      guarantor_(std::move(guarantor)),
      rng_(std::move(rng)),
      client_(client),
      topology_(topology),
      isp_by_key_(std::move(isp_by_key)) {}

std::string QnaSession::isp_of(const market::Offer& o) const {
  auto it = isp_by_key_.find(o.isp_key.str());
  if (it == isp_by_key_.end()) throw Error(ErrorCode::NoPath, "offer " + o.link.name() + " is from an unknown ISP");
  return it->second;
}

std::vector<credential::Credential> QnaSession::pay(const std::vector<market::PlanStep>& steps, SimTime now) {
  std::vector<credential::Credential> checks;
  for (const auto& s : steps) {
    Money price = market::prorated_price(s.offer, s.purchased_mbps);
    if (s.price != price) throw Error(ErrorCode::BadRequest, "plan price for " + s.offer.link.name() + " is not the pro-rated price");
    std::string nonce = book_.fresh_nonce(*rng_);
    checks.push_back(book_.write(s.offer.isp_key, price, nonce, date_of(now)));
    log_.push_back({nonce, price, price});
  }
  return checks;
}

PurchaseHandle QnaSession::purchase(const market::OfferQuery& q, isp::RequestKind kind, std::int64_t duration,
                                    const isp::Interval& interval, SimTime now) {
  Payload query;
  put_query(query, q);
  market::PathPlan plan = get_plan(client_.call("clearinghouse", sender(), "COMPOSE", std::move(query)).payload);

  // Only credentials checked here are ever signed into a request.
  for (const auto& s : plan.steps)
    if (!credential::verify_signature(s.offer.credential))
      throw Error(ErrorCode::BadSignature, "clearing house returned an unverifiable offer");
  market::check_plan(plan, q);

  PurchaseHandle handle;
  handle.total = plan.total_price;
  const market::Offer& first = plan.steps.front().offer;
  const isp::NeSpec* ne = topology_.ne_at(isp_of(first), first.link.from);
  if (!ne) throw Error(ErrorCode::NoPath, "no network element for " + isp_of(first) + " at " + first.link.from);
  std::string ne_id = ne->id;
  std::size_t k = 0;

  try {
    for (;;) {
      Payload creq;
      creq.set("ne", ne_id);
      auto challenge = get_challenge(client_.call("isp", sender(), "CHALLENGE-REQ", std::move(creq)).payload);

      Leg leg;
      leg.isp = isp_of(plan.steps[k].offer);
      leg.ne = ne_id;
      for (std::size_t j = k; j < plan.steps.size() && plan.steps[j].offer.isp_key == plan.steps[k].offer.isp_key; ++j)
        leg.steps.push_back(plan.steps[j]);

      isp::ReservationRequest req;
      req.kind = kind;
      req.challenge_id = challenge.challenge_id;
      for (const auto& s : plan.steps) req.offers.push_back(s.offer.credential);
      req.guarantor = guarantor_;
      req.checks = pay(leg.steps, now);
      req.bandwidth_mbps = q.min_bandwidth_mbps;
      req.duration_seconds = kind == isp::RequestKind::Spot ? duration : 0;
      req.interval = kind == isp::RequestKind::Future ? interval : isp::Interval{};
      isp::sign_request(req, book_.payer());

      Payload body;
      body.set("ne", ne_id);
      put_request(body, req);
      auto reply = client_.call("isp", sender(), kind == isp::RequestKind::Spot ? "RESERVE-SPOT" : "BOOK-FUTURE",
                                std::move(body));
      if (kind == isp::RequestKind::Spot) {
        auto res = get_reservation(reply.payload);
        leg.reservation_id = res.reservation_id;
        leg.state = res.state;
      } else {
        leg.reservation_id = reply.payload.get("reservation_id");
        leg.reservation_credential = get_credential(reply.payload, "credential");
        if (!credential::verify_signature(*leg.reservation_credential))
          throw Error(ErrorCode::BadSignature, "reservation credential from " + leg.isp);
      }
      handle.legs.push_back(std::move(leg));

      auto referral = get_referral(reply.payload);
      if (!referral) break;
      ne_id = referral->next_ne;
      k = referral->next_offer_index;
      if (k >= plan.steps.size()) throw Error(ErrorCode::ProtocolError, "referral past the end of the plan");
    }
  } catch (const Error& e) {
    if (handle.legs.empty() || e.code() == ErrorCode::ProtocolError || e.code() == ErrorCode::IoError) throw;
    std::string released;
    for (auto& leg : handle.legs) {
      Payload t;
      t.set("isp", leg.isp);
      t.set("reservation_id", leg.reservation_id);
      t.set("signature", credential::sign_message(book_.payer(), isp::teardown_bytes(leg.reservation_id)));
      client_.call_unchecked("isp", sender(), "TEARDOWN-NOTIFY", std::move(t));
      released += (released.empty() ? "" : ",") + leg.reservation_id;
    }
    throw Error(ErrorCode::PartialEstablishment,
                std::string(to_string(e.code())) + " after establishing; released " + released + ": " + e.detail());
  }
  return handle;
}

PurchaseHandle QnaSession::purchase_spot(const market::OfferQuery& q, std::int64_t duration_seconds, SimTime now) {
  return purchase(q, isp::RequestKind::Spot, duration_seconds, {}, now);
}

PurchaseHandle QnaSession::purchase_future(const market::OfferQuery& q, const isp::Interval& interval, SimTime now) {
  return purchase(q, isp::RequestKind::Future, 0, interval, now);
}

void QnaSession::activate(PurchaseHandle& h, SimTime) {
  for (auto& leg : h.legs) {
    if (!leg.reservation_credential) throw Error(ErrorCode::BadRequest, leg.reservation_id + " has no reservation credential");
    Payload p;
    p.set("ne", leg.ne);
    put_credential(p, "credential", *leg.reservation_credential);
    leg.state = get_reservation(client_.call("isp", sender(), "ACTIVATE", std::move(p)).payload).state;
  }
}

void QnaSession::keepalive(PurchaseHandle& h, SimTime now) {
  for (auto& leg : h.legs) {
    Payload p;
    p.set("isp", leg.isp);
    p.set("reservation_id", leg.reservation_id);
    for (const auto& c : pay(leg.steps, now)) put_credential(p, "check", c);
    client_.call("isp", sender(), "KEEPALIVE", std::move(p));
  }
}

void QnaSession::teardown(PurchaseHandle& h) {
  for (auto& leg : h.legs) {
    Payload p;
    p.set("isp", leg.isp);
    p.set("reservation_id", leg.reservation_id);
    p.set("signature", credential::sign_message(book_.payer(), isp::teardown_bytes(leg.reservation_id)));
    leg.state = get_reservation(client_.call("isp", sender(), "TEARDOWN-NOTIFY", std::move(p)).payload).state;
  }
}

std::string encode_handle(const PurchaseHandle& h) {
  Payload out;
  out.set("legs", static_cast<std::int64_t>(h.legs.size()));
  out.set("total", h.total.amount_str());
  out.set("currency", h.total.currency);
  for (const auto& leg : h.legs) {
    Payload l;
    l.set("isp", leg.isp);
    l.set("ne", leg.ne);
    l.set("reservation_id", leg.reservation_id);
    l.set("state", std::string(isp::to_string(leg.state)));
    market::PathPlan plan{leg.steps, h.total};
    put_plan(l, plan);
    if (leg.reservation_credential) put_credential(l, "credential", *leg.reservation_credential);
    out.add_block("leg", l.encode());
  }
  return out.encode();
}

PurchaseHandle decode_handle(std::string_view text) {
  Payload in = Payload::decode(text);
  PurchaseHandle h;
  auto total = parse_minor_units(in.get("total"));
  if (!total) throw Error(ErrorCode::BadRequest, "bad handle total");
  h.total = Money{*total, in.get("currency")};
  for (const auto& block : in.blocks("leg")) {
    Payload l = Payload::decode(block);
    Leg leg;
    leg.isp = l.get("isp");
    leg.ne = l.get("ne");
    leg.reservation_id = l.get("reservation_id");
    leg.steps = get_plan(l).steps;
    if (!l.blocks("credential").empty()) leg.reservation_credential = get_credential(l, "credential");
    bool known = false;
    for (auto st : {isp::ReservationState::Notional, isp::ReservationState::Active, isp::ReservationState::Expired,
                    isp::ReservationState::Lapsed})
      if (isp::to_string(st) == l.get("state")) leg.state = st, known = true;
    if (!known) throw Error(ErrorCode::BadRequest, "bad handle state " + l.get("state"));
    h.legs.push_back(std::move(leg));
  }
  if (static_cast<std::int64_t>(h.legs.size()) != in.get_int("legs")) throw Error(ErrorCode::BadRequest, "handle leg count");
  return h;
}

}  // namespace bandx::harness
