#include "bandx/harness/service.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/credential/text.hpp"
#include "bandx/harness/codec.hpp"
#include "bandx/payments/instruments.hpp"

namespace bandx::harness {

using credential::PublicKeyId;

namespace {

PublicKeyId key_field(const Payload& p, std::string_view name) {
  auto k = PublicKeyId::try_parse(p.get(name));
  if (!k) throw Error(ErrorCode::ProtocolError, "field " + std::string(name) + " is not a key");
  return *k;
}

Date date_field(const Payload& p, std::string_view name) {
  auto d = Date::try_parse(p.get(name));
  if (!d) throw Error(ErrorCode::ProtocolError, "field " + std::string(name) + " is not a date");
  return *d;
}

Money money_field(const Payload& p, std::string_view name, const std::string& currency) {
  auto m = parse_minor_units(p.get(name));
  if (!m) throw Error(ErrorCode::ProtocolError, "field " + std::string(name) + " is not an amount");
  return Money{*m, currency};
}

[[noreturn]] void unknown_type(const std::string& role, const std::string& type) {
  throw Error(ErrorCode::ProtocolError, "unknown message type " + type + " for " + role);
}

}  // namespace

Envelope Service::handle(const Envelope& request) {
  Envelope reply{"", role_, ++seq_, {}};
  try {
    if (request.type == "CLOCK-SET") {
      now_ = SimTime{request.payload.get_int("now")};
      reply.type = "OK";
      reply.payload.set("now", now_.seconds);
    } else if (request.type == "REPORT") {
      reply.type = "REPORT";
      reply.payload.set("clock", now_.seconds);
      report(reply.payload);
    } else {
      reply.type = dispatch(request.type, request.payload, reply.payload);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ProtocolError) {
      reply = Envelope{"PROTOCOL-ERROR", role_, seq_, {}};
      reply.payload.set("detail", e.detail());
    } else {
      reply = make_error(role_, seq_, to_string(e.code()), e.detail());
    }
  } catch (const std::exception& e) {
    reply = make_error(role_, seq_, to_string(ErrorCode::BadRequest), e.what());
  }
  return reply;
}

// ---- clearing house

ClearinghouseService::ClearinghouseService(const WorldSetup&) : Service("clearinghouse") {}

std::string ClearinghouseService::dispatch(const std::string& type, const Payload& in, Payload& out) {
  const Date today = date_of(now());
  if (type == "POST-OFFER") {
    auto offer = repo_.post_offer(get_credential(in, "offer"), today);
    out.set("offer_id", offer.offer_id);
    out.set("link_name", offer.link.name());
    return "OK";
  }
  if (type == "QUERY") {
    for (const auto& o : repo_.query_offers(get_query(in))) put_credential(out, "offer", o.credential);
    return "OFFERS";
  }
  if (type == "COMPOSE") {
    put_plan(out, repo_.compose_path(get_query(in)));
    return "PLAN";
  }
  if (type == "EXPORT") {
    for (const auto& o : repo_.all()) put_credential(out, "offer", o.credential);
    return "OFFERS";
  }
  if (type == "EXPIRE") {
    out.set("expired", static_cast<std::int64_t>(repo_.expire_offers(today)));
    return "OK";
  }
  unknown_type(role(), type);
}

void ClearinghouseService::report(Payload& out) const {
  auto all = repo_.all();
  out.set("offers", static_cast<std::int64_t>(all.size()));
  for (const auto& o : all)
    out.set("offer." + o.offer_id, o.link.name() + " " + std::to_string(o.bandwidth_mbps) + "Mbps " +
                                       o.min_price.amount_str() + " " + o.min_price.currency);
}

// ---- guarantor

GuarantorService::GuarantorService(const WorldSetup& setup) : Service("guarantor") {
  for (const auto& g : setup.guarantors) keys_.emplace(g, setup.key_for("guarantor:" + g));
}

std::string GuarantorService::dispatch(const std::string& type, const Payload& in, Payload& out) {
  if (type == "ISSUE-CWC") {
    auto it = keys_.find(in.get("guarantor"));
    if (it == keys_.end()) throw Error(ErrorCode::BadRequest, "unknown guarantor " + in.get("guarantor"));
    const std::string currency = in.find("currency").value_or("USD");
    auto cred = payments::issue_guarantor_credential(it->second, key_field(in, "payer"),
                                                     money_field(in, "limit", currency), date_field(in, "expiry"));
    ++issued_;
    put_credential(out, "credential", cred);
    return "CREDENTIAL";
  }
  unknown_type(role(), type);
}

void GuarantorService::report(Payload& out) const {
  out.set("issued", static_cast<std::int64_t>(issued_));
  for (const auto& [name, key] : keys_) out.set("guarantor." + name, key.id().str());
}

// ---- clearing and settlement center

CscService::CscService(const WorldSetup& setup) : Service("csc") {
  payments::SettlementConfig cfg;
  cfg.commission_bps = setup.commission_bps;
  cfg.daily_cap_minor = setup.daily_cap_minor;
  cfg.journal_path = setup.csc_journal;
  for (const auto& g : setup.guarantors) cfg.trusted_guarantors.push_back(setup.key_for("guarantor:" + g).id());
  center_ = std::make_unique<payments::SettlementCenter>(setup.key_for("csc").id(), cfg);
}

std::string CscService::dispatch(const std::string& type, const Payload& in, Payload& out) {
  if (type == "DEPOSIT") {
    std::vector<payments::TransactionRecord> records;
    for (const auto& b : in.blocks("record")) records.push_back(payments::parse_record(b));
    auto report = center_->deposit_batch(records);
    out.set("accepted", static_cast<std::int64_t>(report.accepted.size()));
    out.set("rejected", static_cast<std::int64_t>(report.rejected.size()));
    for (std::size_t i = 0; i < report.accepted.size(); ++i)
      out.set("accepted." + std::to_string(i),
              report.accepted[i].first + " " + report.accepted[i].second.amount_str() + " " +
                  report.accepted[i].second.currency);
    for (std::size_t i = 0; i < report.rejected.size(); ++i)
      out.set("rejected." + std::to_string(i), report.rejected[i].first + " " + report.rejected[i].second);
    for (const auto& [cur, fee] : report.commission_taken) out.set("commission." + cur, format_minor_units(fee));
    return "SETTLEMENT";
  }
  if (type == "BALANCE") {
    out.set("balance", format_minor_units(center_->account_balance(key_field(in, "key"), in.get("currency"))));
    return "OK";
  }
  if (type == "DISPUTE") {
    std::optional<payments::TransactionRecord> record;
    std::optional<bool> recorded;
    if (auto id = in.find("record_id")) {
      auto entry = center_->find_entry(*id);
      if (!entry) throw Error(ErrorCode::BadRequest, "no journal entry " + *id);
      record = entry->record;
      recorded = entry->verdict;
    } else {
      record = payments::parse_record(in.block("record"));
      if (auto entry = center_->find_entry(payments::record_id(*record))) recorded = entry->verdict;
    }
    out.set("record_id", payments::record_id(*record));
    out.set("verdict", center_->dispute_replay(*record) ? "true" : "false");
    if (recorded) out.set("recorded", *recorded ? "true" : "false");
    return "OK";
  }
  unknown_type(role(), type);
}

void CscService::report(Payload& out) const {
  auto accounts = center_->accounts();
  out.set("accounts", static_cast<std::int64_t>(accounts.size()));
  for (std::size_t i = 0; i < accounts.size(); ++i)
    out.set("account." + std::to_string(i), accounts[i].principal.str() + " " + accounts[i].currency + " " +
                                                format_minor_units(accounts[i].balance) + " " +
                                                std::string(payments::to_string(accounts[i].role)));
  out.set("settled", static_cast<std::int64_t>(center_->settled_count()));
  out.set("journal", static_cast<std::int64_t>(center_->journal().size()));
}

// ---- ISPs

IspService::IspService(const WorldSetup& setup, Transport& csc) : Service("isp"), csc_(csc) {
  isp::IspConfig cfg;
  cfg.challenge_ttl_seconds = setup.challenge_ttl_seconds;
  cfg.keepalive_period_seconds = setup.keepalive_period_seconds;
  for (const auto& g : setup.guarantors) cfg.trusted_guarantors.push_back(setup.key_for("guarantor:" + g).id());
  auto seed = setup.seed;
  fabric_ = std::make_unique<isp::Fabric>(
      isp::parse_topology(setup.topology_text), [&](const std::string& n) { return setup.key_for("isp:" + n); },
      [seed](const std::string& n) { return crypto::make_random(seed, "isp:" + n); }, cfg);
}

std::string IspService::dispatch(const std::string& type, const Payload& in, Payload& out) {
  if (type == "ISSUE-OFFER") {
    auto& provider = fabric_->isp(in.get("isp"));
    market::OfferTerms t;
    t.link = {in.get("from"), in.get("to")};
    t.bandwidth_mbps = in.get_int("bandwidth");
    t.min_price = money_field(in, "price", in.find("currency").value_or("USD"));
    t.expires = date_field(in, "expires");
    t.unbundling_allowed = in.find("unbundling").value_or("true") == "true";
    if (auto q = in.find("qos_class")) {
      auto parsed = market::qos_from_string(*q);
      if (!parsed) throw Error(ErrorCode::ProtocolError, "bad qos_class " + *q);
      t.qos_class = *parsed;
    }
    if (auto h = in.find("path_hint")) {
      std::string cur;
      for (char c : *h + ",") {
        if (c == ',') {
          if (!cur.empty()) t.path_hint.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
    }
    if (t.bandwidth_mbps <= 0 || t.min_price.minor <= 0)
      throw Error(ErrorCode::MalformedOffer, "offer bandwidth and price must be positive");
    put_credential(out, "credential", market::make_offer_credential(t, provider.signing_key()));
    return "CREDENTIAL";
  }
  if (type == "CHALLENGE-REQ") {
    const auto& ne = in.get("ne");
    put_challenge(out, fabric_->isp_of_ne(ne).issue_challenge(ne, now()));
    return "CHALLENGE-RESP";
  }
  if (type == "RESERVE-SPOT") {
    const auto& ne = in.get("ne");
    auto outcome = fabric_->isp_of_ne(ne).handle_spot_request(ne, get_request(in), now());
    put_reservation(out, outcome.reservation);
    if (outcome.referral) {
      put_referral(out, *outcome.referral);
      return "BOUNDARY-REFERRAL";
    }
    return "RESERVATION";
  }
  if (type == "BOOK-FUTURE") {
    const auto& ne = in.get("ne");
    auto& provider = fabric_->isp_of_ne(ne);
    auto outcome = provider.book_future(ne, get_request(in), now());
    out.set("reservation_id", outcome.reservation_id);
    out.set("isp", provider.name());
    put_credential(out, "credential", outcome.reservation_credential);
    if (outcome.referral) put_referral(out, *outcome.referral);
    return "BOOKED";
  }
  if (type == "ACTIVATE") {
    const auto& ne = in.get("ne");
    put_reservation(out, fabric_->isp_of_ne(ne).activate_reservation(ne, get_credential(in, "credential"), now()));
    return "RESERVATION";
  }
  if (type == "KEEPALIVE") {
    auto& provider = fabric_->isp(in.get("isp"));
    auto due = provider.keepalive_payment(in.get("reservation_id"), get_credentials(in, "check"), now());
    out.set("next_payment_due", due.seconds);
    return "OK";
  }
  if (type == "TEARDOWN-NOTIFY") {
    auto& provider = fabric_->isp(in.get("isp"));
    provider.teardown(in.get("reservation_id"), in.get("signature"), now());
    put_reservation(out, provider.reservations().at(in.get("reservation_id")));
    return "RESERVATION";
  }
  if (type == "EXPIRE") {
    std::int64_t n = 0;
    for (const auto& name : fabric_->isp_names()) n += static_cast<std::int64_t>(fabric_->isp(name).expire_reservations(now()));
    out.set("transitioned", n);
    return "OK";
  }
  if (type == "DEPOSIT-FLUSH") {
    std::int64_t accepted = 0, rejected = 0;
    for (const auto& name : fabric_->isp_names()) {
      auto records = fabric_->isp(name).drain_deposits();
      if (records.empty()) continue;
      Payload batch;
      for (const auto& r : records) batch.add_block("record", payments::serialize_record(r));
      auto reply = csc_.call("csc", "isp:" + name, "DEPOSIT", std::move(batch));
      accepted += reply.payload.get_int("accepted");
      rejected += reply.payload.get_int("rejected");
      for (const auto& [k, v] : reply.payload.fields())
        if (k.rfind("accepted.", 0) == 0 || k.rfind("rejected.", 0) == 0) out.set(name + "." + k, v);
      out.set("deposited." + name, static_cast<std::int64_t>(records.size()));
    }
    out.set("accepted", accepted);
    out.set("rejected", rejected);
    return "OK";
  }
  unknown_type(role(), type);
}

void IspService::report(Payload& out) const {
  for (const auto& name : fabric_->isp_names()) {
    const auto& provider = fabric_->isp(name);
    out.set("key." + name, provider.key_id().str());
    for (const auto& [id, r] : provider.reservations())
      out.set("reservation." + name + "." + id,
              std::string(isp::to_string(r.state)) + " " + std::to_string(r.bandwidth_mbps) + "Mbps " +
                  std::to_string(r.interval.start.seconds) + "-" + std::to_string(r.interval.end.seconds) + " " +
                  segments_str(r.segments));
    out.set("pending_deposits." + name, static_cast<std::int64_t>(provider.pending_deposits()));
  }
  for (const auto& l : fabric_->topology().links) {
    const auto* ne = fabric_->topology().find_ne(l.from);
    const auto* ledger = fabric_->isp(ne->isp).ledger(l.name());
    out.set("load." + l.name(), std::to_string(ledger->load_at(now())) + "/" + std::to_string(l.capacity_mbps));
  }
  auto problems = fabric_->audit();
  out.set("audit", problems.empty() ? std::string("ok") : problems.front());
}

std::unique_ptr<Service> make_service(const std::string& role, const WorldSetup& setup, Transport* csc) {
  if (role == "clearinghouse") return std::make_unique<ClearinghouseService>(setup);
  if (role == "guarantor") return std::make_unique<GuarantorService>(setup);
  if (role == "csc") return std::make_unique<CscService>(setup);
  if (role == "isp") {
    if (!csc) throw Error(ErrorCode::ConfigError, "the isp role needs a csc peer");
    return std::make_unique<IspService>(setup, *csc);
  }
  throw Error(ErrorCode::ConfigError, "unknown role " + role);
}

}  // namespace bandx::harness
