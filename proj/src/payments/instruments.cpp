#include "bandx/payments/instruments.hpp"

#include <algorithm>

#include "bandx/common/constants.hpp"
#include "bandx/common/error.hpp"
#include "bandx/credential/compliance.hpp"
#include "bandx/credential/signature.hpp"

namespace bandx::payments {

using namespace credential;

namespace {

const ConditionExpr* find_term(const std::vector<const ConditionExpr*>& terms, std::string_view name, CompareOp op) {
  for (const auto* t : terms)
    if (t->attr.name == name && t->op == op) return t;
  return nullptr;
}

const ConditionExpr& need(const std::vector<const ConditionExpr*>& terms, std::string_view name, CompareOp op,
                          std::string_view what) {
  const auto* t = find_term(terms, name, op);
  if (!t) throw Error(ErrorCode::BadRequest, std::string(what) + ": missing " + std::string(name) + " condition");
  return *t;
}

PublicKeyId single_licensee(const Credential& c, std::string_view what) {
  if (c.licensees.kind != PrincipalExpr::Kind::Key)
    throw Error(ErrorCode::BadRequest, std::string(what) + ": licensees must be a single key");
  return c.licensees.key;
}

PublicKeyId key_authorizer(const Credential& c, std::string_view what) {
  if (c.authorizer.is_policy()) throw Error(ErrorCode::BadRequest, std::string(what) + ": authorizer is POLICY");
  return c.authorizer.key_id();
}

Date need_date(const std::string& text, std::string_view what) {
  auto d = Date::try_parse(text);
  if (!d) throw Error(ErrorCode::BadRequest, std::string(what) + ": bad date \"" + text + "\"");
  return *d;
}

}  // namespace

Credential issue_guarantor_credential(const SigningKey& guarantor, const PublicKeyId& payer, const Money& limit,
                                      const Date& expiry) {
  if (limit.minor <= 0) throw Error(ErrorCode::BadRequest, "guarantor limit must be positive");
  Credential c;
  c.local_constants = {{"CG_KEY", guarantor.id().str()}, {"PAYER_KEY", payer.str()}};
  c.authorizer = Principal::key(guarantor.id());
  c.licensees = PrincipalExpr::of(payer);
  c.conditions.clauses.push_back(
      {ConditionExpr::all_of({
           attr_eq("app_domain", std::string(kAppDomain)),
           attr_eq("currency", limit.currency),
           attr_num("amount", CompareOp::Lt, format_minor_units(limit.minor + 1)),
           ConditionExpr::compare({"date", false}, CompareOp::Lt, {expiry.str(), true}),
       }),
       true});
  return sign_credential(std::move(c), guarantor);
}

Credential make_microcheck(const SigningKey& payer, const PublicKeyId& merchant, const Money& amount,
                           const std::string& nonce, const Date& date) {
  Credential c;
  c.local_constants = {{"PAYER_KEY", payer.id().str()}, {"MERCHANT_KEY", merchant.str()}};
  c.authorizer = Principal::key(payer.id());
  c.licensees = PrincipalExpr::of(merchant);
  c.conditions.clauses.push_back({ConditionExpr::all_of({
                                      attr_eq("app_domain", std::string(kAppDomain)),
                                      attr_eq("currency", amount.currency),
                                      attr_eq("amount", amount.amount_str()),
                                      attr_eq("nonce", nonce),
                                      attr_eq("date", date.str()),
                                  }),
                                  true});
  return sign_credential(std::move(c), payer);
}

GuarantorView view_guarantor(const Credential& cred) {
  auto terms = conjunction_terms(cred.conditions);
  GuarantorView v;
  v.guarantor_key = key_authorizer(cred, "guarantor credential");
  v.payer_key = single_licensee(cred, "guarantor credential");
  const auto& amount = need(terms, "amount", CompareOp::Lt, "guarantor credential");
  auto bound = parse_minor_units(amount.literal.text);
  if (!bound || !amount.attr.numeric) throw Error(ErrorCode::BadRequest, "guarantor credential: bad amount bound");
  v.per_check_limit.minor = *bound - 1;
  v.per_check_limit.currency = need(terms, "currency", CompareOp::Eq, "guarantor credential").literal.text;
  v.expiry = need_date(need(terms, "date", CompareOp::Lt, "guarantor credential").literal.text, "guarantor credential");
  return v;
}

MicrocheckView view_microcheck(const Credential& cred) {
  auto terms = conjunction_terms(cred.conditions);
  MicrocheckView v;
  v.payer_key = key_authorizer(cred, "microcheck");
  v.merchant_key = single_licensee(cred, "microcheck");
  auto minor = parse_minor_units(need(terms, "amount", CompareOp::Eq, "microcheck").literal.text);
  if (!minor) throw Error(ErrorCode::BadRequest, "microcheck: bad amount");
  v.amount.minor = *minor;
  v.amount.currency = need(terms, "currency", CompareOp::Eq, "microcheck").literal.text;
  v.nonce = need(terms, "nonce", CompareOp::Eq, "microcheck").literal.text;
  v.date = need_date(need(terms, "date", CompareOp::Eq, "microcheck").literal.text, "microcheck");
  return v;
}

Credential Checkbook::write(const PublicKeyId& merchant, const Money& amount, const std::string& nonce,
                            const Date& date) {
  bool hex = std::all_of(nonce.begin(), nonce.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); });
  if (nonce.size() < kMinNonceHex || !hex)
    throw Error(ErrorCode::BadRequest, "nonce must be at least 12 hex digits");
  if (used_.count(nonce)) throw Error(ErrorCode::StaleNonce, "nonce " + nonce + " already used by this payer");
  Credential c = make_microcheck(payer_, merchant, amount, nonce, date);
  used_.insert(nonce);
  return c;
}

std::string Checkbook::fresh_nonce(crypto::RandomSource& rng) const {
  for (;;) {
    std::string n = rng.hex(8);
    if (!used_.count(n)) return n;
  }
}

Credential make_merchant_policy(const PublicKeyId& merchant, const std::vector<PublicKeyId>& guarantors) {
  if (guarantors.empty()) throw Error(ErrorCode::ConfigError, "merchant policy needs at least one guarantor");
  std::vector<PublicKeyId> sorted = guarantors;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  Credential c;
  c.local_constants.emplace_back("MERCHANT_KEY", merchant.str());
  std::vector<PrincipalExpr> gs;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    c.local_constants.emplace_back(sorted.size() == 1 ? "CG_KEY" : "CG" + std::to_string(i + 1) + "_KEY",
                                   sorted[i].str());
    gs.push_back(PrincipalExpr::of(sorted[i]));
  }
  PrincipalExpr g = gs.size() == 1 ? gs.front() : PrincipalExpr::any_of(std::move(gs));
  c.authorizer = Principal::policy();
  c.licensees = PrincipalExpr::all_of({std::move(g), PrincipalExpr::of(merchant)});
  return c;
}

ActionAttributeSet payment_action(const market::Offer& offer, std::int64_t purchased_mbps, const Money& amount,
                                  const std::string& nonce, const Date& date) {
  if (purchased_mbps <= 0) throw Error(ErrorCode::BadRequest, "purchased bandwidth must be positive");
  ActionAttributeSet a;
  a.set("app_domain", std::string(kAppDomain));
  a.set("currency", amount.currency);
  a.set("amount", amount.amount_str());
  a.set("nonce", nonce);
  a.set("date", date.str());
  a.set("bandwidth", std::to_string(purchased_mbps));
  a.set("link_name", offer.link.name());
  a.set("full_amount", format_minor_units(amount.minor * offer.bandwidth_mbps / purchased_mbps));
  if (offer.qos_class != market::QosClass::Reserved) a.set("qos_class", std::string(market::to_string(offer.qos_class)));
  if (!offer.path_hint.empty()) {
    std::string p;
    for (const auto& h : offer.path_hint) p += (p.empty() ? "" : ",") + h;
    a.set("path", p);
  }
  return a;
}

bool verify_payment(const Credential& merchant_policy, const Credential& guarantor, const Credential& offer,
                    const Credential& check, const ActionAttributeSet& action) {
  const Credential policy[] = {merchant_policy};
  const Credential creds[] = {guarantor, offer, check};
  return check_compliance(policy, creds, {}, action);
}

}  // namespace bandx::payments
