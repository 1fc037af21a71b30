#include "bandx/market/offer.hpp"

#include "bandx/common/constants.hpp"
#include "bandx/common/crypto.hpp"
#include "bandx/common/error.hpp"
#include "bandx/credential/evaluate.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::market {

using namespace credential;

std::string_view to_string(QosClass q) {
  return q == QosClass::Reserved ? "reserved" : "premium_best_effort";
}

std::optional<QosClass> qos_from_string(std::string_view s) {
  if (s == "reserved") return QosClass::Reserved;
  if (s == "premium_best_effort") return QosClass::PremiumBestEffort;
  return std::nullopt;
}

std::optional<Link> Link::from_name(std::string_view name) {
  auto dash = name.rfind('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 == name.size()) return std::nullopt;
  return Link{std::string(name.substr(0, dash)), std::string(name.substr(dash + 1))};
}

std::string offer_id_of(const Credential& cred) {
  std::string material = canonical_bytes(cred);
  if (cred.signature) material += cred.signature->algorithm + ":" + cred.signature->value;
  return crypto::sha256_hex(material).substr(0, 32);
}

namespace {

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedOffer, why); }

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.empty()) return {};
    out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_csv(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

}  // namespace

Offer derive_offer(const Credential& cred) {
  if (cred.authorizer.is_policy()) malformed("offer must be authored by an ISP key");
  Offer o;
  o.isp_key = cred.authorizer.key_id();
  o.credential = cred;
  o.offer_id = offer_id_of(cred);

  bool have_link = false, have_bw = false, have_price = false, have_date = false, have_currency = false;
  for (const ConditionExpr* t : conjunction_terms(cred.conditions)) {
    const std::string& name = t->attr.name;
    const std::string& lit = t->literal.text;
    if (name == "link_name" && !t->attr.numeric && t->op == CompareOp::Eq) {
      auto link = Link::from_name(lit);
      if (!link) malformed("link_name '" + lit + "' is not <from>-<to>");
      o.link = *link;
      have_link = true;
    } else if (name == "bandwidth" && t->attr.numeric && (t->op == CompareOp::Le || t->op == CompareOp::Eq)) {
      auto prefix = numeric_prefix(lit);
      if (!prefix || prefix->find('.') != std::string::npos || prefix->front() == '-' || prefix->front() == '+')
        malformed("bandwidth '" + lit + "' is not a positive integer");
      o.bandwidth_mbps = std::stoll(*prefix);
      if (o.bandwidth_mbps <= 0) malformed("bandwidth must be positive");
      o.unbundling_allowed = t->op == CompareOp::Le;
      have_bw = true;
    } else if ((name == "amount" || name == "full_amount") && t->attr.numeric && t->op == CompareOp::Ge) {
      auto minor = parse_minor_units(lit);
      if (!minor || *minor <= 0) malformed("price '" + lit + "' is not a positive amount");
      o.min_price.minor = *minor;
      have_price = true;
    } else if (name == "date" && !t->attr.numeric && t->op == CompareOp::Lt) {
      auto d = Date::try_parse(lit);
      if (!d) malformed("expiry '" + lit + "' is not YYYYMMDD");
      o.valid_until = d->plus_days(-1);
      have_date = true;
    } else if (name == "currency" && !t->attr.numeric && t->op == CompareOp::Eq) {
      o.min_price.currency = lit;
      have_currency = true;
    } else if (name == "qos_class" && !t->attr.numeric && t->op == CompareOp::Eq) {
      auto q = qos_from_string(lit);
      if (!q) malformed("unknown qos_class '" + lit + "'");
      o.qos_class = *q;
    } else if (name == "path" && !t->attr.numeric && t->op == CompareOp::Eq) {
      o.path_hint = split_csv(lit);
      if (o.path_hint.empty()) malformed("path hint '" + lit + "' is empty");
    }
  }
  if (!have_link) malformed("missing link_name condition");
  if (!have_bw) malformed("missing bandwidth condition");
  if (!have_price) malformed("missing amount condition");
  if (!have_date) malformed("missing date expiry condition");
  if (!have_currency) malformed("missing currency condition");
  return o;
}

Credential make_offer_credential(const OfferTerms& terms, const SigningKey& isp) {
  Credential c;
  c.local_constants.emplace_back("ISP_KEY", isp.id().str());
  c.authorizer = Principal::key(isp.id());
  c.licensees = PrincipalExpr::anyone();
  std::vector<ConditionExpr> terms_list{
      attr_eq("app_domain", std::string(kAppDomain)),
      attr_eq("currency", terms.min_price.currency),
      attr_num("bandwidth", terms.unbundling_allowed ? CompareOp::Le : CompareOp::Eq,
               std::to_string(terms.bandwidth_mbps) + "Mbps", true),
      attr_eq("link_name", terms.link.name()),
      attr_num("full_amount", CompareOp::Ge, terms.min_price.amount_str()),
      ConditionExpr::compare({"date", false}, CompareOp::Lt, {terms.expires.str(), true}),
  };
  if (terms.qos_class != QosClass::Reserved) terms_list.push_back(attr_eq("qos_class", std::string(to_string(terms.qos_class))));
  if (!terms.path_hint.empty()) terms_list.push_back(attr_eq("path", join_csv(terms.path_hint)));
  c.conditions.clauses.push_back({ConditionExpr::all_of(std::move(terms_list)), true});
  return sign_credential(std::move(c), isp);
}

}  // namespace bandx::market
