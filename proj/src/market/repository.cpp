#include "bandx/market/repository.hpp"

#include <algorithm>
#include <mutex>

#include "bandx/common/error.hpp"
#include "bandx/credential/signature.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::market {

Offer OfferRepository::post_offer(const credential::Credential& cred, Date today) {
  bool ok = false;
  try {
    ok = !cred.unchecked && credential::verify_signature(cred);
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) throw Error(ErrorCode::BadSignature, "offer credential signature does not verify");
  Offer offer = derive_offer(cred);
  if (offer.valid_until < today)
    throw Error(ErrorCode::Expired, "offer expired on " + offer.valid_until.str());

  std::unique_lock lock(mu_);
  auto [it, inserted] = by_id_.try_emplace(offer.offer_id, offer);
  if (inserted) by_link_[{offer.link.from, offer.link.to}].insert(offer.offer_id);
  return it->second;
}

std::vector<Offer> OfferRepository::verified(std::vector<Offer> offers) const {
  std::vector<credential::Credential> creds;
  creds.reserve(offers.size());
  for (const auto& o : offers) creds.push_back(o.credential);
  auto ok = kernels::verify_credentials(creds, exec_);
  std::vector<Offer> out;
  for (std::size_t i = 0; i < offers.size(); ++i)
    if (ok[i]) out.push_back(std::move(offers[i]));
  return out;
}

std::vector<Offer> OfferRepository::query_offers(const OfferQuery& q) const {
  std::vector<Offer> matches;
  {
    std::shared_lock lock(mu_);
    auto it = by_link_.find({q.from, q.to});
    if (it == by_link_.end()) return {};
    for (const auto& id : it->second) {
      const Offer& o = by_id_.at(id);
      if (o.valid_until < q.needed_on || o.bandwidth_mbps < q.min_bandwidth_mbps) continue;
      if (q.max_total_price && (o.min_price.currency != q.max_total_price->currency ||
                                prorated_price(o, q.min_bandwidth_mbps).minor > q.max_total_price->minor))
        continue;
      matches.push_back(o);
    }
  }
  matches = verified(std::move(matches));
  std::sort(matches.begin(), matches.end(), [](const Offer& a, const Offer& b) {
    return a.min_price.minor != b.min_price.minor ? a.min_price.minor < b.min_price.minor : a.offer_id < b.offer_id;
  });
  return matches;
}

std::size_t OfferRepository::expire_offers(Date now) {
  std::unique_lock lock(mu_);
  std::size_t removed = 0;
  for (auto it = by_id_.begin(); it != by_id_.end();) {
    if (it->second.valid_until < now) {
      by_link_[{it->second.link.from, it->second.link.to}].erase(it->first);
      it = by_id_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

PathPlan OfferRepository::compose_path(const OfferQuery& q) const {
  std::vector<Offer> snapshot;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, o] : by_id_)
      if (eligible_for(o, q)) snapshot.push_back(o);
  }
  snapshot = verified(std::move(snapshot));
  return market::compose_path(snapshot, q);
}

std::string OfferRepository::export_offers() const {
  std::vector<credential::Credential> creds;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, o] : by_id_) creds.push_back(o.credential);
  }
  return credential::render_credential_blocks(creds);
}

std::size_t OfferRepository::import_offers(std::string_view text, Date today) {
  std::size_t before = size();
  for (const auto& cred : credential::parse_credential_blocks(text)) {
    try {
      post_offer(cred, today);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Expired) throw;
    }
  }
  return size() - before;
}

std::size_t OfferRepository::size() const {
  std::shared_lock lock(mu_);
  return by_id_.size();
}

std::vector<Offer> OfferRepository::all() const {
  std::shared_lock lock(mu_);
  std::vector<Offer> out;
  for (const auto& [id, o] : by_id_) out.push_back(o);
  return out;
}

}  // namespace bandx::market
