#pragma once

#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "bandx/kernels/batch_verify.hpp"
#include "bandx/market/path.hpp"

namespace bandx::market {

// The clearing house offer store. Passive: it signs nothing and holds no
// money. Readers run concurrently; posts and expiry are serialized, and a
// reader never observes a half-indexed offer.
class OfferRepository {
 public:
  explicit OfferRepository(kernels::Execution exec = kernels::Execution::Parallel) : exec_(exec) {}

  // Throws BadSignature, MalformedOffer, or Expired (valid_until < today).
  // Idempotent on an identical credential.
  Offer post_offer(const credential::Credential& cred, Date today);

  // Unexpired offers on q's endpoints with enough capacity, cheapest first,
  // ties by offer id. Signatures are re-checked on the way out.
  std::vector<Offer> query_offers(const OfferQuery& q) const;

  // Removes offers with valid_until < now; returns how many.
  std::size_t expire_offers(Date now);

  PathPlan compose_path(const OfferQuery& q) const;

  // Blank-line separated credential texts in offer-id order.
  std::string export_offers() const;
  // Posts every credential in an export; returns the number newly stored.
  std::size_t import_offers(std::string_view text, Date today);

  std::size_t size() const;
  std::vector<Offer> all() const;

 private:
  std::vector<Offer> verified(std::vector<Offer> offers) const;

  kernels::Execution exec_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Offer> by_id_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> by_link_;
};

}  // namespace bandx::market
