#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandx/market/offer.hpp"

namespace bandx::market {

struct OfferQuery {
  std::string from;
  std::string to;
  std::int64_t min_bandwidth_mbps = 0;
  std::optional<Money> max_total_price;
  Date needed_on;
  std::string currency = "USD";
  QosClass qos_class = QosClass::Reserved;
};

struct PlanStep {
  Offer offer;
  std::int64_t purchased_mbps = 0;
  Money price;
};

struct PathPlan {
  std::vector<PlanStep> steps;
  Money total_price;
};

// purchased == offered, or less than offered when the offer permits it.
bool validate_unbundling(const Offer& offer, std::int64_t purchased_mbps);

// ceil(min_price * purchased / offered) in minor units.
Money prorated_price(const Offer& offer, std::int64_t purchased_mbps);

// Whether an offer can carry a segment of a plan for q.
bool eligible_for(const Offer& offer, const OfferQuery& q);

// Cheapest plan from q.from to q.to over eligible offers. Ties resolve to the
// lexicographically smallest sequence of offer ids. Throws NoPath.
PathPlan compose_path(std::span<const Offer> offers, const OfferQuery& q);

// Throws std::logic_error naming the violated plan invariant.
void check_plan(const PathPlan& plan, const OfferQuery& q);

}  // namespace bandx::market
