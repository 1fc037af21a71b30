#include "bandx/market/path.hpp"

#include <map>
#include <queue>
#include <stdexcept>

#include "bandx/common/error.hpp"

namespace bandx::market {

bool validate_unbundling(const Offer& offer, std::int64_t purchased_mbps) {
  if (purchased_mbps == offer.bandwidth_mbps) return true;
  return purchased_mbps > 0 && purchased_mbps < offer.bandwidth_mbps && offer.unbundling_allowed;
}

Money prorated_price(const Offer& offer, std::int64_t purchased_mbps) {
  return Money{ceil_div(offer.min_price.minor * purchased_mbps, offer.bandwidth_mbps), offer.min_price.currency};
}

bool eligible_for(const Offer& offer, const OfferQuery& q) {
  return offer.min_price.currency == q.currency && offer.qos_class == q.qos_class && offer.valid_until >= q.needed_on &&
         validate_unbundling(offer, q.min_bandwidth_mbps);
}

namespace {

struct Label {
  std::int64_t price = 0;
  std::vector<std::size_t> edges;  // indices into the eligible offer list
  std::vector<std::string> ids;

  bool operator<(const Label& o) const { return price != o.price ? price < o.price : ids < o.ids; }
};

struct Worse {
  bool operator()(const std::pair<Label, std::string>& a, const std::pair<Label, std::string>& b) const {
    return b.first < a.first;
  }
};

}  // namespace

PathPlan compose_path(std::span<const Offer> offers, const OfferQuery& q) {
  if (q.min_bandwidth_mbps <= 0) throw Error(ErrorCode::BadRequest, "min_bandwidth_mbps must be positive");
  std::vector<const Offer*> edges;
  std::vector<std::int64_t> cost;
  for (const auto& o : offers) {
    if (!eligible_for(o, q)) continue;
    edges.push_back(&o);
    cost.push_back(prorated_price(o, q.min_bandwidth_mbps).minor);
  }
  std::multimap<std::string, std::size_t> out_edges;
  for (std::size_t i = 0; i < edges.size(); ++i) out_edges.emplace(edges[i]->link.from, i);

  // Dijkstra over locations; prices are positive so labels only grow.
  std::map<std::string, Label> best;
  std::priority_queue<std::pair<Label, std::string>, std::vector<std::pair<Label, std::string>>, Worse> frontier;
  best[q.from] = Label{};
  frontier.push({Label{}, q.from});
  std::map<std::string, bool> settled;
  while (!frontier.empty()) {
    auto [label, node] = frontier.top();
    frontier.pop();
    if (settled[node]) continue;
    settled[node] = true;
    if (node == q.to) break;
    auto [lo, hi] = out_edges.equal_range(node);
    for (auto it = lo; it != hi; ++it) {
      std::size_t e = it->second;
      const std::string& next = edges[e]->link.to;
      if (settled[next]) continue;
      Label cand = label;
      cand.price += cost[e];
      cand.edges.push_back(e);
      cand.ids.push_back(edges[e]->offer_id);
      auto found = best.find(next);
      if (found == best.end() || cand < found->second) {
        best[next] = cand;
        frontier.push({cand, next});
      }
    }
  }
  auto found = best.find(q.to);
  if (q.from == q.to || found == best.end())
    throw Error(ErrorCode::NoPath, "no eligible offers connect " + q.from + " to " + q.to);
  PathPlan plan;
  plan.total_price = Money{0, q.currency};
  for (std::size_t e : found->second.edges) {
    Money price = prorated_price(*edges[e], q.min_bandwidth_mbps);
    plan.total_price.minor += price.minor;
    plan.steps.push_back({*edges[e], q.min_bandwidth_mbps, price});
  }
  if (q.max_total_price && plan.total_price.minor > q.max_total_price->minor)
    throw Error(ErrorCode::NoPath, "cheapest path costs " + plan.total_price.amount_str() + ", above the limit");
  check_plan(plan, q);
  return plan;
}

void check_plan(const PathPlan& plan, const OfferQuery& q) {
  if (plan.steps.empty()) throw std::logic_error("plan has no segments");
  if (plan.steps.front().offer.link.from != q.from || plan.steps.back().offer.link.to != q.to)
    throw std::logic_error("plan does not join the requested endpoints");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    if (i > 0 && plan.steps[i - 1].offer.link.to != s.offer.link.from) throw std::logic_error("segments do not chain");
    if (s.purchased_mbps != plan.steps.front().purchased_mbps) throw std::logic_error("purchased bandwidth varies");
    if (s.purchased_mbps > s.offer.bandwidth_mbps) throw std::logic_error("segment oversold");
    if (s.price != prorated_price(s.offer, s.purchased_mbps)) throw std::logic_error("segment mispriced");
    total += s.price.minor;
  }
  if (total != plan.total_price.minor) throw std::logic_error("total price is not the segment sum");
}

}  // namespace bandx::market
