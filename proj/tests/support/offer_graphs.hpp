#pragma once
// Seeded random offer graphs plus an exhaustive simple-path oracle that works
// from the raw terms rather than the derived Offer structs.

#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bandx/market/offer.hpp"

namespace graphs {

using namespace bandx;

struct GeneratedGraph {
  std::vector<market::OfferTerms> terms;
  std::vector<credential::Credential> creds;
};

inline const credential::SigningKey& isp_key(int i) {
  static const std::vector<credential::SigningKey> keys = [] {
    std::vector<credential::SigningKey> k;
    for (int j = 0; j < 3; ++j) k.push_back(credential::SigningKey::derive("graph-isp:" + std::to_string(j)));
    return k;
  }();
  return keys[static_cast<std::size_t>(i)];
}

inline GeneratedGraph random_graph(std::uint64_t seed, int max_nodes = 8, int max_offers = 14) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  GeneratedGraph g;
  int nodes = 2 + pick(max_nodes - 1);
  int offers = 1 + pick(max_offers);
  for (int i = 0; i < offers; ++i) {
    int a = pick(nodes), b = pick(nodes);
    if (a == b) b = (a + 1) % nodes;
    market::OfferTerms t;
    t.link = {"L" + std::to_string(a), "L" + std::to_string(b)};
    static const int bws[] = {40, 50, 100, 200};
    t.bandwidth_mbps = bws[pick(4)];
    t.min_price = Money{1 + pick(900), "USD"};
    t.expires = Date::parse("20040101");
    t.unbundling_allowed = pick(3) != 0;
    g.terms.push_back(t);
    g.creds.push_back(market::make_offer_credential(t, isp_key(pick(3))));
  }
  return g;
}

// Minimum total price over all simple paths from `from` to `to` buying `mbps`
// on every segment; nullopt when none exists.
inline std::optional<std::int64_t> brute_force_price(const std::vector<market::OfferTerms>& terms,
                                                     const std::string& from, const std::string& to,
                                                     std::int64_t mbps) {
  auto usable = [&](const market::OfferTerms& t) {
    return t.bandwidth_mbps == mbps || (t.bandwidth_mbps > mbps && t.unbundling_allowed);
  };
  auto price = [&](const market::OfferTerms& t) {
    // smallest integer p with p * bandwidth >= min_price * mbps
    std::int64_t p = 0;
    while (p * t.bandwidth_mbps < t.min_price.minor * mbps) ++p;
    return p;
  };
  std::optional<std::int64_t> best;
  std::vector<std::string> visited{from};
  std::function<void(const std::string&, std::int64_t)> dfs = [&](const std::string& at, std::int64_t cost) {
    if (at == to) {
      if (!best || cost < *best) best = cost;
      return;
    }
    for (const auto& t : terms) {
      if (t.link.from != at || !usable(t)) continue;
      if (std::find(visited.begin(), visited.end(), t.link.to) != visited.end()) continue;
      visited.push_back(t.link.to);
      dfs(t.link.to, cost + price(t));
      visited.pop_back();
    }
  };
  dfs(from, 0);
  return best;
}

}  // namespace graphs
