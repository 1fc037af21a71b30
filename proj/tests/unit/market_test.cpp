#include <thread>

#include "doctest.h"
#include "support/golden.hpp"
#include "support/offer_graphs.hpp"

#include "bandx/common/error.hpp"
#include "bandx/market/repository.hpp"

using namespace bandx;
using namespace bandx::market;
using credential::SigningKey;
using credential::Credential;

namespace {

const Date kToday = Date::parse("20031119");

Credential offer_cred(const SigningKey& isp, const std::string& from, const std::string& to, std::int64_t mbps,
                      std::int64_t price_minor, bool unbundle = true, const std::string& expires = "20031201") {
  OfferTerms t;
  t.link = {from, to};
  t.bandwidth_mbps = mbps;
  t.min_price = Money{price_minor, "USD"};
  t.expires = Date::parse(expires);
  t.unbundling_allowed = unbundle;
  return make_offer_credential(t, isp);
}

OfferQuery query(const std::string& from, const std::string& to, std::int64_t mbps) {
  OfferQuery q;
  q.from = from;
  q.to = to;
  q.min_bandwidth_mbps = mbps;
  q.needed_on = kToday;
  return q;
}

const SigningKey& isp_a() { static const SigningKey k = SigningKey::derive("test:isp-a"); return k; }
const SigningKey& isp_b() { static const SigningKey k = SigningKey::derive("test:isp-b"); return k; }

}  // namespace

TEST_CASE("post the worked-example offer") {
  OfferRepository repo;
  Offer o = repo.post_offer(golden::offer(), kToday);
  CHECK(o.link == Link{"Dublin", "NYC"});
  CHECK(o.bandwidth_mbps == 50);
  CHECK(o.min_price == Money{300, "USD"});
  CHECK(o.valid_until == Date::parse("20031119"));
  CHECK(o.unbundling_allowed);
  CHECK(o.isp_key == golden::nick().id());
  CHECK(o.offer_id.size() == 32);

  SUBCASE("posting twice is idempotent") {
    Offer again = repo.post_offer(golden::offer(), kToday);
    CHECK(again.offer_id == o.offer_id);
    CHECK(repo.size() == 1);
  }
}

TEST_CASE("offer validation on post") {
  OfferRepository repo;
  SUBCASE("missing bandwidth condition") {
    std::string text = golden::offer_text();
    auto pos = text.find("      &bandwidth <= \"50Mbps\" &&\n");
    text.erase(pos, std::string("      &bandwidth <= \"50Mbps\" &&\n").size());
    auto cred = golden::signed_from(text, golden::nick());
    CHECK_THROWS_WITH_AS(repo.post_offer(cred, kToday), doctest::Contains("bandwidth"), Error);
  }
  SUBCASE("unsigned") {
    auto cred = credential::parse_credential(golden::offer_text());
    try {
      repo.post_offer(cred, kToday);
      FAIL("expected BadSignature");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadSignature);
    }
  }
  SUBCASE("expired") {
    try {
      repo.post_offer(golden::offer(), Date::parse("20031120"));
      FAIL("expected Expired");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Expired);
    }
  }
  CHECK(repo.size() == 0);
}

TEST_CASE("generated offers round-trip their terms") {
  OfferTerms t;
  t.link = {"Rome", "Paris"};
  t.bandwidth_mbps = 100;
  t.min_price = Money{1234, "EUR"};
  t.expires = Date::parse("20031125");
  t.unbundling_allowed = false;
  t.qos_class = QosClass::PremiumBestEffort;
  t.path_hint = {"R1", "R2", "R3"};
  Offer o = derive_offer(make_offer_credential(t, isp_a()));
  CHECK(o.link == t.link);
  CHECK(o.bandwidth_mbps == 100);
  CHECK(o.min_price == t.min_price);
  CHECK(o.valid_until == Date::parse("20031124"));
  CHECK_FALSE(o.unbundling_allowed);
  CHECK(o.qos_class == QosClass::PremiumBestEffort);
  CHECK(o.path_hint == t.path_hint);
}

TEST_CASE("link names split on the last hyphen") {
  CHECK(Link::from_name("Dublin-NYC") == Link{"Dublin", "NYC"});
  CHECK(Link::from_name("New-York-Boston") == Link{"New-York", "Boston"});
  CHECK_FALSE(Link::from_name("Dublin"));
  CHECK_FALSE(Link::from_name("Dublin-"));
}

TEST_CASE("query ordering and filtering") {
  OfferRepository repo;
  repo.post_offer(offer_cred(isp_a(), "Dublin", "NYC", 50, 300), kToday);
  repo.post_offer(offer_cred(isp_b(), "Dublin", "NYC", 50, 250), kToday);
  repo.post_offer(offer_cred(isp_b(), "Dublin", "LAX", 50, 100), kToday);

  auto got = repo.query_offers(query("Dublin", "NYC", 50));
  REQUIRE(got.size() == 2);
  CHECK(got[0].min_price.minor == 250);
  CHECK(got[1].min_price.minor == 300);

  CHECK(repo.query_offers(query("Dublin", "NYC", 80)).empty());

  repo.post_offer(offer_cred(isp_a(), "Atlanta", "Dublin", 100, 600), kToday);
  auto big = repo.query_offers(query("Atlanta", "Dublin", 50));
  REQUIRE(big.size() == 1);
  CHECK(big[0].bandwidth_mbps == 100);

  auto q = query("Dublin", "NYC", 50);
  q.max_total_price = Money{260, "USD"};
  CHECK(repo.query_offers(q).size() == 1);
}

TEST_CASE("equal prices tie-break by offer id") {
  OfferRepository repo;
  for (int i = 0; i < 5; ++i)
    repo.post_offer(offer_cred(SigningKey::derive("tie:" + std::to_string(i)), "A", "B", 10, 100), kToday);
  auto got = repo.query_offers(query("A", "B", 10));
  REQUIRE(got.size() == 5);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].offer_id < got[i].offer_id);
}

TEST_CASE("expiry") {
  OfferRepository repo;
  CHECK(repo.expire_offers(kToday) == 0);
  repo.post_offer(offer_cred(isp_a(), "A", "B", 10, 100, true, "20031119"), Date::parse("20031118"));
  repo.post_offer(offer_cred(isp_a(), "A", "B", 10, 120, true, "20031130"), Date::parse("20031118"));
  CHECK(repo.expire_offers(kToday) == 1);
  CHECK(repo.size() == 1);
}

TEST_CASE("expired offers are never served") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 30; ++iter) {
    OfferRepository repo;
    Date post_day = Date::parse("20031101");
    for (int i = 0; i < 10; ++i) {
      Date expires = post_day.plus_days(1 + static_cast<int>(rng() % 20));
      repo.post_offer(offer_cred(isp_a(), "A", "B", 10, 100 + static_cast<std::int64_t>(rng() % 50), true, expires.str()),
                      post_day);
    }
    Date now = post_day.plus_days(static_cast<int>(rng() % 22));
    repo.expire_offers(now);
    auto q = query("A", "B", 10);
    q.needed_on = now;
    for (const auto& o : repo.query_offers(q)) CHECK(o.valid_until >= now);
    for (const auto& o : repo.all()) CHECK(o.valid_until >= now);
  }
}

TEST_CASE("validate_unbundling and pro-rating") {
  Offer o = derive_offer(offer_cred(isp_a(), "A", "B", 100, 301, true));
  CHECK(validate_unbundling(o, 50));
  CHECK(validate_unbundling(o, 100));
  CHECK_FALSE(validate_unbundling(o, 101));
  CHECK(prorated_price(o, 50).minor == 151);
  CHECK(prorated_price(o, 100).minor == 301);
  Offer fixed = derive_offer(offer_cred(isp_a(), "A", "B", 100, 300, false));
  CHECK_FALSE(validate_unbundling(fixed, 50));
  CHECK(validate_unbundling(fixed, 100));
}

TEST_CASE("compose_path") {
  OfferRepository repo;
  repo.post_offer(offer_cred(isp_a(), "Rome", "Paris", 100, 400), kToday);
  repo.post_offer(offer_cred(isp_b(), "Paris", "Dublin", 50, 300), kToday);

  SUBCASE("two segments across ISPs") {
    PathPlan plan = repo.compose_path(query("Rome", "Dublin", 50));
    REQUIRE(plan.steps.size() == 2);
    CHECK(plan.steps[0].offer.link == Link{"Rome", "Paris"});
    CHECK(plan.steps[0].price.minor == 200);
    CHECK(plan.steps[1].offer.link == Link{"Paris", "Dublin"});
    CHECK(plan.total_price.minor == 500);
  }
  SUBCASE("cheaper direct offer dominates") {
    repo.post_offer(offer_cred(isp_a(), "Rome", "Dublin", 50, 450), kToday);
    PathPlan plan = repo.compose_path(query("Rome", "Dublin", 50));
    REQUIRE(plan.steps.size() == 1);
    CHECK(plan.total_price.minor == 450);
  }
  SUBCASE("no path") {
    CHECK_THROWS_AS(repo.compose_path(query("Rome", "Oslo", 50)), Error);
    CHECK_THROWS_AS(repo.compose_path(query("Rome", "Dublin", 60)), Error);
    auto q = query("Rome", "Dublin", 50);
    q.max_total_price = Money{499, "USD"};
    CHECK_THROWS_AS(repo.compose_path(q), Error);
  }
}

TEST_CASE("compose_path matches exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto g = graphs::random_graph(seed);
    std::vector<Offer> offers;
    for (const auto& c : g.creds) offers.push_back(derive_offer(c));
    for (int from = 0; from < 3; ++from) {
      OfferQuery q = query("L" + std::to_string(from), "L" + std::to_string(from + 3), 50);
      auto expected = graphs::brute_force_price(g.terms, q.from, q.to, 50);
      if (!expected) {
        CHECK_THROWS_AS(compose_path(offers, q), Error);
        continue;
      }
      PathPlan plan = compose_path(offers, q);
      CHECK_NOTHROW(check_plan(plan, q));
      CHECK(plan.total_price.minor == *expected);
    }
  }
}

TEST_CASE("replicated clearing houses answer identically") {
  OfferRepository a, b;
  auto g = graphs::random_graph(42);
  for (const auto& c : g.creds) a.post_offer(c, kToday);
  std::string exported = a.export_offers();
  CHECK(b.import_offers(exported, kToday) == a.size());
  CHECK(b.export_offers() == exported);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      auto q = query("L" + std::to_string(i), "L" + std::to_string(j), 40);
      auto ra = a.query_offers(q), rb = b.query_offers(q);
      REQUIRE(ra.size() == rb.size());
      for (std::size_t k = 0; k < ra.size(); ++k) CHECK(ra[k].offer_id == rb[k].offer_id);
    }
}

TEST_CASE("concurrent readers see whole offers") {
  OfferRepository repo;
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::thread reader([&] {
    while (!done) {
      for (const auto& o : repo.query_offers(query("A", "B", 10)))
        if (o.link.from != "A" || o.credential.conditions.clauses.empty()) ++bad;
    }
  });
  for (int i = 0; i < 60; ++i) repo.post_offer(offer_cred(isp_a(), "A", "B", 10, 100 + i), kToday);
  done = true;
  reader.join();
  CHECK(bad == 0);
  CHECK(repo.query_offers(query("A", "B", 10)).size() == 60);
}
