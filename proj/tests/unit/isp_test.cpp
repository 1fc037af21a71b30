#include <random>
#include <set>

#include "doctest.h"
#include "support/fabric_world.hpp"

#include "bandx/payments/settlement.hpp"

using namespace fabric_world;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

std::int64_t load(World& w, const std::string& isp, const std::string& link, SimTime t) {
  return w.isp(isp).ledger(link)->load_at(t);
}

}  // namespace

TEST_CASE("topology parsing") {
  auto t = parse_topology(kTopology);
  CHECK(t.isps.size() == 2);
  CHECK(t.nes.size() == 5);
  CHECK(t.links.size() == 4);
  CHECK(t.ne_at("B", "Paris")->id == "PB");
  CHECK(parse_topology(render_topology(t)).links.size() == 4);
  CHECK(parse_topology("isp A\nne X A L\nne Y A M\nduplex X Y 10\n").links.size() == 2);
  CHECK_THROWS_WITH(parse_topology("isp A\nne X B L\n"), doctest::Contains("line 2"));
  CHECK_THROWS_AS(parse_topology("isp A\nisp B\nne X A L\nne Y B M\nlink X Y 10\n"), Error);
  CHECK_THROWS_AS(parse_topology("isp A\nne X A L\nne Y A M\nlink X Y -3\n"), Error);
  CHECK_THROWS_AS(parse_topology("isp A\nne X A L\nne Y A L\n"), Error);
  CHECK_THROWS_AS(parse_topology("frobnicate\n"), Error);
}

TEST_CASE("challenges") {
  World w;
  auto& a = w.isp("A");
  auto c1 = a.issue_challenge("R1", w.now);
  auto c2 = a.issue_challenge("R1", w.now);
  CHECK(c1.challenge_id != c2.challenge_id);
  CHECK(c1.challenge_id.size() == 32);
  CHECK(c1.ttl_seconds == 60);

  std::set<std::string> ids;
  for (int i = 0; i < 10000; ++i) ids.insert(a.issue_challenge("M1", w.now).challenge_id);
  CHECK(ids.size() == 10000);
}

TEST_CASE("spot reservation inside one ISP") {
  World w;
  auto offer = w.offer("A", "Rome", "Paris", 100, 400);
  auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50);
  auto out = w.isp("A").handle_spot_request("R1", req, w.now);
  CHECK_FALSE(out.referral);
  CHECK(out.reservation.state == ReservationState::Active);
  CHECK(out.reservation.reservation_id == "R1-1");
  REQUIRE(out.reservation.segments.size() == 1);
  CHECK(out.reservation.segments[0].link_name == "R1>PA");
  CHECK(load(w, "A", "R1>PA", w.now) == 50);
  CHECK(w.isp("A").elements().at("R1").active.count("R1-1"));
  CHECK(w.isp("A").pending_deposits() == 1);
  CHECK(w.isp("A").pdp().decisions() >= 2);
  CHECK(recompute_audit(*w.fabric).empty());
  CHECK(w.fabric->audit().empty());

  SUBCASE("replayed challenge changes nothing") {
    auto deposits = w.isp("A").pending_deposits();
    CHECK(code_of([&] { w.isp("A").handle_spot_request("R1", req, w.now); }) == ErrorCode::ReplayedChallenge);
    CHECK(w.isp("A").reservations().size() == 1);
    CHECK(w.isp("A").pending_deposits() == deposits);
  }
  SUBCASE("deposits settle at the clearing center") {
    payments::SettlementConfig cfg;
    cfg.trusted_guarantors = {w.guarantor.id()};
    payments::SettlementCenter csc(SigningKey::derive("fabric:csc").id(), cfg);
    auto report = csc.deposit_batch(w.isp("A").drain_deposits());
    REQUIRE(report.accepted.size() == 1);
    CHECK(csc.account_balance(w.isp("A").key_id(), "USD") == 200 - 2);
  }
}

TEST_CASE("path hint and hop-count routing") {
  World w;
  auto hinted = w.offer("A", "Rome", "Paris", 100, 400, true, market::QosClass::Reserved, {"R1", "M1", "PA"});
  auto out = w.isp("A").handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {hinted}, 0, 30), w.now);
  REQUIRE(out.reservation.segments.size() == 2);
  CHECK(out.reservation.segments[0] == Segment{"R1", "R1>M1"});
  CHECK(out.reservation.segments[1] == Segment{"M1", "M1>PA"});
  CHECK(load(w, "A", "R1>PA", w.now) == 0);

  auto bad = w.offer("A", "Rome", "Paris", 100, 400, true, market::QosClass::Reserved, {"R1", "PA", "M1"});
  CHECK(code_of([&] { w.isp("A").handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {bad}, 0, 30), w.now); }) ==
        ErrorCode::NoPath);
}

TEST_CASE("two-ISP spot purchase follows the boundary referral") {
  World w;
  std::vector<market::Offer> plan{w.offer("A", "Rome", "Paris", 100, 400), w.offer("B", "Paris", "Dublin", 50, 300)};
  auto first = w.isp("A").handle_spot_request("R1", w.request(RequestKind::Spot, "R1", plan, 0, 50), w.now);
  REQUIRE(first.referral);
  CHECK(first.referral->next_isp == "B");
  CHECK(first.referral->next_ne == "PB");
  CHECK(first.referral->location == "Paris");
  CHECK(first.referral->next_offer_index == 1);

  auto second = w.isp("B").handle_spot_request("PB", w.request(RequestKind::Spot, "PB", plan, 1, 50), w.now);
  CHECK_FALSE(second.referral);
  CHECK(load(w, "B", "PB>D1", w.now) == 50);
  CHECK(recompute_audit(*w.fabric).empty());
}

TEST_CASE("spot request failures") {
  World w;
  auto offer = w.offer("A", "Rome", "Paris", 100, 400);
  auto& a = w.isp("A");

  SUBCASE("expired challenge") {
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50);
    CHECK(code_of([&] { a.handle_spot_request("R1", req, w.now.plus(60)); }) == ErrorCode::ExpiredChallenge);
  }
  SUBCASE("unknown challenge") {
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50);
    req.challenge_id = std::string(32, '0');
    sign_request(req, w.customer);
    CHECK(code_of([&] { a.handle_spot_request("R1", req, w.now); }) == ErrorCode::UnknownChallenge);
  }
  SUBCASE("challenge from another element") {
    auto req = w.request(RequestKind::Spot, "M1", {offer}, 0, 50);
    CHECK(code_of([&] { a.handle_spot_request("R1", req, w.now); }) == ErrorCode::UnknownChallenge);
  }
  SUBCASE("bad signature leaves the challenge usable") {
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50);
    auto forged = req;
    forged.bandwidth_mbps = 60;
    CHECK(code_of([&] { a.handle_spot_request("R1", forged, w.now); }) == ErrorCode::BadSignature);
    CHECK_NOTHROW(a.handle_spot_request("R1", req, w.now));
  }
  SUBCASE("untrusted guarantor") {
    auto rogue = payments::issue_guarantor_credential(w.rogue, w.customer.id(), Money{100000, "USD"},
                                                      Date::parse("20040324"));
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50, 3600, {}, rogue);
    CHECK(code_of([&] { a.handle_spot_request("R1", req, w.now); }) == ErrorCode::PaymentRefused);
  }
  SUBCASE("under-payment") {
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 50);
    req.checks = w.checks_for({offer}, 0, 50, 1);
    sign_request(req, w.customer);
    CHECK(code_of([&] { a.handle_spot_request("R1", req, w.now); }) == ErrorCode::PaymentRefused);
  }
  SUBCASE("re-used check") {
    auto req = w.request(RequestKind::Spot, "R1", {offer}, 0, 10);
    a.handle_spot_request("R1", req, w.now);
    auto again = w.request(RequestKind::Spot, "R1", {offer}, 0, 10);
    again.checks = req.checks;
    sign_request(again, w.customer);
    CHECK(code_of([&] { a.handle_spot_request("R1", again, w.now); }) == ErrorCode::PaymentRefused);
  }
  SUBCASE("un-bundling prohibited") {
    auto whole = w.offer("A", "Rome", "Paris", 100, 400, false);
    CHECK(code_of([&] { a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {whole}, 0, 50), w.now); }) ==
          ErrorCode::UnbundlingProhibited);
    CHECK_NOTHROW(a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {whole}, 0, 100), w.now));
  }
  SUBCASE("capacity exhausted") {
    a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {offer}, 0, 80), w.now);
    CHECK(code_of([&] { a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {offer}, 0, 30), w.now); }) ==
          ErrorCode::CapacityExhausted);
    CHECK(load(w, "A", "R1>PA", w.now) == 80);
  }
  SUBCASE("premium best-effort is admitted without a charge") {
    auto premium = w.offer("A", "Rome", "Paris", 100, 100, true, market::QosClass::PremiumBestEffort);
    for (int i = 0; i < 3; ++i)
      a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {premium}, 0, 90), w.now);
    CHECK(load(w, "A", "R1>PA", w.now) == 0);
    CHECK(a.reservations().size() == 3);
  }
  SUBCASE("offer not starting here") {
    CHECK(code_of([&] { a.handle_spot_request("M1", w.request(RequestKind::Spot, "M1", {offer}, 0, 10), w.now); }) ==
          ErrorCode::BadRequest);
  }
  CHECK(recompute_audit(*w.fabric).empty());
  CHECK(w.fabric->audit().empty());
}

TEST_CASE("propagation is all or nothing") {
  World w;
  auto hinted = w.offer("A", "Rome", "Paris", 100, 400, true, market::QosClass::Reserved, {"R1", "M1", "PA"});
  auto& a = w.isp("A");
  a.fail_link_for_testing("M1>PA");
  CHECK(code_of([&] { a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {hinted}, 0, 40), w.now); }) ==
        ErrorCode::CapacityExhausted);
  CHECK(load(w, "A", "R1>M1", w.now) == 0);
  CHECK(a.reservations().empty());
  CHECK(a.pending_deposits() == 0);
  a.fail_link_for_testing("");
  CHECK_NOTHROW(a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {hinted}, 0, 40), w.now));
  CHECK(load(w, "A", "R1>M1", w.now) == 40);
  CHECK(load(w, "A", "M1>PA", w.now) == 40);
}

TEST_CASE("futures booking and activation") {
  World w;
  auto offer = w.offer("A", "Rome", "Paris", 100, 400);
  auto& a = w.isp("A");
  Interval slot{w.now.plus(3 * 86400), w.now.plus(3 * 86400 + 3600)};
  auto booked = a.book_future("R1", w.request(RequestKind::Future, "R1", {offer}, 0, 50, 0, slot), w.now);
  CHECK(credential::verify_signature(booked.reservation_credential));
  CHECK(a.elements().at("R1").active.empty());
  CHECK(a.reservations().at(booked.reservation_id).state == ReservationState::Notional);
  CHECK(load(w, "A", "R1>PA", slot.start) == 50);
  CHECK(load(w, "A", "R1>PA", w.now) == 0);

  SUBCASE("oversubscribed slot") {
    Interval overlap{slot.start.plus(1800), slot.end.plus(1800)};
    CHECK(code_of([&] {
            a.book_future("R1", w.request(RequestKind::Future, "R1", {offer}, 0, 60, 0, overlap), w.now);
          }) == ErrorCode::CapacityExhausted);
    Interval after{slot.end, slot.end.plus(600)};
    CHECK_NOTHROW(a.book_future("R1", w.request(RequestKind::Future, "R1", {offer}, 0, 60, 0, after), w.now));
  }
  SUBCASE("activation window") {
    CHECK(code_of([&] { a.activate_reservation("R1", booked.reservation_credential, slot.start.plus(-1)); }) ==
          ErrorCode::OutsideInterval);
    CHECK(code_of([&] { a.activate_reservation("R1", booked.reservation_credential, slot.end); }) ==
          ErrorCode::OutsideInterval);
    auto res = a.activate_reservation("R1", booked.reservation_credential, slot.start);
    CHECK(res.state == ReservationState::Active);
    CHECK(a.elements().at("R1").active.count(res.reservation_id));
    CHECK(load(w, "A", "R1>PA", slot.start) == 50);
  }
  SUBCASE("tampered or unknown credentials") {
    auto tampered = booked.reservation_credential;
    tampered.conditions.clauses[0].test.children[3].literal.text = "100";
    CHECK(code_of([&] { a.activate_reservation("R1", tampered, slot.start); }) == ErrorCode::BadSignature);
    auto& b = w.isp("B");
    CHECK(code_of([&] { b.activate_reservation("PB", booked.reservation_credential, slot.start); }) ==
          ErrorCode::UnknownReservation);
  }
  SUBCASE("interval must be in the future") {
    Interval past{w.now, w.now.plus(10)};
    CHECK(code_of([&] { a.book_future("R1", w.request(RequestKind::Future, "R1", {offer}, 0, 10, 0, past), w.now); }) ==
          ErrorCode::BadRequest);
  }
  SUBCASE("an unactivated booking is purged at its end") {
    a.expire_reservations(slot.end);
    CHECK(load(w, "A", "R1>PA", slot.start) == 0);
    CHECK(a.reservations().at(booked.reservation_id).state == ReservationState::Notional);
  }
  CHECK(recompute_audit(*w.fabric).empty());
  CHECK(w.fabric->audit().empty());
}

TEST_CASE("bookings survive competing spot load") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    World w;
    std::mt19937_64 rng(seed);
    auto offer = w.offer("A", "Rome", "Paris", 100, 400);
    auto& a = w.isp("A");
    Interval slot{w.now.plus(600 + static_cast<std::int64_t>(rng() % 3600)), {}};
    slot.end = slot.start.plus(600 + static_cast<std::int64_t>(rng() % 3600));
    std::int64_t mbps = 10 + static_cast<std::int64_t>(rng() % 91);
    auto booked = a.book_future("R1", w.request(RequestKind::Future, "R1", {offer}, 0, mbps, 0, slot), w.now);
    for (int i = 0; i < 40; ++i) {
      w.now = w.now.plus(static_cast<std::int64_t>(rng() % 200));
      if (w.now >= slot.start) break;
      try {
        a.handle_spot_request("R1",
                              w.request(RequestKind::Spot, "R1", {offer}, 0, 1 + static_cast<std::int64_t>(rng() % 100),
                                        1 + static_cast<std::int64_t>(rng() % 7200)),
                              w.now);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CapacityExhausted);
      }
      a.expire_reservations(w.now);
      REQUIRE(recompute_audit(*w.fabric).empty());
    }
    CHECK_NOTHROW(a.activate_reservation("R1", booked.reservation_credential, slot.start));
    CHECK(recompute_audit(*w.fabric).empty());
  }
}

TEST_CASE("keepalive payments and lapsing") {
  IspConfig cfg;
  cfg.keepalive_period_seconds = 600;
  World w(kTopology, cfg);
  auto offer = w.offer("A", "Rome", "Paris", 100, 400);
  auto& a = w.isp("A");
  auto res = a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {offer}, 0, 50, 7200), w.now).reservation;
  REQUIRE(res.next_payment_due);
  CHECK(*res.next_payment_due == w.now.plus(600));

  w.now = w.now.plus(500);
  auto due = a.keepalive_payment(res.reservation_id, w.checks_for({offer}, 0, 50), w.now);
  CHECK(due == res.next_payment_due->plus(600));
  CHECK(a.pending_deposits() == 2);

  CHECK(code_of([&] { a.keepalive_payment(res.reservation_id, w.checks_for({offer}, 0, 50, 1), w.now); }) ==
        ErrorCode::PaymentRefused);
  CHECK(*a.reservations().at(res.reservation_id).next_payment_due == due);
  CHECK(code_of([&] { a.keepalive_payment("R1-99", w.checks_for({offer}, 0, 50), w.now); }) ==
        ErrorCode::UnknownReservation);

  CHECK(a.expire_reservations(due) == 0);
  CHECK(a.expire_reservations(due.plus(1)) == 1);
  CHECK(a.reservations().at(res.reservation_id).state == ReservationState::Lapsed);
  CHECK(load(w, "A", "R1>PA", due) == 0);
  CHECK(recompute_audit(*w.fabric).empty());
}

TEST_CASE("expiry and teardown") {
  World w;
  auto offer = w.offer("A", "Rome", "Paris", 100, 400);
  auto& a = w.isp("A");
  auto r1 = a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {offer}, 0, 30, 100), w.now).reservation;
  auto r2 = a.handle_spot_request("R1", w.request(RequestKind::Spot, "R1", {offer}, 0, 30, 1000), w.now).reservation;
  CHECK(a.expire_reservations(w.now.plus(99)) == 0);
  CHECK(a.expire_reservations(w.now.plus(100)) == 1);
  CHECK(a.reservations().at(r1.reservation_id).state == ReservationState::Expired);
  CHECK(load(w, "A", "R1>PA", w.now.plus(100)) == 30);

  auto bad = credential::sign_message(SigningKey::derive("someone"), teardown_bytes(r2.reservation_id));
  CHECK(code_of([&] { a.teardown(r2.reservation_id, bad, w.now.plus(200)); }) == ErrorCode::BadSignature);
  a.teardown(r2.reservation_id, credential::sign_message(w.customer, teardown_bytes(r2.reservation_id)),
             w.now.plus(200));
  CHECK(a.reservations().at(r2.reservation_id).state == ReservationState::Expired);
  CHECK(load(w, "A", "R1>PA", w.now.plus(200)) == 0);
  CHECK(a.elements().at("R1").active.empty());
}

TEST_CASE("random operation storms keep the ledgers exact") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed * 7 + 1);
    std::string topo = "isp A\n";
    int n = 3 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) topo += "ne N" + std::to_string(i) + " A L" + std::to_string(i) + "\n";
    for (int i = 0; i + 1 < n; ++i)
      topo += "duplex N" + std::to_string(i) + " N" + std::to_string(i + 1) + " " + std::to_string(50 + rng() % 100) + "\n";
    for (int i = 0; i < n; ++i) {
      int j = static_cast<int>(rng() % n);
      if (j > i + 1) topo += "link N" + std::to_string(i) + " N" + std::to_string(j) + " 60\n";
    }
    World w(topo);
    std::vector<market::Offer> offers;
    for (int i = 0; i < 6; ++i) {
      int x = static_cast<int>(rng() % n), y = static_cast<int>(rng() % n);
      if (x == y) y = (x + 1) % n;
      offers.push_back(w.offer("A", "L" + std::to_string(x), "L" + std::to_string(y), 100, 200));
    }
    auto& a = w.isp("A");
    std::size_t accepted = 0;
    for (int step = 0; step < 60; ++step) {
      w.now = w.now.plus(static_cast<std::int64_t>(rng() % 120));
      const auto& o = offers[rng() % offers.size()];
      std::string ne = w.fabric->topology().ne_at("A", o.link.from)->id;
      try {
        if (rng() % 3 == 0) {
          Interval slot{w.now.plus(1 + static_cast<std::int64_t>(rng() % 900)), {}};
          slot.end = slot.start.plus(1 + static_cast<std::int64_t>(rng() % 900));
          a.book_future(ne, w.request(RequestKind::Future, ne, {o}, 0, 1 + rng() % 60, 0, slot), w.now);
        } else {
          a.handle_spot_request(ne, w.request(RequestKind::Spot, ne, {o}, 0, 1 + rng() % 60, 1 + rng() % 900), w.now);
        }
        ++accepted;
      } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::CapacityExhausted || e.code() == ErrorCode::NoPath));
      }
      for (const auto& [id, res] : a.reservations())
        if (res.state == ReservationState::Notional && res.charged && res.interval.contains(w.now) && rng() % 2)
          a.activate_reservation(ne, *res.reservation_credential, w.now);
      if (rng() % 4 == 0) a.expire_reservations(w.now);
      REQUIRE(recompute_audit(*w.fabric).empty());
      REQUIRE(a.audit().empty());
    }
    CHECK(a.pending_deposits() == accepted);
  }
}
