#pragma once
// A small fixed cast of payers, merchants and a guarantor, plus builders for
// valid and deliberately broken transaction records.

#include <random>
#include <string>
#include <vector>

#include "bandx/common/error.hpp"
#include "bandx/market/offer.hpp"
#include "bandx/payments/instruments.hpp"
#include "bandx/payments/record.hpp"

namespace world {

using namespace bandx;
using namespace bandx::payments;

enum class Flaw { None, OverLimit, RogueGuarantor, TamperedAmount, ForgedPayer, WrongMerchant };

struct Built {
  TransactionRecord record;
  bool valid = true;
  std::string payer;
  std::string nonce;
  std::int64_t amount = 0;
};

struct PaymentWorld {
  SigningKey guarantor = SigningKey::derive("world:cg");
  SigningKey rogue = SigningKey::derive("world:rogue-cg");
  SigningKey csc = SigningKey::derive("world:csc");
  std::vector<SigningKey> payers;
  std::vector<SigningKey> merchants;
  std::vector<Credential> cwcs;
  std::vector<Credential> rogue_cwcs;
  std::vector<market::Offer> offers;
  Date today = Date::parse("20031119");

  PaymentWorld(int n_payers = 4, int n_merchants = 3) {
    for (int i = 0; i < n_payers; ++i) {
      payers.push_back(SigningKey::derive("world:payer" + std::to_string(i)));
      cwcs.push_back(issue_guarantor_credential(guarantor, payers.back().id(), Money{1000, "USD"},
                                                Date::parse("20040324")));
      rogue_cwcs.push_back(issue_guarantor_credential(rogue, payers.back().id(), Money{1000, "USD"},
                                                      Date::parse("20040324")));
    }
    for (int i = 0; i < n_merchants; ++i) {
      merchants.push_back(SigningKey::derive("world:merchant" + std::to_string(i)));
      market::OfferTerms t;
      t.link = {"M" + std::to_string(i), "M" + std::to_string(i + 1)};
      t.bandwidth_mbps = 100;
      t.min_price = Money{300, "USD"};
      t.expires = Date::parse("20031201");
      offers.push_back(market::derive_offer(market::make_offer_credential(t, merchants.back())));
    }
  }

  // Pays the pro-rated price for `mbps` of merchant m's offer.
  Built build(int p, int m, std::int64_t mbps, const std::string& nonce, Flaw flaw = Flaw::None) const {
    const auto& offer = offers[static_cast<std::size_t>(m)];
    Money amount{ceil_div(offer.min_price.minor * mbps, offer.bandwidth_mbps), "USD"};
    if (flaw == Flaw::OverLimit) amount.minor = 1000 + 1 + static_cast<std::int64_t>(nonce.size());
    const SigningKey& payer = payers[static_cast<std::size_t>(p)];
    const SigningKey forger = SigningKey::derive("world:forger");
    Built b;
    b.payer = payer.id().str();
    b.nonce = nonce;
    b.amount = amount.minor;
    b.valid = flaw == Flaw::None;

    const auto& merchant = flaw == Flaw::WrongMerchant ? merchants[static_cast<std::size_t>((m + 1) % merchants.size())]
                                                       : merchants[static_cast<std::size_t>(m)];
    Credential check = make_microcheck(payer, merchant.id(), amount, nonce, today);
    if (flaw == Flaw::ForgedPayer) {
      // Claims the payer as authorizer but is signed by someone else.
      Credential forged = make_microcheck(forger, merchant.id(), amount, nonce, today);
      forged.authorizer = credential::Principal::key(payer.id());
      forged.local_constants[0].second = payer.id().str();
      check = forged;
    }
    b.record.microcheck = check;
    b.record.offer = offer.credential;
    b.record.guarantor = (flaw == Flaw::RogueGuarantor ? rogue_cwcs : cwcs)[static_cast<std::size_t>(p)];
    b.record.action = payment_action(offer, mbps, amount, nonce, today);
    if (flaw == Flaw::TamperedAmount) b.record.action.set("amount", format_minor_units(amount.minor + 1));
    b.record.merchant_key = merchants[static_cast<std::size_t>(m)].id();
    b.record.received_at = today;
    return b;
  }
};

}  // namespace world
