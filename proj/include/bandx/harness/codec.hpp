#pragma once
// Payload layouts for the domain objects carried by envelopes.

#include "bandx/harness/envelope.hpp"
#include "bandx/isp/protocol.hpp"
#include "bandx/market/path.hpp"
#include "bandx/payments/record.hpp"

namespace bandx::harness {

void put_credential(Payload& p, const std::string& block, const credential::Credential& c);
credential::Credential get_credential(const Payload& p, std::string_view block);
std::vector<credential::Credential> get_credentials(const Payload& p, std::string_view block);

void put_request(Payload& p, const isp::ReservationRequest& r);
isp::ReservationRequest get_request(const Payload& p);

void put_challenge(Payload& p, const isp::Challenge& c);
isp::Challenge get_challenge(const Payload& p);

// Structured fields only; the carried credentials stay with the ISP.
void put_reservation(Payload& p, const isp::Reservation& r);
isp::Reservation get_reservation(const Payload& p);

void put_referral(Payload& p, const isp::BoundaryReferral& r);
std::optional<isp::BoundaryReferral> get_referral(const Payload& p);

void put_query(Payload& p, const market::OfferQuery& q);
market::OfferQuery get_query(const Payload& p);

void put_plan(Payload& p, const market::PathPlan& plan);
market::PathPlan get_plan(const Payload& p);

std::string segments_str(const std::vector<isp::Segment>& segs);

}  // namespace bandx::harness
