#include "bandx/isp/capacity.hpp"

#include <algorithm>

namespace bandx::isp {

std::int64_t IntervalLedger::peak_load(const Interval& window) const {
  // Load is piecewise constant and only rises at a charge start, so the peak
  // is reached at the window start or at some start inside the window.
  std::vector<SimTime> probes{window.start};
  for (const auto& c : charges_)
    if (window.contains(c.interval.start)) probes.push_back(c.interval.start);
  std::int64_t peak = 0;
  for (SimTime t : probes) peak = std::max(peak, load_at(t));
  return peak;
}

std::int64_t IntervalLedger::load_at(SimTime t) const {
  std::int64_t sum = 0;
  for (const auto& c : charges_)
    if (c.interval.contains(t)) sum += c.mbps;
  return sum;
}

std::size_t IntervalLedger::release(const std::string& reservation_id) {
  auto before = charges_.size();
  std::erase_if(charges_, [&](const Charge& c) { return c.reservation_id == reservation_id; });
  return before - charges_.size();
}

}  // namespace bandx::isp
