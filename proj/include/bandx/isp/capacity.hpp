#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bandx/common/time.hpp"

namespace bandx::isp {

// Half-open [start, end).
struct Interval {
  SimTime start;
  SimTime end;

  bool overlaps(const Interval& o) const { return start < o.end && o.start < end; }
  bool contains(SimTime t) const { return start <= t && t < end; }
  bool operator==(const Interval&) const = default;
};

struct Charge {
  std::string reservation_id;
  Interval interval;
  std::int64_t mbps = 0;
};

// Bandwidth committed on one directed link over time.
class IntervalLedger {
 public:
  explicit IntervalLedger(std::int64_t capacity_mbps = 0) : capacity_(capacity_mbps) {}

  std::int64_t capacity() const { return capacity_; }
  // Peak committed bandwidth at any instant inside `window`.
  std::int64_t peak_load(const Interval& window) const;
  std::int64_t load_at(SimTime t) const;
  bool fits(const Interval& window, std::int64_t mbps) const { return peak_load(window) + mbps <= capacity_; }

  void add(Charge c) { charges_.push_back(std::move(c)); }
  // Removes every charge of the reservation; returns how many.
  std::size_t release(const std::string& reservation_id);
  const std::vector<Charge>& charges() const { return charges_; }

 private:
  std::int64_t capacity_;
  std::vector<Charge> charges_;
};

}  // namespace bandx::isp
