#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bandx {

// Calendar day rendered as fixed-width YYYYMMDD; lexicographic order on the
// rendering equals chronological order.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  static std::optional<Date> try_parse(std::string_view yyyymmdd);
  static Date parse(std::string_view yyyymmdd);

  std::string str() const;
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }
  std::chrono::sys_days days() const { return days_; }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

// Simulation clock instant: whole seconds since 1970-01-01T00:00:00Z.
struct SimTime {
  std::int64_t seconds = 0;

  SimTime plus(std::int64_t s) const { return SimTime{seconds + s}; }
  auto operator<=>(const SimTime&) const = default;
};

Date date_of(SimTime t);
SimTime start_of(Date d);

// Accepts either an integer second count or `YYYY-MM-DDTHH:MM:SSZ`.
std::optional<SimTime> try_parse_time(std::string_view text);
std::string format_time(SimTime t);

}  // namespace bandx
