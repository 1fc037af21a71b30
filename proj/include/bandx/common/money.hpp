#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bandx {

// Amounts travel as canonical decimal strings with exactly two fraction
// digits ("4.25"); arithmetic happens on integer minor units.
struct Money {
  std::int64_t minor = 0;
  std::string currency = "USD";

  std::string amount_str() const;
  auto operator<=>(const Money&) const = default;
};

// Accepts "4", "4.2" and "4.25"; rejects more than two fraction digits.
std::optional<std::int64_t> parse_minor_units(std::string_view text);
std::string format_minor_units(std::int64_t minor);

// ceil(numerator / denominator) for non-negative numerator, positive denominator.
std::int64_t ceil_div(std::int64_t numerator, std::int64_t denominator);

}  // namespace bandx
