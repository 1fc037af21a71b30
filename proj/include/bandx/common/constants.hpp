#pragma once

#include <string_view>

namespace bandx {

// app_domain value carried by every exchange credential and action.
inline constexpr std::string_view kAppDomain = "BAND-X";

}  // namespace bandx
