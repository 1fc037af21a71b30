#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "bandx/credential/credential.hpp"

namespace bandx::credential {

// Longest numeric prefix: optional sign, digits, optional fraction.
// "50Mbps" -> "50", "4.25" -> "4.25", "Mbps" -> nullopt.
std::optional<std::string> numeric_prefix(std::string_view value);

// Exact comparison of two decimal strings as produced by numeric_prefix.
int compare_decimal(std::string_view a, std::string_view b);

// Total: malformed or unsatisfiable comparisons are false, never errors.
bool eval_expr(const ConditionExpr& expr, const ActionAttributeSet& action);
bool eval_conditions(const Conditions& conditions, const ActionAttributeSet& action);

}  // namespace bandx::credential
