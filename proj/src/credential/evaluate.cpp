#include "bandx/credential/evaluate.hpp"

#include <cctype>

namespace bandx::credential {
namespace {

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct Decimal {
  bool negative = false;
  std::string whole;  // no leading zeros
  std::string frac;   // no trailing zeros
};

Decimal split(std::string_view s) {
  Decimal d;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    d.negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  d.whole = std::string(s.substr(0, dot));
  if (dot != std::string_view::npos) d.frac = std::string(s.substr(dot + 1));
  while (!d.whole.empty() && d.whole.front() == '0') d.whole.erase(d.whole.begin());
  while (!d.frac.empty() && d.frac.back() == '0') d.frac.pop_back();
  if (d.whole.empty() && d.frac.empty()) d.negative = false;
  return d;
}

int compare_magnitude(const Decimal& a, const Decimal& b) {
  if (a.whole.size() != b.whole.size()) return a.whole.size() < b.whole.size() ? -1 : 1;
  if (int c = a.whole.compare(b.whole)) return c < 0 ? -1 : 1;
  if (int c = a.frac.compare(b.frac)) return c < 0 ? -1 : 1;
  return 0;
}

template <typename T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

bool eval_compare(const ConditionExpr& e, const ActionAttributeSet& action) {
  const std::string* value = action.find(e.attr.name);
  if (!value) return false;
  if (!e.attr.numeric) return apply(e.op, std::string_view(*value), std::string_view(e.literal.text));

  auto lhs = numeric_prefix(*value);
  auto rhs = numeric_prefix(e.literal.text);
  if (!lhs || !rhs) return false;
  return apply(e.op, compare_decimal(*lhs, *rhs), 0);
}

}  // namespace

std::optional<std::string> numeric_prefix(std::string_view v) {
  std::size_t i = 0;
  if (i < v.size() && (v[i] == '-' || v[i] == '+')) ++i;
  std::size_t digits_start = i;
  while (i < v.size() && digit(v[i])) ++i;
  bool have_whole = i > digits_start;
  std::size_t end = i;
  if (i < v.size() && v[i] == '.') {
    std::size_t j = i + 1;
    while (j < v.size() && digit(v[j])) ++j;
    if (j > i + 1) end = j;
    else if (have_whole) end = i;
    if (!have_whole && j == i + 1) return std::nullopt;
  }
  if (!have_whole && end == i) return std::nullopt;
  return std::string(v.substr(0, end));
}

int compare_decimal(std::string_view a, std::string_view b) {
  Decimal da = split(a), db = split(b);
  if (da.negative != db.negative) return da.negative ? -1 : 1;
  int m = compare_magnitude(da, db);
  return da.negative ? -m : m;
}

bool eval_expr(const ConditionExpr& e, const ActionAttributeSet& action) {
  switch (e.kind) {
    case ConditionExpr::Kind::Compare: return eval_compare(e, action);
    case ConditionExpr::Kind::Not: return !e.children.empty() && !eval_expr(e.children.front(), action);
    case ConditionExpr::Kind::And:
      for (const auto& c : e.children)
        if (!eval_expr(c, action)) return false;
      return !e.children.empty();
    case ConditionExpr::Kind::Or:
      for (const auto& c : e.children)
        if (eval_expr(c, action)) return true;
      return false;
  }
  return false;
}

bool eval_conditions(const Conditions& conditions, const ActionAttributeSet& action) {
  if (conditions.clauses.empty()) return true;
  for (const auto& clause : conditions.clauses) {
    if (clause.result && eval_expr(clause.test, action)) return true;
  }
  return false;
}

}  // namespace bandx::credential
