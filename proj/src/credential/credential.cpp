#include "bandx/credential/credential.hpp"

namespace bandx::credential {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

bool Credential::same_content(const Credential& o) const {
  return version == o.version && local_constants == o.local_constants && authorizer == o.authorizer &&
         licensees == o.licensees && conditions == o.conditions && signature == o.signature;
}

void ActionAttributeSet::erase(std::string_view name) {
  auto it = values_.find(name);
  if (it != values_.end()) values_.erase(it);
}

const std::string* ActionAttributeSet::find(std::string_view name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

ConditionExpr attr_eq(std::string name, std::string value) {
  return ConditionExpr::compare({std::move(name), false}, CompareOp::Eq, {std::move(value), true});
}

ConditionExpr attr_num(std::string name, CompareOp op, std::string literal, bool quoted) {
  return ConditionExpr::compare({std::move(name), true}, op, {std::move(literal), quoted});
}

namespace {

void collect(const ConditionExpr& e, std::vector<const ConditionExpr*>& out) {
  if (e.kind == ConditionExpr::Kind::Compare) {
    out.push_back(&e);
  } else if (e.kind == ConditionExpr::Kind::And) {
    for (const auto& c : e.children) collect(c, out);
  }
}

}  // namespace

std::vector<const ConditionExpr*> conjunction_terms(const Conditions& c) {
  std::vector<const ConditionExpr*> out;
  if (!c.clauses.empty()) collect(c.clauses.front().test, out);
  return out;
}

}  // namespace bandx::credential
