#pragma once

#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bandx/credential/key.hpp"

namespace bandx::credential {

// Authorizer of a credential: a single key, or the locally trusted POLICY.
class Principal {
 public:
  static Principal policy() { return Principal(); }
  static Principal key(PublicKeyId id) { return Principal(std::move(id)); }

  bool is_policy() const { return !key_.has_value(); }
  const PublicKeyId& key_id() const { return *key_; }
  std::string str() const { return key_ ? key_->str() : std::string(kPolicyLiteral); }

  bool operator==(const Principal&) const = default;

 private:
  Principal() = default;
  explicit Principal(PublicKeyId id) : key_(std::move(id)) {}
  std::optional<PublicKeyId> key_;
};

// Licensees expression. And/Or carry at least two children; Anyone is what
// an empty Licensees field parses to.
struct PrincipalExpr {
  enum class Kind { Key, And, Or, Anyone };

  Kind kind = Kind::Anyone;
  PublicKeyId key;
  std::vector<PrincipalExpr> children;

  static PrincipalExpr anyone() { return {}; }
  static PrincipalExpr of(PublicKeyId k) { return {Kind::Key, std::move(k), {}}; }
  static PrincipalExpr all_of(std::vector<PrincipalExpr> c) { return {Kind::And, {}, std::move(c)}; }
  static PrincipalExpr any_of(std::vector<PrincipalExpr> c) { return {Kind::Or, {}, std::move(c)}; }

  bool operator==(const PrincipalExpr&) const = default;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

struct AttrRef {
  std::string name;
  bool numeric = false;  // written with the `&` prefix
  bool operator==(const AttrRef&) const = default;
};

// Right-hand side of a comparison, kept as written so rendering is lossless.
struct Literal {
  std::string text;
  bool quoted = true;  // string literal; false for a bare number token
  bool operator==(const Literal&) const = default;
};

struct ConditionExpr {
  enum class Kind { Compare, And, Or, Not };

  Kind kind = Kind::Compare;
  AttrRef attr;
  CompareOp op = CompareOp::Eq;
  Literal literal;
  std::vector<ConditionExpr> children;

  static ConditionExpr compare(AttrRef a, CompareOp op, Literal l) {
    return {Kind::Compare, std::move(a), op, std::move(l), {}};
  }
  static ConditionExpr all_of(std::vector<ConditionExpr> c) { return {Kind::And, {}, CompareOp::Eq, {}, std::move(c)}; }
  static ConditionExpr any_of(std::vector<ConditionExpr> c) { return {Kind::Or, {}, CompareOp::Eq, {}, std::move(c)}; }
  static ConditionExpr negate(ConditionExpr c) { return {Kind::Not, {}, CompareOp::Eq, {}, {std::move(c)}}; }

  bool operator==(const ConditionExpr&) const = default;
};

// `test -> "true";` or `test -> "false";`
struct Clause {
  ConditionExpr test;
  bool result = true;
  bool operator==(const Clause&) const = default;
};

// A Conditions field is a sequence of clauses; it holds when any clause
// with result "true" passes. An empty field always holds.
struct Conditions {
  std::vector<Clause> clauses;
  bool operator==(const Conditions&) const = default;
};

struct Signature {
  std::string algorithm;
  std::string value;  // base64
  bool operator==(const Signature&) const = default;
};

struct Credential {
  int version = 2;
  std::vector<std::pair<std::string, std::string>> local_constants;
  Principal authorizer = Principal::policy();
  PrincipalExpr licensees;
  Conditions conditions;
  std::optional<Signature> signature;
  // Text the credential was parsed from; empty for built credentials.
  std::string source_text;
  // Set when parsed in unchecked mode; such credentials are fixtures only.
  bool unchecked = false;

  // Structural equality; ignores source_text.
  bool same_content(const Credential& other) const;
};

// Flat attribute -> value map describing a single transaction.
class ActionAttributeSet {
 public:
  using Map = std::map<std::string, std::string, std::less<>>;

  ActionAttributeSet() = default;
  ActionAttributeSet(std::initializer_list<std::pair<const std::string, std::string>> init) : values_(init) {}

  void set(std::string name, std::string value) { values_[std::move(name)] = std::move(value); }
  void erase(std::string_view name);
  const std::string* find(std::string_view name) const;
  const Map& entries() const { return values_; }

  bool operator==(const ActionAttributeSet&) const = default;

 private:
  Map values_;
};

// Builder helpers used throughout the project for programmatic credentials.
ConditionExpr attr_eq(std::string name, std::string value);
ConditionExpr attr_num(std::string name, CompareOp op, std::string literal, bool quoted = false);

// Collects the comparison leaves of the top-level conjunction of the first
// clause; used to derive structured views (offers, checks) from conditions.
std::vector<const ConditionExpr*> conjunction_terms(const Conditions& c);

}  // namespace bandx::credential
