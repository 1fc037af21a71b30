#include "bandx/credential/compliance.hpp"

#include <map>
#include <vector>

#include "bandx/common/error.hpp"
#include "bandx/credential/evaluate.hpp"
#include "bandx/credential/signature.hpp"

namespace bandx::credential {
namespace {

class PrincipalTable {
 public:
  std::size_t index(const std::string& name) {
    auto [it, inserted] = ids_.try_emplace(name, ids_.size());
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::map<std::string, std::size_t> ids_;
};

struct CompiledLicensees {
  PrincipalExpr::Kind kind;
  std::size_t principal = 0;
  std::vector<CompiledLicensees> children;
};

CompiledLicensees compile(const PrincipalExpr& e, PrincipalTable& table) {
  CompiledLicensees c{e.kind, 0, {}};
  if (e.kind == PrincipalExpr::Kind::Key) c.principal = table.index(e.key.str());
  for (const auto& child : e.children) c.children.push_back(compile(child, table));
  return c;
}

bool holds(const CompiledLicensees& c, const std::vector<char>& authorized) {
  switch (c.kind) {
    case PrincipalExpr::Kind::Anyone: return true;
    case PrincipalExpr::Kind::Key: return authorized[c.principal] != 0;
    case PrincipalExpr::Kind::And:
      for (const auto& child : c.children)
        if (!holds(child, authorized)) return false;
      return true;
    case PrincipalExpr::Kind::Or:
      for (const auto& child : c.children)
        if (holds(child, authorized)) return true;
      return false;
  }
  return false;
}

struct Edge {
  std::size_t authorizer;
  CompiledLicensees licensees;
};

}  // namespace

bool check_compliance(std::span<const Credential> policy, std::span<const Credential> creds,
                      std::span<const PublicKeyId> requesters, const ActionAttributeSet& action,
                      ComplianceOptions options) {
  for (const auto& p : policy) {
    if (!p.authorizer.is_policy())
      throw Error(ErrorCode::UnverifiedCredential, "policy list entry is not a POLICY assertion");
  }
  for (const auto& c : creds) {
    if (c.authorizer.is_policy())
      throw Error(ErrorCode::UnverifiedCredential, "POLICY assertion supplied as a credential");
    if (options.verify_signatures && (c.unchecked || !verify_signature(c)))
      throw Error(ErrorCode::UnverifiedCredential, "signature check failed for credential by " + c.authorizer.str());
  }
  if (!action.find("app_domain")) return false;

  PrincipalTable table;
  const std::size_t policy_index = table.index(std::string(kPolicyLiteral));

  // Conditions depend only on the action, so each credential contributes a
  // fixed edge or nothing at all.
  std::vector<Edge> edges;
  auto add = [&](const Credential& c) {
    std::size_t a = table.index(c.authorizer.str());
    CompiledLicensees lic = compile(c.licensees, table);
    if (eval_conditions(c.conditions, action)) edges.push_back({a, std::move(lic)});
  };
  for (const auto& p : policy) add(p);
  for (const auto& c : creds) add(c);

  std::vector<std::size_t> req;
  for (const auto& r : requesters) req.push_back(table.index(r.str()));

  std::vector<char> authorized(table.size(), 0);
  for (auto r : req) authorized[r] = 1;

  // Each productive round authorizes at least one more principal.
  for (std::size_t round = 0; round <= table.size(); ++round) {
    bool changed = false;
    for (const auto& e : edges) {
      if (!authorized[e.authorizer] && holds(e.licensees, authorized)) {
        authorized[e.authorizer] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return authorized[policy_index] != 0;
}

}  // namespace bandx::credential
