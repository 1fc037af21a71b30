#include "bandx/credential/text.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "bandx/common/error.hpp"

namespace bandx::credential {
namespace {

struct Pos {
  int line = 1;
  int col = 1;
};

std::string where(Pos p) { return "line " + std::to_string(p.line) + ":" + std::to_string(p.col); }

[[noreturn]] void syntax_error(Pos p, const std::string& expected, const std::string& found) {
  throw Error(ErrorCode::SyntaxError, where(p) + ": expected " + expected + ", found " + found);
}

struct Field {
  std::string name;
  std::string value;
  std::vector<Pos> pos;  // one per value byte
  Pos name_pos;
  Pos end_pos;
};

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Field> split_fields(std::string_view text) {
  std::vector<Field> fields;
  int line_no = 0;
  bool ended = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    if (is_blank(line)) {
      if (!fields.empty()) ended = true;
      continue;
    }
    if (line.front() == '#') continue;
    if (ended) syntax_error({line_no, 1}, "end of credential", "more content after blank line");

    if (line.front() == ' ' || line.front() == '\t') {
      if (fields.empty()) syntax_error({line_no, 1}, "field name", "continuation line");
      Field& f = fields.back();
      f.value.push_back('\n');
      f.pos.push_back({line_no, 0});
      for (std::size_t i = 0; i < line.size(); ++i) {
        f.value.push_back(line[i]);
        f.pos.push_back({line_no, static_cast<int>(i) + 1});
      }
      f.end_pos = {line_no, static_cast<int>(line.size()) + 1};
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos) syntax_error({line_no, 1}, "'Name:' field header", "'" + std::string(line) + "'");
    Field f;
    f.name = std::string(line.substr(0, colon));
    f.name_pos = {line_no, 1};
    for (std::size_t i = colon + 1; i < line.size(); ++i) {
      f.value.push_back(line[i]);
      f.pos.push_back({line_no, static_cast<int>(i) + 1});
    }
    f.end_pos = {line_no, static_cast<int>(line.size()) + 1};
    fields.push_back(std::move(f));
  }
  return fields;
}

enum class Tok {
  Ident, String, Number, AndAnd, OrOr, Bang, LParen, RParen, Amp, Arrow, Semi, Assign,
  Eq, Ne, Lt, Le, Gt, Ge, End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Pos pos;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of field";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(const Field& f) : f_(f) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }
  bool accept(Tok k) {
    if (cur_.kind != k) return false;
    advance();
    return true;
  }
  Token expect(Tok k, const std::string& what) {
    if (cur_.kind != k) syntax_error(cur_.pos, what, describe(cur_));
    return take();
  }

 private:
  Pos pos_at(std::size_t i) const { return i < f_.pos.size() ? f_.pos[i] : f_.end_pos; }

  void advance() {
    const std::string& s = f_.value;
    while (i_ < s.size() && std::isspace(static_cast<unsigned char>(s[i_]))) ++i_;
    cur_ = Token{};
    cur_.pos = pos_at(i_);
    if (i_ >= s.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = s[i_];
    auto two = [&](char next) { return i_ + 1 < s.size() && s[i_ + 1] == next; };
    auto emit = [&](Tok k, std::size_t n) {
      cur_.kind = k;
      cur_.text = s.substr(i_, n);
      i_ += n;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      emit(Tok::Ident, j - i_);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i_ + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i_ + 1])))) {
      std::size_t j = i_ + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      emit(Tok::Number, j - i_);
    } else if (c == '"') {
      std::string out;
      std::size_t j = i_ + 1;
      for (;;) {
        if (j >= s.size() || s[j] == '\n') syntax_error(cur_.pos, "closing '\"'", "unterminated string");
        if (s[j] == '"') break;
        if (s[j] == '\\') {
          if (j + 1 >= s.size() || (s[j + 1] != '"' && s[j + 1] != '\\'))
            syntax_error(pos_at(j), "escape \\\" or \\\\", "bad escape");
          out.push_back(s[j + 1]);
          j += 2;
          continue;
        }
        out.push_back(s[j++]);
      }
      cur_.kind = Tok::String;
      cur_.text = std::move(out);
      i_ = j + 1;
    } else if (c == '&') {
      two('&') ? emit(Tok::AndAnd, 2) : emit(Tok::Amp, 1);
    } else if (c == '|' && two('|')) {
      emit(Tok::OrOr, 2);
    } else if (c == '-' && two('>')) {
      emit(Tok::Arrow, 2);
    } else if (c == '=') {
      two('=') ? emit(Tok::Eq, 2) : emit(Tok::Assign, 1);
    } else if (c == '!') {
      two('=') ? emit(Tok::Ne, 2) : emit(Tok::Bang, 1);
    } else if (c == '<') {
      two('=') ? emit(Tok::Le, 2) : emit(Tok::Lt, 1);
    } else if (c == '>') {
      two('=') ? emit(Tok::Ge, 2) : emit(Tok::Gt, 1);
    } else if (c == '(') {
      emit(Tok::LParen, 1);
    } else if (c == ')') {
      emit(Tok::RParen, 1);
    } else if (c == ';') {
      emit(Tok::Semi, 1);
    } else {
      syntax_error(cur_.pos, "token", "character '" + std::string(1, c) + "'");
    }
  }

  const Field& f_;
  std::size_t i_ = 0;
  Token cur_;
};

class CredentialParser {
 public:
  CredentialParser(ParseMode mode) : mode_(mode) {}

  Credential parse(std::string_view text) {
    auto fields = split_fields(text);
    if (fields.empty()) syntax_error({1, 1}, "credential", "empty text");

    // Canonical header order; Comment may appear anywhere and is ignored.
    static const std::vector<std::string> order = {"keynote-version", "local-constants", "authorizer",
                                                   "licensees",       "conditions",      "signature"};
    Credential cred;
    cred.source_text = std::string(text);
    cred.unchecked = mode_ == ParseMode::Unchecked;
    std::size_t next = 0;
    bool seen_version = false, seen_authorizer = false;
    for (const auto& f : fields) {
      std::string name = lower(f.name);
      if (name == "comment") continue;
      auto it = std::find(order.begin(), order.end(), name);
      if (it == order.end()) syntax_error(f.name_pos, "known field name", "'" + f.name + "'");
      auto idx = static_cast<std::size_t>(it - order.begin());
      if (idx < next) syntax_error(f.name_pos, "fields in canonical order", "'" + f.name + "' out of order");
      next = idx + 1;
      if (name == "keynote-version") {
        parse_version(f, cred);
        seen_version = true;
      } else if (name == "local-constants") {
        parse_constants(f, cred);
      } else if (name == "authorizer") {
        parse_authorizer(f, cred);
        seen_authorizer = true;
      } else if (name == "licensees") {
        Lexer lx(f);
        if (lx.peek().kind == Tok::End) {
          cred.licensees = PrincipalExpr::anyone();
        } else {
          cred.licensees = licensee_or(lx, cred);
          lx.expect(Tok::End, "end of Licensees");
        }
      } else if (name == "conditions") {
        Lexer lx(f);
        cred.conditions = program(lx);
      } else if (name == "signature") {
        parse_signature(f, cred);
      }
    }
    if (!seen_version) syntax_error(fields.front().name_pos, "Keynote-Version field", "'" + fields.front().name + "'");
    if (!seen_authorizer) syntax_error(fields.back().end_pos, "Authorizer field", "end of credential");
    if (cred.authorizer.is_policy() && cred.signature)
      syntax_error(fields.back().name_pos, "no Signature on a POLICY assertion", "Signature");
    return cred;
  }

 private:
  void parse_version(const Field& f, Credential& cred) {
    Lexer lx(f);
    Token t = lx.expect(Tok::Number, "version number");
    if (t.text.find('.') != std::string::npos || t.text.front() == '-') syntax_error(t.pos, "integer version", t.text);
    lx.expect(Tok::End, "end of Keynote-Version");
    cred.version = std::stoi(t.text);
    if (cred.version != 2) throw Error(ErrorCode::UnknownVersion, "Keynote-Version " + t.text + " (only 2 is supported)");
  }

  void parse_constants(const Field& f, Credential& cred) {
    Lexer lx(f);
    while (lx.peek().kind != Tok::End) {
      Token name = lx.expect(Tok::Ident, "constant name");
      lx.expect(Tok::Assign, "'='");
      Token value = lx.expect(Tok::String, "quoted constant value");
      if (name.text == kPolicyLiteral) syntax_error(name.pos, "constant name", "reserved POLICY");
      if (constants_.count(name.text)) syntax_error(name.pos, "unique constant name", "duplicate " + name.text);
      constants_[name.text] = value.text;
      cred.local_constants.emplace_back(name.text, value.text);
    }
  }

  PublicKeyId key_from(const std::string& text, Pos p) {
    auto id = PublicKeyId::try_parse(text);
    if (!id) syntax_error(p, "key of the form <algorithm>:<material>", "\"" + text + "\"");
    if (mode_ == ParseMode::Checked && !crypto::base64_decode(id->material()))
      syntax_error(p, "base64 key material", "\"" + text + "\"");
    return *id;
  }

  PublicKeyId resolve(const Token& t) {
    if (t.kind == Tok::String) return key_from(t.text, t.pos);
    auto it = constants_.find(t.text);
    if (it == constants_.end())
      throw Error(ErrorCode::UnresolvedConstant, where(t.pos) + ": '" + t.text + "' is not a local constant");
    return key_from(it->second, t.pos);
  }

  void parse_authorizer(const Field& f, Credential& cred) {
    Lexer lx(f);
    Token t = lx.take();
    if (t.kind == Tok::Ident && t.text == kPolicyLiteral) {
      cred.authorizer = Principal::policy();
    } else if (t.kind == Tok::Ident || t.kind == Tok::String) {
      cred.authorizer = Principal::key(resolve(t));
    } else {
      syntax_error(t.pos, "authorizer key or POLICY", describe(t));
    }
    lx.expect(Tok::End, "end of Authorizer");
  }

  PrincipalExpr licensee_or(Lexer& lx, const Credential& cred) {
    std::vector<PrincipalExpr> parts{licensee_and(lx, cred)};
    while (lx.accept(Tok::OrOr)) parts.push_back(licensee_and(lx, cred));
    return parts.size() == 1 ? std::move(parts.front()) : PrincipalExpr::any_of(std::move(parts));
  }

  PrincipalExpr licensee_and(Lexer& lx, const Credential& cred) {
    std::vector<PrincipalExpr> parts{licensee_atom(lx, cred)};
    while (lx.accept(Tok::AndAnd)) parts.push_back(licensee_atom(lx, cred));
    return parts.size() == 1 ? std::move(parts.front()) : PrincipalExpr::all_of(std::move(parts));
  }

  PrincipalExpr licensee_atom(Lexer& lx, const Credential& cred) {
    if (lx.accept(Tok::LParen)) {
      PrincipalExpr e = licensee_or(lx, cred);
      lx.expect(Tok::RParen, "')'");
      return e;
    }
    Token t = lx.take();
    if (t.kind == Tok::Ident && t.text == kPolicyLiteral) syntax_error(t.pos, "licensee key", "POLICY");
    if (t.kind != Tok::Ident && t.kind != Tok::String) syntax_error(t.pos, "licensee key", describe(t));
    return PrincipalExpr::of(resolve(t));
  }

  Conditions program(Lexer& lx) {
    Conditions c;
    while (lx.peek().kind != Tok::End) {
      Clause cl;
      cl.test = cond_or(lx);
      if (lx.accept(Tok::Arrow)) {
        Token v = lx.expect(Tok::String, "clause result \"true\" or \"false\"");
        if (v.text != "true" && v.text != "false") syntax_error(v.pos, "clause result \"true\" or \"false\"", describe(v));
        cl.result = v.text == "true";
      }
      c.clauses.push_back(std::move(cl));
      if (!lx.accept(Tok::Semi)) {
        lx.expect(Tok::End, "';' or end of Conditions");
        break;
      }
    }
    return c;
  }

  ConditionExpr cond_or(Lexer& lx) {
    std::vector<ConditionExpr> parts{cond_and(lx)};
    while (lx.accept(Tok::OrOr)) parts.push_back(cond_and(lx));
    return parts.size() == 1 ? std::move(parts.front()) : ConditionExpr::any_of(std::move(parts));
  }

  ConditionExpr cond_and(Lexer& lx) {
    std::vector<ConditionExpr> parts{cond_unary(lx)};
    while (lx.accept(Tok::AndAnd)) parts.push_back(cond_unary(lx));
    return parts.size() == 1 ? std::move(parts.front()) : ConditionExpr::all_of(std::move(parts));
  }

  ConditionExpr cond_unary(Lexer& lx) {
    if (lx.accept(Tok::Bang)) return ConditionExpr::negate(cond_unary(lx));
    if (lx.accept(Tok::LParen)) {
      ConditionExpr e = cond_or(lx);
      lx.expect(Tok::RParen, "')'");
      return e;
    }
    AttrRef attr;
    attr.numeric = lx.accept(Tok::Amp);
    attr.name = lx.expect(Tok::Ident, "attribute name").text;
    CompareOp op;
    const Token& t = lx.peek();
    switch (t.kind) {
      case Tok::Eq: op = CompareOp::Eq; break;
      case Tok::Ne: op = CompareOp::Ne; break;
      case Tok::Lt: op = CompareOp::Lt; break;
      case Tok::Le: op = CompareOp::Le; break;
      case Tok::Gt: op = CompareOp::Gt; break;
      case Tok::Ge: op = CompareOp::Ge; break;
      default: syntax_error(t.pos, "comparison operator", describe(t));
    }
    lx.take();
    Token lit = lx.take();
    if (lit.kind != Tok::String && lit.kind != Tok::Number) syntax_error(lit.pos, "string or number literal", describe(lit));
    return ConditionExpr::compare(std::move(attr), op, Literal{lit.text, lit.kind == Tok::String});
  }

  void parse_signature(const Field& f, Credential& cred) {
    Lexer lx(f);
    Token t = lx.expect(Tok::String, "quoted signature");
    lx.expect(Tok::End, "end of Signature");
    auto colon = t.text.find(':');
    if (colon == std::string::npos || colon == 0) syntax_error(t.pos, "<algorithm>:<base64> signature", describe(t));
    cred.signature = Signature{t.text.substr(0, colon), t.text.substr(colon + 1)};
  }

  ParseMode mode_;
  std::map<std::string, std::string> constants_;
};

bool is_compound(const PrincipalExpr& e) {
  return e.kind == PrincipalExpr::Kind::And || e.kind == PrincipalExpr::Kind::Or;
}
bool is_compound(const ConditionExpr& e) {
  return e.kind == ConditionExpr::Kind::And || e.kind == ConditionExpr::Kind::Or;
}


std::string key_literal(const PublicKeyId& k, const Credential* cred) {
  if (cred) {
    for (const auto& [name, value] : cred->local_constants)
      if (value == k.str()) return name;
  }
  return quote(k.str());
}

std::string principal_expr(const PrincipalExpr& e, const Credential* cred) {
  switch (e.kind) {
    case PrincipalExpr::Kind::Anyone: return "";
    case PrincipalExpr::Kind::Key: return key_literal(e.key, cred);
    case PrincipalExpr::Kind::And:
    case PrincipalExpr::Kind::Or: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += e.kind == PrincipalExpr::Kind::And ? " && " : " || ";
        const auto& c = e.children[i];
        out += is_compound(c) ? "(" + principal_expr(c, cred) + ")" : principal_expr(c, cred);
      }
      return out;
    }
  }
  return "";
}

std::string literal_text(const Literal& l) { return l.quoted ? quote(l.text) : l.text; }

}  // namespace

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string render_principal_expr(const PrincipalExpr& e) { return principal_expr(e, nullptr); }

std::string render_condition_expr(const ConditionExpr& e) {
  switch (e.kind) {
    case ConditionExpr::Kind::Compare:
      return (e.attr.numeric ? "&" : "") + e.attr.name + " " + std::string(to_string(e.op)) + " " +
             literal_text(e.literal);
    case ConditionExpr::Kind::Not: return "!(" + render_condition_expr(e.children.front()) + ")";
    case ConditionExpr::Kind::And:
    case ConditionExpr::Kind::Or: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += e.kind == ConditionExpr::Kind::And ? " && " : " || ";
        const auto& c = e.children[i];
        out += is_compound(c) ? "(" + render_condition_expr(c) + ")" : render_condition_expr(c);
      }
      return out;
    }
  }
  return "";
}

std::string render_conditions(const Conditions& c) {
  std::string out;
  for (std::size_t i = 0; i < c.clauses.size(); ++i) {
    if (i) out += " ";
    out += render_condition_expr(c.clauses[i].test) + (c.clauses[i].result ? " -> \"true\";" : " -> \"false\";");
  }
  return out;
}

Credential parse_credential(std::string_view text, ParseMode mode) { return CredentialParser(mode).parse(text); }

std::vector<Credential> parse_credential_blocks(std::string_view text, ParseMode mode) {
  std::vector<Credential> out;
  std::string block;
  auto flush = [&] {
    if (!block.empty()) out.push_back(parse_credential(block, mode));
    block.clear();
  };
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    if (is_blank(line)) {
      flush();
    } else {
      block.append(line);
      block.push_back('\n');
    }
  }
  flush();
  return out;
}

std::string render_credential(const Credential& cred) {
  std::string out = "Keynote-Version: " + std::to_string(cred.version) + "\n";
  if (!cred.local_constants.empty()) {
    out += "Local-Constants:\n";
    for (const auto& [name, value] : cred.local_constants) out += "    " + name + " = " + quote(value) + "\n";
  }
  out += "Authorizer: " + (cred.authorizer.is_policy() ? std::string(kPolicyLiteral)
                                                         : key_literal(cred.authorizer.key_id(), &cred)) + "\n";
  std::string lic = principal_expr(cred.licensees, &cred);
  out += lic.empty() ? "Licensees:\n" : "Licensees: " + lic + "\n";
  std::string cond = render_conditions(cred.conditions);
  out += cond.empty() ? "Conditions:\n" : "Conditions: " + cond + "\n";
  if (cred.signature) out += "Signature: " + quote(cred.signature->algorithm + ":" + cred.signature->value) + "\n";
  return out;
}

std::string render_credential_blocks(const std::vector<Credential>& creds) {
  std::string out;
  for (std::size_t i = 0; i < creds.size(); ++i) {
    if (i) out += "\n";
    out += render_credential(creds[i]);
  }
  return out;
}

std::string canonical_bytes(const Credential& cred) {
  std::string out = "keynote-version " + std::to_string(cred.version) + "\n";
  auto constants = cred.local_constants;
  std::sort(constants.begin(), constants.end());
  for (const auto& [name, value] : constants) out += "local-constant " + name + " " + quote(value) + "\n";
  out += "authorizer " + (cred.authorizer.is_policy() ? std::string(kPolicyLiteral) : quote(cred.authorizer.key_id().str())) + "\n";
  std::string lic = render_principal_expr(cred.licensees);
  out += lic.empty() ? "licensees\n" : "licensees " + lic + "\n";
  std::string cond = render_conditions(cred.conditions);
  out += cond.empty() ? "conditions\n" : "conditions " + cond + "\n";
  return out;
}

}  // namespace bandx::credential
