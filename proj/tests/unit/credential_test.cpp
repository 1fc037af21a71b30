#include <random>

#include "doctest.h"
#include "support/golden.hpp"
#include "support/generators.hpp"

#include "bandx/common/error.hpp"
#include "bandx/credential/evaluate.hpp"

using namespace bandx;
using namespace bandx::credential;

namespace {

std::string literal(const std::string& name) { return golden::read_file(std::string(BANDX_FIXTURES) + "/literal/" + name); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("literal guarantor credential parses in unchecked mode") {
  Credential c = parse_credential(literal("cg.cred"), ParseMode::Unchecked);
  CHECK(c.version == 2);
  CHECK(c.unchecked);
  REQUIRE_FALSE(c.authorizer.is_policy());
  CHECK(c.authorizer.key_id().str() == "rsa-base64:MIGJAo...");
  REQUIRE(c.licensees.kind == PrincipalExpr::Kind::Key);
  CHECK(c.licensees.key.str() == "rsa-base64:MCgCIQ...");
  CHECK(render_conditions(c.conditions).find("&amount < 5.01") != std::string::npos);
  REQUIRE(c.signature);
  CHECK(c.signature->algorithm == "sig-rsa-sha1-base64");
}

TEST_CASE("elided literal keys are rejected in checked mode") {
  CHECK(code_of([] { parse_credential(literal("cg.cred")); }) == ErrorCode::SyntaxError);
}

TEST_CASE("empty Licensees parses to Anyone") {
  Credential c = parse_credential(golden::offer_text());
  CHECK(c.licensees.kind == PrincipalExpr::Kind::Anyone);
}

TEST_CASE("literal offer text keeps its unterminated date quote as a syntax error") {
  try {
    parse_credential(literal("offer.cred"), ParseMode::Unchecked);
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.detail().find("line 11") != std::string::npos);
  }
}

TEST_CASE("literal microcheck and policy parse") {
  Credential check = parse_credential(literal("microcheck.cred"), ParseMode::Unchecked);
  CHECK(check.licensees.key.str() == "rsa-base64:7231f...");
  Credential pol = parse_credential(literal("policy.cred"), ParseMode::Unchecked);
  CHECK(pol.authorizer.is_policy());
  CHECK_FALSE(pol.signature);
  CHECK(pol.licensees.kind == PrincipalExpr::Kind::And);
  CHECK(pol.licensees.children.size() == 2);
}

TEST_CASE("version gate") {
  std::string text = golden::offer_text();
  text.replace(text.find("Keynote-Version: 2"), 18, "Keynote-Version: 3");
  CHECK(code_of([&] { parse_credential(text); }) == ErrorCode::UnknownVersion);
}

TEST_CASE("unresolved constant") {
  std::string text = "Keynote-Version: 2\nAuthorizer: MISSING_KEY\nLicensees:\nConditions: a == \"b\";\n";
  CHECK(code_of([&] { parse_credential(text); }) == ErrorCode::UnresolvedConstant);
}

TEST_CASE("syntax errors carry position and expectation") {
  std::string text = "Keynote-Version: 2\nAuthorizer: POLICY\nConditions: app_domain == ;\n";
  try {
    parse_credential(text);
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.detail().find("line 3:27") != std::string::npos);
    CHECK(e.detail().find("string or number literal") != std::string::npos);
  }
  CHECK(code_of([] { parse_credential("Authorizer: POLICY\nKeynote-Version: 2\n"); }) == ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_credential("Keynote-Version: 2\nAuthorizer: POLICY\nLicensees: POLICY\n"); }) ==
        ErrorCode::SyntaxError);
  CHECK(code_of([] { parse_credential("Keynote-Version: 2\nAuthorizer: POLICY\nConditions: a == \"x\" -> \"maybe\";\n"); }) ==
        ErrorCode::SyntaxError);
}

TEST_CASE("POLICY assertions may not carry a signature") {
  std::string text = golden::policy_text() + "Signature: \"sig-ed25519-base64:AAAA\"\n";
  CHECK(code_of([&] { parse_credential(text); }) == ErrorCode::SyntaxError);
}

TEST_CASE("canonical bytes ignore layout and comments") {
  Credential a = parse_credential(golden::offer_text());
  std::string relaid =
      "# offer from Nick\n"
      "Keynote-Version:   2\n"
      "Comment: re-flowed copy\n"
      "Local-Constants: ISP_KEY = " + golden::q(golden::nick()) + "\n"
      "Authorizer:ISP_KEY\n"
      "Licensees:\n"
      "Conditions: app_domain == \"BAND-X\" && currency == \"USD\" && &bandwidth <= \"50Mbps\"\n"
      "   && link_name == \"Dublin-NYC\" && &amount >= 3.00 && date < \"20031120\"\n"
      "   -> \"true\";\n";
  Credential b = parse_credential(relaid);
  CHECK(canonical_bytes(a) == canonical_bytes(b));

  Credential c = parse_credential(golden::offer_text("Dublin-NYX"));
  CHECK(canonical_bytes(a) != canonical_bytes(c));
}

TEST_CASE("canonical bytes layout") {
  Credential p = parse_credential(golden::policy_text());
  std::string expected = "keynote-version 2\n"
                         "local-constant CG_KEY " + golden::q(golden::guarantor()) + "\n"
                         "local-constant NICK_KEY " + golden::q(golden::nick()) + "\n"
                         "authorizer POLICY\n"
                         "licensees " + golden::q(golden::guarantor()) + " && " + golden::q(golden::nick()) + "\n"
                         "conditions app_domain == \"BAND-X\" -> \"true\";\n";
  CHECK(canonical_bytes(p) == expected);
}

TEST_CASE("render/parse round trip over generated credentials") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    Credential c = gen::random_credential(rng);
    std::string text = render_credential(c);
    Credential back = parse_credential(text);
    INFO(text);
    REQUIRE(back.same_content(c));
    CHECK(canonical_bytes(back) == canonical_bytes(c));
    CHECK(render_credential(back) == text);
  }
}

TEST_CASE("sign and verify") {
  Credential offer = golden::offer();
  CHECK(verify_signature(offer));

  SUBCASE("tampered amount literal fails") {
    Credential t = parse_credential(render_credential(offer));
    std::string text = render_credential(t);
    text.replace(text.find("3.00"), 4, "0.01");
    CHECK_FALSE(verify_signature(parse_credential(text)));
  }
  SUBCASE("wrong signing key") {
    CHECK(code_of([] { sign_credential(parse_credential(golden::offer_text()), golden::alice()); }) ==
          ErrorCode::KeyMismatch);
    CHECK(code_of([] { sign_credential(golden::policy(), golden::alice()); }) == ErrorCode::KeyMismatch);
  }
  SUBCASE("POLICY verifies without a signature") { CHECK(verify_signature(golden::policy())); }
  SUBCASE("missing signature") { CHECK_FALSE(verify_signature(parse_credential(golden::offer_text()))); }
  SUBCASE("unknown algorithm tag") {
    Credential t = offer;
    t.signature->algorithm = "sig-rsa-sha1-base64";
    CHECK(code_of([&] { verify_signature(t); }) == ErrorCode::UnsupportedAlgorithm);
  }
}

TEST_CASE("single-bit mutations never verify") {
  std::mt19937_64 rng(11);
  Credential offer = golden::offer();
  std::string body = canonical_bytes(offer);
  auto sig = *crypto::base64_decode(offer.signature->value);
  for (int i = 0; i < 500; ++i) {
    std::string mutated = body;
    std::size_t bit = rng() % (mutated.size() * 8);
    mutated[bit / 8] = static_cast<char>(mutated[bit / 8] ^ (1 << (bit % 8)));
    CHECK_FALSE(verify_message(offer.authorizer.key_id(), offer.signature->value, mutated));

    auto s = sig;
    std::size_t sbit = rng() % (s.size() * 8);
    s[sbit / 8] ^= static_cast<std::uint8_t>(1 << (sbit % 8));
    Credential t = offer;
    t.signature->value = crypto::base64_encode(s);
    CHECK_FALSE(verify_signature(t));
  }
}

TEST_CASE("numeric prefix coercion") {
  CHECK(numeric_prefix("50Mbps") == "50");
  CHECK(numeric_prefix("4.25") == "4.25");
  CHECK(numeric_prefix("5.") == "5");
  CHECK(numeric_prefix(".5x") == ".5");
  CHECK(numeric_prefix("-3.5e2") == "-3.5");
  CHECK_FALSE(numeric_prefix("Mbps"));
  CHECK_FALSE(numeric_prefix(""));
  CHECK_FALSE(numeric_prefix("-"));
  CHECK(compare_decimal("5.00", "5") == 0);
  CHECK(compare_decimal("5.009", "5.01") < 0);
  CHECK(compare_decimal("-0.0", "0") == 0);
  CHECK(compare_decimal("-2", "-10") > 0);
  CHECK(compare_decimal("0010.5", "10.50") == 0);
}

TEST_CASE("condition evaluation") {
  SUBCASE("literal guarantor conditions") {
    Credential cg = parse_credential(literal("cg.cred"), ParseMode::Unchecked);
    ActionAttributeSet action{{"app_domain", "Band-X"}, {"currency", "USD"}, {"amount", "4.25"}, {"date", "20040320"}};
    CHECK(eval_conditions(cg.conditions, action));
    action.set("amount", "5.01");
    CHECK_FALSE(eval_conditions(cg.conditions, action));
    action.set("amount", "5.00");
    CHECK(eval_conditions(cg.conditions, action));
    action.set("date", "20040324");
    CHECK_FALSE(eval_conditions(cg.conditions, action));
  }
  SUBCASE("bandwidth compares by numeric prefix") {
    Credential offer = parse_credential(golden::offer_text());
    ActionAttributeSet action = golden::action();
    action.set("amount", "3.00");
    CHECK(eval_conditions(offer.conditions, action));
    action.set("bandwidth", "51");
    CHECK_FALSE(eval_conditions(offer.conditions, action));
    action.set("bandwidth", "fast");
    CHECK_FALSE(eval_conditions(offer.conditions, action));
  }
  SUBCASE("missing attribute makes the comparison false") {
    Credential offer = parse_credential(golden::offer_text());
    ActionAttributeSet action = golden::action();
    action.erase("link_name");
    CHECK_FALSE(eval_conditions(offer.conditions, action));
  }
  SUBCASE("clause results and empty conditions") {
    Credential c = parse_credential(
        "Keynote-Version: 2\nAuthorizer: POLICY\nConditions: a == \"1\" -> \"false\"; b == \"2\";\n");
    CHECK_FALSE(eval_conditions(c.conditions, {{"a", "1"}}));
    CHECK(eval_conditions(c.conditions, {{"b", "2"}}));
    CHECK(eval_conditions(Conditions{}, {}));
  }
  SUBCASE("negation and disjunction") {
    Credential c = parse_credential(
        "Keynote-Version: 2\nAuthorizer: POLICY\nConditions: !(a == \"1\") && (b < \"m\" || &c >= 10);\n");
    CHECK(eval_conditions(c.conditions, {{"a", "2"}, {"b", "z"}, {"c", "10kbps"}}));
    CHECK_FALSE(eval_conditions(c.conditions, {{"a", "1"}, {"b", "a"}}));
    CHECK_FALSE(eval_conditions(c.conditions, {{"a", "2"}, {"b", "z"}, {"c", "9.99"}}));
  }
}

TEST_CASE("evaluation is total over random attribute maps") {
  std::mt19937_64 rng(3);
  std::vector<Credential> creds;
  for (int i = 0; i < 20; ++i) creds.push_back(gen::random_credential(rng));
  creds.push_back(parse_credential(literal("cg.cred"), ParseMode::Unchecked));
  for (int i = 0; i < 10000; ++i) {
    ActionAttributeSet action = gen::random_action(rng);
    const Credential& c = creds[i % creds.size()];
    CHECK_NOTHROW((void)eval_conditions(c.conditions, action));
  }
}
