#include "bandx/payments/record.hpp"

#include <charconv>

#include "bandx/common/crypto.hpp"
#include "bandx/common/error.hpp"
#include "bandx/credential/text.hpp"

namespace bandx::payments {
namespace {

void block(std::string& out, std::string_view tag, const credential::Credential& c) {
  std::string text = credential::render_credential(c);
  out += std::string(tag) + " " + std::to_string(text.size()) + "\n" + text + "\n";
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  std::string_view line() {
    auto nl = s_.find('\n', pos_);
    if (nl == std::string_view::npos) fail("unterminated line");
    auto l = s_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return l;
  }

  // "<tag> <value>"
  std::string_view field(std::string_view tag) {
    auto l = line();
    if (l.size() <= tag.size() || l.substr(0, tag.size()) != tag || l[tag.size()] != ' ')
      fail("expected " + std::string(tag));
    return l.substr(tag.size() + 1);
  }

  std::size_t number(std::string_view tag) {
    auto v = field(tag);
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) fail("bad length for " + std::string(tag));
    return n;
  }

  std::string_view bytes(std::size_t n) {
    if (pos_ + n + 1 > s_.size() || s_[pos_ + n] != '\n') fail("truncated block");
    auto b = s_.substr(pos_, n);
    pos_ += n + 1;
    return b;
  }

  bool done() const { return pos_ == s_.size(); }

  [[noreturn]] static void fail(const std::string& what) { throw Error(ErrorCode::BadRequest, "record: " + what); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_record(const TransactionRecord& r) {
  std::string out = "merchant " + r.merchant_key.str() + "\n";
  out += "received_at " + r.received_at.str() + "\n";
  out += "action " + std::to_string(r.action.entries().size()) + "\n";
  for (const auto& [k, v] : r.action.entries()) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw Error(ErrorCode::BadRequest, "record: action attribute " + k + " not serializable");
    out += k + "=" + v + "\n";
  }
  block(out, "guarantor", r.guarantor);
  block(out, "offer", r.offer);
  block(out, "check", r.microcheck);
  return out;
}

TransactionRecord parse_record(std::string_view text) {
  Reader in(text);
  TransactionRecord r;
  auto merchant = credential::PublicKeyId::try_parse(in.field("merchant"));
  if (!merchant) Reader::fail("bad merchant key");
  r.merchant_key = *merchant;
  auto day = Date::try_parse(in.field("received_at"));
  if (!day) Reader::fail("bad received_at");
  r.received_at = *day;
  std::size_t n = in.number("action");
  for (std::size_t i = 0; i < n; ++i) {
    auto l = in.line();
    auto eq = l.find('=');
    if (eq == std::string_view::npos || eq == 0) Reader::fail("bad action line");
    r.action.set(std::string(l.substr(0, eq)), std::string(l.substr(eq + 1)));
  }
  auto cred = [&](std::string_view tag) {
    std::size_t len = in.number(tag);
    try {
      return credential::parse_credential(in.bytes(len));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BadRequest) throw;
      throw Error(ErrorCode::BadRequest, "record: " + std::string(tag) + ": " + e.what());
    }
  };
  r.guarantor = cred("guarantor");
  r.offer = cred("offer");
  r.microcheck = cred("check");
  if (!in.done()) Reader::fail("trailing bytes");
  return r;
}

std::string record_id(const TransactionRecord& r) { return crypto::sha256_hex(serialize_record(r)).substr(0, 32); }

}  // namespace bandx::payments
