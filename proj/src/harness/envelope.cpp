#include "bandx/harness/envelope.hpp"

#include <charconv>

#include "bandx/common/error.hpp"

namespace bandx::harness {
namespace {

[[noreturn]] void protocol(const std::string& what) { throw Error(ErrorCode::ProtocolError, what); }

bool token_ok(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (static_cast<unsigned char>(c) <= ' ' || c == 0x7f) return false;
  return true;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

}  // namespace

void Payload::set(const std::string& key, std::string value) {
  if (key.empty() || key.front() == ':' || key.find_first_of("=\n") != std::string::npos)
    protocol("bad field name \"" + key + "\"");
  if (value.find('\n') != std::string::npos) protocol("field " + key + " contains a newline");
  fields_[key] = std::move(value);
}

const std::string& Payload::get(std::string_view key) const {
  auto it = fields_.find(key);
  if (it == fields_.end()) protocol("missing field " + std::string(key));
  return it->second;
}

std::int64_t Payload::get_int(std::string_view key) const {
  std::int64_t v = 0;
  if (!parse_number(get(key), v)) protocol("field " + std::string(key) + " is not an integer");
  return v;
}

std::optional<std::string> Payload::find(std::string_view key) const {
  auto it = fields_.find(key);
  if (it == fields_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Payload::blocks(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [n, b] : blocks_)
    if (n == name) out.push_back(b);
  return out;
}

const std::string& Payload::block(std::string_view name) const {
  const std::string* found = nullptr;
  for (const auto& [n, b] : blocks_) {
    if (n != name) continue;
    if (found) protocol("more than one " + std::string(name) + " block");
    found = &b;
  }
  if (!found) protocol("missing " + std::string(name) + " block");
  return *found;
}

std::string Payload::encode() const {
  std::string out;
  for (const auto& [k, v] : fields_) out += k + "=" + v + "\n";
  for (const auto& [n, b] : blocks_) out += ":" + n + " " + std::to_string(b.size()) + "\n" + b + "\n";
  return out;
}

Payload Payload::decode(std::string_view text) {
  Payload p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) protocol("payload line without newline");
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.front() == ':') {
      auto sp = line.find(' ');
      std::size_t len = 0;
      if (sp == std::string_view::npos || !parse_number(line.substr(sp + 1), len)) protocol("bad block header");
      if (pos + len + 1 > text.size() || text[pos + len] != '\n') protocol("truncated block");
      p.blocks_.emplace_back(std::string(line.substr(1, sp - 1)), std::string(text.substr(pos, len)));
      pos += len + 1;
      continue;
    }
    if (!p.blocks_.empty()) protocol("field after block");
    auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) protocol("bad payload line \"" + std::string(line) + "\"");
    p.fields_[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return p;
}

std::string encode(const Envelope& e) {
  if (!token_ok(e.type) || !token_ok(e.sender)) protocol("envelope type and sender must be non-empty tokens");
  std::string body = e.payload.encode();
  return std::string(kMagic) + " " + e.type + " " + e.sender + " " + std::to_string(e.seq) + " " +
         std::to_string(body.size()) + "\n" + body + "\n";
}

std::optional<std::pair<Envelope, std::size_t>> decode_prefix(std::string_view buffer, std::size_t* skip) {
  auto nl = buffer.find('\n');
  if (skip) *skip = nl == std::string_view::npos ? buffer.size() : nl + 1;
  if (nl == std::string_view::npos) {
    if (buffer.size() > 4096) protocol("envelope header too long");
    return std::nullopt;
  }
  std::string_view header = buffer.substr(0, nl);
  std::vector<std::string_view> parts;
  for (std::size_t p = 0; p <= header.size();) {
    auto sp = header.find(' ', p);
    if (sp == std::string_view::npos) sp = header.size();
    parts.push_back(header.substr(p, sp - p));
    p = sp + 1;
  }
  Envelope e;
  std::size_t len = 0;
  if (parts.size() != 5 || parts[0] != kMagic || !token_ok(parts[1]) || !token_ok(parts[2]) ||
      !parse_number(parts[3], e.seq) || !parse_number(parts[4], len))
    protocol("malformed envelope header \"" + std::string(header.substr(0, 200)) + "\"");
  if (len > kMaxPayload) protocol("envelope payload of " + std::to_string(len) + " bytes exceeds the limit");
  std::size_t body = nl + 1;
  if (buffer.size() < body + len + 1) return std::nullopt;
  if (skip) *skip = body + len + 1;
  if (buffer[body + len] != '\n') protocol("envelope payload not terminated");
  e.type = std::string(parts[1]);
  e.sender = std::string(parts[2]);
  e.payload = Payload::decode(buffer.substr(body, len));
  return std::make_pair(std::move(e), body + len + 1);
}

Envelope decode(std::string_view text) {
  auto r = decode_prefix(text);
  if (!r) protocol("incomplete envelope");
  if (r->second != text.size()) protocol("trailing bytes after envelope");
  return std::move(r->first);
}

Envelope make_error(const std::string& sender, std::uint64_t seq, std::string_view code, const std::string& detail) {
  Envelope e{"ERROR", sender, seq, {}};
  e.payload.set("code", std::string(code));
  std::string d = detail;
  for (auto& c : d)
    if (c == '\n') c = ' ';
  e.payload.set("detail", d);
  return e;
}

}  // namespace bandx::harness
