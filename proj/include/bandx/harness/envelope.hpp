#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bandx::harness {

// Sorted key=value fields followed by named, length-prefixed blocks
// (credentials, records) in insertion order.
class Payload {
 public:
  void set(const std::string& key, std::string value);
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void add_block(const std::string& name, std::string bytes) { blocks_.emplace_back(name, std::move(bytes)); }

  bool has(std::string_view key) const { return fields_.find(key) != fields_.end(); }
  // Throw ProtocolError when missing or malformed.
  const std::string& get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  std::vector<std::string> blocks(std::string_view name) const;
  const std::string& block(std::string_view name) const;  // exactly one
  const std::map<std::string, std::string, std::less<>>& fields() const { return fields_; }
  const std::vector<std::pair<std::string, std::string>>& all_blocks() const { return blocks_; }

  std::string encode() const;
  static Payload decode(std::string_view text);

  bool operator==(const Payload&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> fields_;
  std::vector<std::pair<std::string, std::string>> blocks_;
};

struct Envelope {
  std::string type;
  std::string sender;
  std::uint64_t seq = 0;
  Payload payload;

  bool operator==(const Envelope&) const = default;
};

inline constexpr std::string_view kMagic = "BANDX/1";
inline constexpr std::size_t kMaxPayload = 64u << 20;

// `BANDX/1 <type> <sender> <seq> <len>\n<payload>\n`
std::string encode(const Envelope& e);

// Parses one envelope from the front of `buffer`. Returns the envelope and
// the number of bytes consumed, nullopt when more bytes are needed, or
// throws ProtocolError on a malformed frame. Before throwing, `*skip` is set
// to the number of bytes to discard to resynchronize.
std::optional<std::pair<Envelope, std::size_t>> decode_prefix(std::string_view buffer, std::size_t* skip = nullptr);
Envelope decode(std::string_view text);

Envelope make_error(const std::string& sender, std::uint64_t seq, std::string_view code, const std::string& detail);

}  // namespace bandx::harness
