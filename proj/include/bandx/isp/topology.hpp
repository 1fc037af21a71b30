#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bandx::isp {

struct NeSpec {
  std::string id;
  std::string isp;
  std::string location;
};

// Directed; the link name is "<from>><to>".
struct LinkSpec {
  std::string from;
  std::string to;
  std::int64_t capacity_mbps = 0;

  std::string name() const { return from + ">" + to; }
};

struct Topology {
  std::vector<std::string> isps;
  std::vector<NeSpec> nes;
  std::vector<LinkSpec> links;

  const NeSpec* find_ne(std::string_view id) const;
  const NeSpec* ne_at(std::string_view isp, std::string_view location) const;
};

// Line format (docs/formats.md):
//   isp <name>
//   ne <id> <isp> <location>
//   link <from-ne> <to-ne> <capacity-mbps>
//   duplex <a-ne> <b-ne> <capacity-mbps>
// Throws ConfigError with the line number.
Topology parse_topology(std::string_view text);
std::string render_topology(const Topology& t);

}  // namespace bandx::isp
