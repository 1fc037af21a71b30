#include "bandx/isp/topology.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "bandx/common/error.hpp"

namespace bandx::isp {

const NeSpec* Topology::find_ne(std::string_view id) const {
  for (const auto& n : nes)
    if (n.id == id) return &n;
  return nullptr;
}

const NeSpec* Topology::ne_at(std::string_view isp, std::string_view location) const {
  for (const auto& n : nes)
    if (n.isp == isp && n.location == location) return &n;
  return nullptr;
}

Topology parse_topology(std::string_view text) {
  Topology t;
  std::set<std::string> link_names;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::ConfigError, "topology line " + std::to_string(lineno) + ": " + what);
  };
  auto add_link = [&](const std::string& a, const std::string& b, std::int64_t cap) {
    const NeSpec* na = t.find_ne(a);
    const NeSpec* nb = t.find_ne(b);
    if (!na || !nb) fail("unknown ne in link " + a + " " + b);
    if (na->isp != nb->isp) fail("link " + a + " " + b + " crosses ISPs");
    if (a == b) fail("self link " + a);
    LinkSpec l{a, b, cap};
    if (!link_names.insert(l.name()).second) fail("duplicate link " + l.name());
    t.links.push_back(l);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string tok; ls >> tok;) w.push_back(tok);
    if (w.empty()) continue;
    if (w[0] == "isp") {
      if (w.size() != 2) fail("expected: isp <name>");
      if (std::find(t.isps.begin(), t.isps.end(), w[1]) != t.isps.end()) fail("duplicate isp " + w[1]);
      t.isps.push_back(w[1]);
    } else if (w[0] == "ne") {
      if (w.size() != 4) fail("expected: ne <id> <isp> <location>");
      if (std::find(t.isps.begin(), t.isps.end(), w[2]) == t.isps.end()) fail("unknown isp " + w[2]);
      if (t.find_ne(w[1])) fail("duplicate ne " + w[1]);
      if (t.ne_at(w[2], w[3])) fail("isp " + w[2] + " already has an ne at " + w[3]);
      if (w[1].find_first_of(">-,") != std::string::npos) fail("ne id may not contain '>', '-' or ','");
      t.nes.push_back({w[1], w[2], w[3]});
    } else if (w[0] == "link" || w[0] == "duplex") {
      if (w.size() != 4) fail("expected: " + w[0] + " <from> <to> <capacity>");
      std::int64_t cap = 0;
      auto [p, ec] = std::from_chars(w[3].data(), w[3].data() + w[3].size(), cap);
      if (ec != std::errc() || p != w[3].data() + w[3].size() || cap <= 0) fail("bad capacity " + w[3]);
      add_link(w[1], w[2], cap);
      if (w[0] == "duplex") add_link(w[2], w[1], cap);
    } else {
      fail("unknown directive " + w[0]);
    }
  }
  return t;
}

std::string render_topology(const Topology& t) {
  std::string out;
  for (const auto& i : t.isps) out += "isp " + i + "\n";
  for (const auto& n : t.nes) out += "ne " + n.id + " " + n.isp + " " + n.location + "\n";
  for (const auto& l : t.links) out += "link " + l.from + " " + l.to + " " + std::to_string(l.capacity_mbps) + "\n";
  return out;
}

}  // namespace bandx::isp
