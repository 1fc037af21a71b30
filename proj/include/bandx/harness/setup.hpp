#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bandx/common/money.hpp"
#include "bandx/common/time.hpp"
#include "bandx/credential/key.hpp"

namespace bandx::harness {

struct CustomerSpec {
  std::string name;
  std::string guarantor;
  Money limit{10000, "USD"};
  Date expiry = Date::parse("20040324");
};

// The parts of a scenario every role needs: who exists and how each
// service is configured. Keys derive from the seed and the principal name.
struct WorldSetup {
  std::optional<std::uint64_t> seed;
  SimTime clock;
  std::filesystem::path topology_path;
  std::string topology_text;
  std::vector<std::string> guarantors;
  std::vector<CustomerSpec> customers;
  int commission_bps = 100;
  std::optional<std::int64_t> daily_cap_minor;
  std::int64_t keepalive_period_seconds = 0;
  std::int64_t challenge_ttl_seconds = 60;
  std::optional<std::filesystem::path> csc_journal;

  // "isp:A", "csc", "guarantor:CG", "customer:alice"
  credential::SigningKey key_for(const std::string& principal) const;
};

}  // namespace bandx::harness
