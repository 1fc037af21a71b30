#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bandx/harness/setup.hpp"
#include "bandx/harness/transport.hpp"

namespace bandx::harness {

struct Event {
  int line = 0;
  std::string verb;
  std::vector<std::string> args;  // positional words after the verb
  std::map<std::string, std::string> options;  // keyword arguments ("as", "max-price", ...)
  std::vector<std::string> flags;               // bare keywords ("fixed", "premium")
};

struct Scenario {
  std::filesystem::path path;
  WorldSetup setup;
  bool clock_set = false;
  std::vector<Event> events;
};

// Grammar in docs/formats.md. Throws ScenarioParseError with the line.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

struct RunResult {
  std::string transcript;
  std::string report;
  int exit_code = 0;  // 0 ok, 2 assertion failed, 3 protocol or parse error
  std::string message;
};

// Runs every event against `transport`, which must reach the four roles.
RunResult run_scenario(const Scenario& s, Transport& transport);

// Builds the four services in-process and runs the scenario against them.
RunResult run_scenario_in_process(const Scenario& s);

inline const std::vector<std::string>& all_roles() {
  static const std::vector<std::string> roles{"clearinghouse", "isp", "csc", "guarantor"};
  return roles;
}

}  // namespace bandx::harness
