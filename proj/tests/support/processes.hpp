#pragma once
// Starts the four `bandx serve` processes on ephemeral loopback ports.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

extern char** environ;

namespace processes {

class Servers {
 public:
  // `scenario` supplies the world; `dir` holds port files and the journal.
  Servers(const std::string& cli, const std::string& scenario, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    start(cli, "csc", scenario, dir, {"--journal", (dir / "csc.journal").string()});
    start(cli, "clearinghouse", scenario, dir, {});
    start(cli, "guarantor", scenario, dir, {});
    start(cli, "isp", scenario, dir, {"--peer", "csc=" + std::to_string(ports_.at("csc"))});
  }
  ~Servers() {
    for (auto& [role, pid] : pids_) kill(pid, SIGTERM);
    for (auto& [role, pid] : pids_) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid, &status, WNOHANG) == pid) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        if (i == 49) {
          kill(pid, SIGKILL);
          waitpid(pid, &status, 0);
        }
      }
    }
  }
  Servers(const Servers&) = delete;
  Servers& operator=(const Servers&) = delete;

  std::vector<std::string> connect_specs() const {
    std::vector<std::string> out;
    for (const auto& [role, port] : ports_) out.push_back(role + "=127.0.0.1:" + std::to_string(port));
    return out;
  }
  int port(const std::string& role) const { return ports_.at(role); }

 private:
  void start(const std::string& cli, const std::string& role, const std::string& scenario,
             const std::filesystem::path& dir, std::vector<std::string> extra) {
    auto port_file = dir / (role + ".port");
    std::filesystem::remove(port_file);
    std::vector<std::string> args{cli, "serve", role, "--scenario", scenario, "--port", "0", "--port-file",
                                  port_file.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawn(&pid, cli.c_str(), nullptr, nullptr, argv.data(), environ) != 0)
      throw std::runtime_error("cannot spawn " + cli);
    pids_[role] = pid;
    for (int i = 0; i < 500; ++i) {
      if (std::filesystem::exists(port_file)) {
        std::ifstream in(port_file);
        int p = 0;
        if (in >> p && p > 0) {
          ports_[role] = p;
          return;
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    throw std::runtime_error(role + " never reported its port");
  }

  std::map<std::string, pid_t> pids_;
  std::map<std::string, int> ports_;
};

}  // namespace processes
