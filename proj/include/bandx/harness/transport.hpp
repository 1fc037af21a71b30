#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "bandx/harness/envelope.hpp"

namespace bandx::harness {

class Service;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual Envelope call(const std::string& role, const Envelope& request) = 0;
};

class InProcessTransport final : public Transport {
 public:
  void attach(const std::string& role, Service* service) { services_[role] = service; }
  Envelope call(const std::string& role, const Envelope& request) override;

 private:
  std::map<std::string, Service*> services_;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};
// "host:port" or "port".
Endpoint parse_endpoint(const std::string& text);

// One persistent connection per role, opened on first use.
class SocketTransport final : public Transport {
 public:
  SocketTransport() = default;
  ~SocketTransport() override;
  void set_endpoint(const std::string& role, Endpoint e) { endpoints_[role] = std::move(e); }
  Envelope call(const std::string& role, const Envelope& request) override;
  // Sends raw bytes and reads one reply; for protocol-error tests.
  Envelope call_raw(const std::string& role, const std::string& bytes);

 private:
  struct Conn {
    int fd = -1;
    std::string buffer;
  };
  Conn& connect(const std::string& role);
  std::map<std::string, Endpoint> endpoints_;
  std::map<std::string, Conn> conns_;
};

// Serves `service` until `stop` returns true (checked between accepts).
// Binds 127.0.0.1:port (0 = ephemeral) and reports the bound port through
// `on_bound`. Connections are served on their own threads; requests are
// applied to the service one at a time. Throws BindFailure.
void serve_socket(Service& service, int port, const std::function<void(int)>& on_bound,
                  const std::function<bool()>& stop);

// Numbers outgoing envelopes per sender, optionally appends every request
// and reply to a transcript, and turns ERROR replies into exceptions.
class Client {
 public:
  Client(Transport& t, std::string* transcript = nullptr) : transport_(&t), transcript_(transcript) {}

  Envelope call(const std::string& role, const std::string& sender, const std::string& type, Payload payload);
  // Like call but returns ERROR replies instead of throwing.
  Envelope call_unchecked(const std::string& role, const std::string& sender, const std::string& type,
                          Payload payload);
  std::uint64_t messages() const { return messages_; }

 private:
  Transport* transport_;
  std::string* transcript_;
  std::map<std::string, std::uint64_t> seq_;
  std::uint64_t messages_ = 0;
};

}  // namespace bandx::harness
