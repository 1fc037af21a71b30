#include "bandx/harness/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include "bandx/common/error.hpp"
#include "bandx/harness/service.hpp"

namespace bandx::harness {
namespace {

void write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::IoError, std::string("send: ") + std::strerror(errno));
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

// False on orderly close.
bool read_more(int fd, std::string& buffer) {
  char chunk[65536];
  for (;;) {
    ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw Error(ErrorCode::IoError, std::string("recv: ") + std::strerror(errno));
    if (n == 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
    return true;
  }
}

Envelope read_envelope(int fd, std::string& buffer) {
  for (;;) {
    if (auto e = decode_prefix(buffer)) {
      buffer.erase(0, e->second);
      return std::move(e->first);
    }
    if (!read_more(fd, buffer)) throw Error(ErrorCode::IoError, "connection closed by peer");
  }
}

void serve_connection(int fd, Service& service, std::shared_ptr<std::mutex> mu) {
  std::string buffer;
  std::uint64_t errors = 0;
  try {
    for (;;) {
      std::size_t skip = 0;
      std::optional<std::pair<Envelope, std::size_t>> frame;
      try {
        frame = decode_prefix(buffer, &skip);
      } catch (const Error& e) {
        buffer.erase(0, skip);
        Envelope reply{"PROTOCOL-ERROR", service.role(), ++errors, {}};
        reply.payload.set("detail", e.detail());
        write_all(fd, encode(reply));
        continue;
      }
      if (!frame) {
        if (!read_more(fd, buffer)) break;
        continue;
      }
      buffer.erase(0, frame->second);
      Envelope reply;
      {
        std::lock_guard lock(*mu);
        reply = service.handle(frame->first);
      }
      write_all(fd, encode(reply));
    }
  } catch (const Error&) {
  }
  ::close(fd);
}

}  // namespace

Envelope InProcessTransport::call(const std::string& role, const Envelope& request) {
  auto it = services_.find(role);
  if (it == services_.end()) throw Error(ErrorCode::ConfigError, "no service for role " + role);
  // Round-trip through the wire form so both transports see the same bytes.
  return decode(encode(it->second->handle(decode(encode(request)))));
}

Endpoint parse_endpoint(const std::string& text) {
  Endpoint e;
  auto colon = text.rfind(':');
  std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
  if (colon != std::string::npos) e.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(port, &used);
    if (used != port.size() || e.port <= 0 || e.port > 65535) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad endpoint " + text);
  }
  return e;
}

SocketTransport::~SocketTransport() {
  for (auto& [role, c] : conns_)
    if (c.fd >= 0) ::close(c.fd);
}

SocketTransport::Conn& SocketTransport::connect(const std::string& role) {
  auto& c = conns_[role];
  if (c.fd >= 0) return c;
  auto ep = endpoints_.find(role);
  if (ep == endpoints_.end()) throw Error(ErrorCode::ConfigError, "no endpoint for role " + role);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::IoError, "socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(ep->second.port));
  if (::inet_pton(AF_INET, ep->second.host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::ConfigError, "bad host " + ep->second.host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    throw Error(ErrorCode::IoError, "connect to " + role + " at " + ep->second.host + ":" +
                                        std::to_string(ep->second.port) + ": " + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  c.fd = fd;
  c.buffer.clear();
  return c;
}

Envelope SocketTransport::call(const std::string& role, const Envelope& request) {
  return call_raw(role, encode(request));
}

Envelope SocketTransport::call_raw(const std::string& role, const std::string& bytes) {
  Conn& c = connect(role);
  try {
    write_all(c.fd, bytes);
    return read_envelope(c.fd, c.buffer);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) {
      ::close(c.fd);
      c.fd = -1;
    }
    throw;
  }
}

void serve_socket(Service& service, int port, const std::function<void(int)>& on_bound,
                  const std::function<bool()>& stop) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::BindFailure, "socket");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 64) != 0) {
    std::string why = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::BindFailure, "port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  on_bound(ntohs(addr.sin_port));

  auto mu = std::make_shared<std::mutex>();
  std::vector<std::thread> workers;
  while (!stop()) {
    pollfd p{fd, POLLIN, 0};
    int ready = ::poll(&p, 1, 200);
    if (ready <= 0) continue;
    int client = ::accept(fd, nullptr, nullptr);
    if (client < 0) continue;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    workers.emplace_back(serve_connection, client, std::ref(service), mu);
  }
  ::close(fd);
  for (auto& w : workers) w.detach();
}

Envelope Client::call_unchecked(const std::string& role, const std::string& sender, const std::string& type,
                                Payload payload) {
  Envelope req{type, sender, ++seq_[sender], std::move(payload)};
  Envelope reply = transport_->call(role, req);
  messages_ += 1;
  if (transcript_) *transcript_ += "> " + role + "\n" + encode(req) + "< " + role + "\n" + encode(reply);
  return reply;
}

Envelope Client::call(const std::string& role, const std::string& sender, const std::string& type, Payload payload) {
  Envelope reply = call_unchecked(role, sender, type, std::move(payload));
  if (reply.type == "ERROR") throw Error(error_code_from_string(reply.payload.get("code")), reply.payload.get("detail"));
  if (reply.type == "PROTOCOL-ERROR")
    throw Error(ErrorCode::ProtocolError, reply.payload.find("detail").value_or("protocol error"));
  return reply;
}

}  // namespace bandx::harness
