#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>

#include "tunegrid/error.hpp"
#include "tunegrid/proto/transport.hpp"

namespace tunegrid::proto {
namespace {

bool read_full(int fd, char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t rv = ::recv(fd, buf, n, 0);
    if (rv < 0 && errno == EINTR) continue;
    if (rv <= 0) return false;
    n -= static_cast<std::size_t>(rv);
    buf += rv;
  }
  return true;
}

bool write_all(int fd, const char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t rv = ::send(fd, buf, n, MSG_NOSIGNAL);
    if (rv < 0 && errno == EINTR) continue;
    if (rv <= 0) return false;
    n -= static_cast<std::size_t>(rv);
    buf += rv;
  }
  return true;
}

class TcpConnection final : public Connection {
 public:
  TcpConnection(int fd, std::string peer) : fd_(fd), peer_(std::move(peer)) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpConnection() override {
    close();
    ::close(fd_);
  }

  void send_frame(const std::string& frame) override {
    std::lock_guard lock(write_mu_);
    if (closed_.load() || !write_all(fd_, frame.data(), frame.size())) {
      throw Error(ErrorCode::kTransport, "connection to " + peer_ + " closed");
    }
  }

  std::optional<Message> receive() override {
    if (broken_) return std::nullopt;
    std::array<std::uint8_t, kHeaderBytes> header{};
    if (!read_full(fd_, reinterpret_cast<char*>(header.data()), header.size())) return std::nullopt;
    std::uint32_t n = 0;
    try {
      n = read_length(header);
    } catch (const Error&) {
      // The stream position is lost; nothing after this frame can be trusted.
      broken_ = true;
      throw;
    }
    std::string payload(n, '\0');
    if (!read_full(fd_, payload.data(), n)) return std::nullopt;
    return decode_payload(payload);
  }

  void close() override {
    if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

  std::string peer() const override { return peer_; }

 private:
  int fd_;
  std::string peer_;
  std::mutex write_mu_;
  std::atomic<bool> closed_{false};
  bool broken_ = false;
};

std::string describe(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof(buf));
  return std::string(buf) + ":" + std::to_string(ntohs(addr.sin_port));
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(ErrorCode::kTransport, "cannot resolve host '" + host + "'");
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(port);
  return addr;
}

}  // namespace

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::kTransport, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw Error(ErrorCode::kTransport, "cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  close();
  ::close(fd_);
}

std::unique_ptr<Connection> TcpListener::accept() {
  for (;;) {
    sockaddr_in peer{};
    socklen_t len = sizeof(peer);
    const int fd = ::accept(fd_, reinterpret_cast<sockaddr*>(&peer), &len);
    if (fd >= 0) return std::make_unique<TcpConnection>(fd, describe(peer));
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return nullptr;
  }
}

void TcpListener::close() { ::shutdown(fd_, SHUT_RDWR); }

std::unique_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::kTransport, std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw Error(ErrorCode::kTransport, "cannot connect to " + host + ":" + std::to_string(port) + ": " + err);
  }
  return std::make_unique<TcpConnection>(fd, describe(addr));
}

}  // namespace tunegrid::proto
