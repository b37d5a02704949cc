#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "tunegrid/proto/message.hpp"

namespace tunegrid::proto {

/**
 * Ordered, reliable, bidirectional message channel between one worker and
 * the manager. send() is safe to call from several threads; one reader at a
 * time may call receive().
 */
class Connection {
 public:
  virtual ~Connection() = default;

  /// Throws Error(kTransport) when the channel is closed.
  void send(const Message& m) { send_frame(encode(m)); }

  /// Sends an already framed byte string. Lets tests inject arbitrary frames.
  virtual void send_frame(const std::string& frame) = 0;

  /**
   * Next message, or nullopt once the peer closed the channel. Throws
   * Error(kMalformedFrame / kUnknownKind / kVersionMismatch) for a bad
   * frame; the channel stays usable unless the framing itself was broken
   * (then the next call returns nullopt).
   */
  virtual std::optional<Message> receive() = 0;

  /// Closes both directions; a blocked receive() on either end returns nullopt.
  virtual void close() = 0;

  virtual std::string peer() const = 0;
};

/// Two connected in-process endpoints. Messages still pass through the frame codec.
std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_inproc_pair();

class TcpListener {
 public:
  /// Binds host:port; port 0 picks an ephemeral port.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  /// Blocks for the next connection; nullptr after close().
  std::unique_ptr<Connection> accept();
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Throws Error(kTransport) when the manager cannot be reached.
std::unique_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port);

}  // namespace tunegrid::proto
