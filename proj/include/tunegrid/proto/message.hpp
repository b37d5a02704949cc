#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "tunegrid/gen/generator.hpp"
#include "tunegrid/histo/histogram.hpp"
#include "tunegrid/jobs/types.hpp"

namespace tunegrid::proto {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 16u * 1024u * 1024u;
inline constexpr std::size_t kHeaderBytes = 4;

struct Hello {
  std::string worker_id;
  std::string team_id;
  double capability = 0.0;
  int protocol_version = kProtocolVersion;
  /// Donor credited for this worker's events; defaults to worker_id when empty.
  std::string owner;

  bool operator==(const Hello&) const = default;
};

struct Welcome {
  std::int64_t heartbeat_interval_ms = 0;
  /// Payload description so workers need no local generator configuration.
  std::optional<gen::GeneratorModel> model;

  bool operator==(const Welcome&) const = default;
};

struct Ping {
  bool operator==(const Ping&) const = default;
};
struct Pong {
  bool operator==(const Pong&) const = default;
};
struct Bye {
  bool operator==(const Bye&) const = default;
};

struct Assign {
  std::string job_id;
  tune::TuneParameters params;
  std::uint64_t chunk_events = 0;
  std::uint64_t chunk_seed = 0;

  bool operator==(const Assign&) const = default;
};

struct Interim {
  std::string job_id;
  histo::HistogramSet chunk;

  bool operator==(const Interim&) const = default;
};

struct Abort {
  std::string job_id;
  jobs::AbortReason reason = jobs::AbortReason::kPreempted;

  bool operator==(const Abort&) const = default;
};

struct Err {
  std::string code;
  std::string detail;

  bool operator==(const Err&) const = default;
};

using Message = std::variant<Hello, Welcome, Ping, Pong, Assign, Interim, Abort, Bye, Err>;

std::string_view kind_name(const Message& m);

/// Length-prefixed frame: 4-byte big-endian payload length, then the JSON document {"kind", "body"}.
std::string encode(const Message& m);

/**
 * Decodes exactly one complete frame. Throws Error with kMalformedFrame
 * (bad length, truncated, invalid document or body), kUnknownKind, or
 * kVersionMismatch (HELLO with another protocol_version). Never crashes on
 * arbitrary input.
 */
Message decode(std::span<const std::uint8_t> frame);
Message decode(std::string_view frame);

/// Decodes a frame payload (the document without its length header).
Message decode_payload(std::string_view payload);

/// Big-endian length from a 4-byte header; throws kMalformedFrame above kMaxFrameBytes.
std::uint32_t read_length(std::span<const std::uint8_t, kHeaderBytes> header);

}  // namespace tunegrid::proto
