#include <nlohmann/json.hpp>

#include "tunegrid/error.hpp"
#include "tunegrid/histo/json.hpp"
#include "tunegrid/proto/message.hpp"

namespace tunegrid::proto {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& detail) { throw Error(ErrorCode::kMalformedFrame, detail); }

std::string get_string(const json& body, const char* field) {
  const json& v = body.at(field);
  if (!v.is_string()) malformed(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_unsigned(const json& body, const char* field) {
  const json& v = body.at(field);
  if (!v.is_number_unsigned()) malformed(std::string("field '") + field + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

json body_of(const Message& m) {
  return std::visit(
      [](const auto& msg) -> json {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          return {{"worker_id", msg.worker_id},
                  {"team_id", msg.team_id},
                  {"capability", msg.capability},
                  {"protocol_version", msg.protocol_version},
                  {"owner", msg.owner}};
        } else if constexpr (std::is_same_v<T, Welcome>) {
          json b{{"heartbeat_interval_ms", msg.heartbeat_interval_ms}};
          if (msg.model) b["model"] = *msg.model;
          return b;
        } else if constexpr (std::is_same_v<T, Assign>) {
          return {{"job_id", msg.job_id},
                  {"params", msg.params},
                  {"chunk_events", msg.chunk_events},
                  {"chunk_seed", msg.chunk_seed}};
        } else if constexpr (std::is_same_v<T, Interim>) {
          return {{"job_id", msg.job_id}, {"chunk", msg.chunk}};
        } else if constexpr (std::is_same_v<T, Abort>) {
          return {{"job_id", msg.job_id}, {"reason", jobs::to_string(msg.reason)}};
        } else if constexpr (std::is_same_v<T, Err>) {
          return {{"code", msg.code}, {"detail", msg.detail}};
        } else {
          return json::object();
        }
      },
      m);
}

Message parse_body(const std::string& kind, const json& body) {
  if (kind == "HELLO") {
    Hello h;
    h.worker_id = get_string(body, "worker_id");
    h.team_id = get_string(body, "team_id");
    if (!body.at("capability").is_number()) malformed("capability must be a number");
    h.capability = body.at("capability").get<double>();
    const json& version = body.at("protocol_version");
    if (!version.is_number_integer()) malformed("protocol_version must be an integer");
    if (version.get<std::int64_t>() != kProtocolVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "protocol version " + version.dump() + " not supported (expected " +
                      std::to_string(kProtocolVersion) + ")");
    }
    if (body.contains("owner")) h.owner = get_string(body, "owner");
    return h;
  }
  if (kind == "WELCOME") {
    Welcome w;
    if (!body.at("heartbeat_interval_ms").is_number_integer()) malformed("heartbeat_interval_ms must be an integer");
    w.heartbeat_interval_ms = body.at("heartbeat_interval_ms").get<std::int64_t>();
    if (body.contains("model")) w.model = body.at("model").get<gen::GeneratorModel>();
    return w;
  }
  if (kind == "PING") return Ping{};
  if (kind == "PONG") return Pong{};
  if (kind == "BYE") return Bye{};
  if (kind == "ASSIGN") {
    Assign a;
    a.job_id = get_string(body, "job_id");
    a.params = body.at("params").get<tune::TuneParameters>();
    a.chunk_events = get_unsigned(body, "chunk_events");
    a.chunk_seed = get_unsigned(body, "chunk_seed");
    return a;
  }
  if (kind == "INTERIM") {
    Interim i;
    i.job_id = get_string(body, "job_id");
    i.chunk = body.at("chunk").get<histo::HistogramSet>();
    return i;
  }
  if (kind == "ABORT") {
    Abort a;
    a.job_id = get_string(body, "job_id");
    a.reason = jobs::abort_reason_from_string(get_string(body, "reason"));
    return a;
  }
  if (kind == "ERR") return Err{get_string(body, "code"), get_string(body, "detail")};
  throw Error(ErrorCode::kUnknownKind, "unknown message kind '" + kind + "'");
}

}  // namespace

std::string_view kind_name(const Message& m) {
  static constexpr std::string_view kNames[] = {"HELLO", "WELCOME", "PING",  "PONG", "ASSIGN",
                                                "INTERIM", "ABORT",  "BYE", "ERR"};
  return kNames[m.index()];
}

std::string encode(const Message& m) {
  const std::string payload = json{{"kind", kind_name(m)}, {"body", body_of(m)}}.dump();
  if (payload.size() > kMaxFrameBytes) throw Error(ErrorCode::kMalformedFrame, "message exceeds maximum frame size");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string frame;
  frame.reserve(kHeaderBytes + payload.size());
  frame.push_back(static_cast<char>((n >> 24) & 0xff));
  frame.push_back(static_cast<char>((n >> 16) & 0xff));
  frame.push_back(static_cast<char>((n >> 8) & 0xff));
  frame.push_back(static_cast<char>(n & 0xff));
  frame += payload;
  return frame;
}

std::uint32_t read_length(std::span<const std::uint8_t, kHeaderBytes> header) {
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n > kMaxFrameBytes) malformed("frame length " + std::to_string(n) + " exceeds maximum");
  return n;
}

Message decode_payload(std::string_view payload) {
  json doc = json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) malformed("frame payload is not a valid document");
  if (!doc.is_object()) malformed("frame document must be an object");
  auto kind = doc.find("kind");
  if (kind == doc.end() || !kind->is_string()) malformed("frame document lacks a string 'kind'");
  auto body = doc.find("body");
  if (body == doc.end() || !body->is_object()) malformed("frame document lacks an object 'body'");
  try {
    return parse_body(kind->get<std::string>(), *body);
  } catch (const json::exception& e) {
    malformed(std::string("bad message body: ") + e.what());
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kMalformedFrame:
      case ErrorCode::kUnknownKind:
      case ErrorCode::kVersionMismatch:
        throw;
      default:
        malformed(std::string("bad message body: ") + e.what());
    }
  }
}

Message decode(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderBytes) malformed("truncated frame header");
  const std::uint32_t n = read_length(frame.first<kHeaderBytes>());
  if (frame.size() - kHeaderBytes != n) {
    malformed(frame.size() - kHeaderBytes < n ? "truncated frame" : "trailing bytes after frame");
  }
  const auto* data = reinterpret_cast<const char*>(frame.data() + kHeaderBytes);
  return decode_payload(std::string_view(data, n));
}

Message decode(std::string_view frame) {
  return decode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(frame.data()), frame.size()));
}

}  // namespace tunegrid::proto
