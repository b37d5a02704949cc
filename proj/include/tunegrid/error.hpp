#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunegrid {

enum class ErrorCode {
  kSchemaMismatch,
  kEmptyInput,
  kDegenerateReference,
  kMissingReference,
  kInvalidArgument,
  kOutOfSpace,
  kEmptyCache,
  kUnknownTeam,
  kUnknownJob,
  kUnknownWorker,
  kDuplicateWorker,
  kStaleResult,
  kInvalidState,
  kMalformedFrame,
  kUnknownKind,
  kVersionMismatch,
  kProtocol,
  kTransport,
  kDuplicateName,
  kUnknownGroup,
  kUnknownApp,
  kUnknownAlias,
  kDuplicateAlias,
  kDuplicateTeam,
  kNotOwner,
  kNotMember,
  kConfig,
  kIo,
};

/// Stable snake_case name, used as the `code` field on the wire and in API errors.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tunegrid
