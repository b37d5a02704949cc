#include "tunegrid/error.hpp"

namespace tunegrid {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaMismatch: return "schema_mismatch";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kDegenerateReference: return "degenerate_reference";
    case ErrorCode::kMissingReference: return "missing_reference";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfSpace: return "out_of_space";
    case ErrorCode::kEmptyCache: return "empty_cache";
    case ErrorCode::kUnknownTeam: return "unknown_team";
    case ErrorCode::kUnknownJob: return "unknown_job";
    case ErrorCode::kUnknownWorker: return "unknown_worker";
    case ErrorCode::kDuplicateWorker: return "duplicate_worker";
    case ErrorCode::kStaleResult: return "stale_result";
    case ErrorCode::kInvalidState: return "invalid_state";
    case ErrorCode::kMalformedFrame: return "malformed_frame";
    case ErrorCode::kUnknownKind: return "unknown_kind";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kDuplicateName: return "duplicate_name";
    case ErrorCode::kUnknownGroup: return "unknown_group";
    case ErrorCode::kUnknownApp: return "unknown_app";
    case ErrorCode::kUnknownAlias: return "unknown_alias";
    case ErrorCode::kDuplicateAlias: return "duplicate_alias";
    case ErrorCode::kDuplicateTeam: return "duplicate_team";
    case ErrorCode::kNotOwner: return "not_owner";
    case ErrorCode::kNotMember: return "not_member";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace tunegrid
