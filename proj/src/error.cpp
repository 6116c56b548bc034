#include "biokg/error.hpp"

namespace biokg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidIri: return "InvalidIri";
    case ErrorCode::UnknownIri: return "UnknownIri";
    case ErrorCode::DuplicateEntity: return "DuplicateEntity";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::MalformedStanza: return "MalformedStanza";
    case ErrorCode::MalformedTagLine: return "MalformedTagLine";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::SingleEntityGraph: return "SingleEntityGraph";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::VersionExists: return "VersionExists";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidProv: return "InvalidProv";
    case ErrorCode::FetchFailed: return "FetchFailed";
    case ErrorCode::PipelineFailed: return "PipelineFailed";
    case ErrorCode::AmbiguousLabel: return "AmbiguousLabel";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

bool is_user_error(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidIri:
    case ErrorCode::UnknownIri:
    case ErrorCode::DuplicateEntity:
    case ErrorCode::NotFound:
    case ErrorCode::MalformedStanza:
    case ErrorCode::MalformedTagLine:
    case ErrorCode::MalformedInput:
    case ErrorCode::EmptyGraph:
    case ErrorCode::SingleEntityGraph:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::VersionExists:
    case ErrorCode::AmbiguousLabel:
        return true;
    default:
        return false;
    }
}

} // namespace biokg
