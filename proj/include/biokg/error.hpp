#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

// Stable error codes. The string form is part of the REST and CLI surface.
enum class ErrorCode {
    InvalidArgument,
    InvalidIri,
    UnknownIri,
    DuplicateEntity,
    NotFound,
    MalformedStanza,
    MalformedTagLine,
    MalformedInput,
    EmptyGraph,
    SingleEntityGraph,
    NonFiniteLoss,
    EmptyCorpus,
    DimensionMismatch,
    VersionExists,
    CorruptStore,
    IoFailure,
    InvalidProv,
    FetchFailed,
    PipelineFailed,
    AmbiguousLabel,
    ZeroVector,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised when a label resolves to more than one concept.
class AmbiguousLabelError : public Error {
public:
    AmbiguousLabelError(const std::string& message, std::vector<std::string> candidates)
        : Error(ErrorCode::AmbiguousLabel, message), candidates_(std::move(candidates)) {}

    const std::vector<std::string>& candidates() const noexcept { return candidates_; }

private:
    std::vector<std::string> candidates_;
};

// True for errors caused by the caller's input rather than by the system.
bool is_user_error(ErrorCode code) noexcept;

} // namespace biokg
