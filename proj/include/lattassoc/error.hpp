#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lattassoc {

// Stable error codes; the CLI reports them by name in its stderr JSON.
enum class ErrorCode {
    InvalidArgument,
    LengthMismatch,
    MissingGeometry,
    UnknownVariable,
    DegenerateLattice,
    RankDeficient,
    ZeroVariance,
    EmptyWeights,
    DegenerateConditioning,
    SingularSystem,
    ParseError,
    DuplicateId,
    MissingId,
    MissingSite,
    UnknownSite,
    NonNumericValue,
    ConfigError,
    IoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lattassoc
