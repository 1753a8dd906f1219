#include "lattassoc/error.hpp"

namespace lattassoc {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::MissingGeometry: return "MissingGeometry";
        case ErrorCode::UnknownVariable: return "UnknownVariable";
        case ErrorCode::DegenerateLattice: return "DegenerateLattice";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::EmptyWeights: return "EmptyWeights";
        case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::MissingId: return "MissingId";
        case ErrorCode::MissingSite: return "MissingSite";
        case ErrorCode::UnknownSite: return "UnknownSite";
        case ErrorCode::NonNumericValue: return "NonNumericValue";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace lattassoc
