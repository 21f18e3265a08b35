#include "rwtrace/errors.hpp"

namespace rwtrace {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kZeroWeight: return "ZeroWeight";
    case ErrorCode::kNotAdjacent: return "NotAdjacent";
    case ErrorCode::kIsolatedVertex: return "IsolatedVertex";
    case ErrorCode::kVertexAbsent: return "VertexAbsent";
    case ErrorCode::kNonAdjacentStep: return "NonAdjacentStep";
    case ErrorCode::kDiscontinuousExtension: return "DiscontinuousExtension";
    case ErrorCode::kUnsettledNeighborhood: return "UnsettledNeighborhood";
    case ErrorCode::kNoPositiveRoot: return "NoPositiveRoot";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kTargetOutsideHull: return "TargetOutsideHull";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kPathTooShort: return "PathTooShort";
    case ErrorCode::kInsufficientBlocks: return "InsufficientBlocks";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace rwtrace
