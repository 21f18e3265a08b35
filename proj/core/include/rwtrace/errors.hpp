#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwtrace {

enum class ErrorCode {
  kInvalidDistribution,
  kZeroWeight,
  kNotAdjacent,
  kIsolatedVertex,
  kVertexAbsent,
  kNonAdjacentStep,
  kDiscontinuousExtension,
  kUnsettledNeighborhood,
  kNoPositiveRoot,
  kNonConvergence,
  kTargetOutsideHull,
  kDomainError,
  kBudgetExhausted,
  kPathTooShort,
  kInsufficientBlocks,
  kSingularSystem,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library are reported through this type;
// callers switch on code() rather than parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rwtrace
