#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace senssolve {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedInput,
  kEmptyInput,
  kMissingTreated,
  kMultipleTreated,
  kNonFiniteOutcome,
  kStratumTooSmall,
  kLengthTooSmall,
  kDegenerateVariance,
  kProbabilityRowInvalid,
  kInfeasibleRestriction,
  kRankDeficientQ,
  kLeverageOne,
  kTooFewStrata,
  kNoCrossingBelowMax,
  kDegenerateSE,
  kNonBinaryOutcome,
  kInfeasibleTau0,
  kNonIntegerTarget,
  kUnknownScenario,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library. `what()` reads "<CodeName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingTreated: return "MissingTreated";
    case ErrorCode::kMultipleTreated: return "MultipleTreated";
    case ErrorCode::kNonFiniteOutcome: return "NonFiniteOutcome";
    case ErrorCode::kStratumTooSmall: return "StratumTooSmall";
    case ErrorCode::kLengthTooSmall: return "LengthTooSmall";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kProbabilityRowInvalid: return "ProbabilityRowInvalid";
    case ErrorCode::kInfeasibleRestriction: return "InfeasibleRestriction";
    case ErrorCode::kRankDeficientQ: return "RankDeficientQ";
    case ErrorCode::kLeverageOne: return "LeverageOne";
    case ErrorCode::kTooFewStrata: return "TooFewStrata";
    case ErrorCode::kNoCrossingBelowMax: return "NoCrossingBelowMax";
    case ErrorCode::kDegenerateSE: return "DegenerateSE";
    case ErrorCode::kNonBinaryOutcome: return "NonBinaryOutcome";
    case ErrorCode::kInfeasibleTau0: return "InfeasibleTau0";
    case ErrorCode::kNonIntegerTarget: return "NonIntegerTarget";
    case ErrorCode::kUnknownScenario: return "UnknownScenario";
  }
  return "Unknown";
}

}  // namespace senssolve
