#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edrep {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyTitle,
  kCorruptStream,
  kParseError,
  kInvalidSpan,
  kMissingGold,
  kTokenizerNotRoundTrip,
  kEmptyCandidateSet,
  kInvalidPrefix,
  kScorerFailure,
  kBudgetTooSmall,
  kNoTokens,
  kNoOverlap,
  kEmptyRecordSet,
  kUnknownDatasetName,
  kMisalignedRecords,
  kBridgeProtocol,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edrep
