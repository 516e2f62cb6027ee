#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sumforge {

enum class ErrorCode {
  kVocabularyMissing,
  kInvalidN,
  kEmptyDocument,
  kCorpusReadError,
  kTemplateError,
  kBackendUnavailable,
  kEmptyCompletion,
  kCacheError,
  kInsufficientData,
  kTokenizerMismatch,
  kEmptyCorpus,
  kTierViolation,
  kInvalidK,
  kMissingTier,
  kTrainerFailure,
  kCheckpointMissing,
  kNotNormalized,
  kUnknownVariable,
  kAlignmentError,
  kDegenerateGroups,
  kInvalidConfig,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Domain error raised by every sumforge module. The code identifies the
// failure class; what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sumforge
