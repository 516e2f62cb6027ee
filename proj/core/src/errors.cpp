#include "sumforge/errors.hpp"

namespace sumforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kVocabularyMissing: return "VocabularyMissing";
    case ErrorCode::kInvalidN: return "InvalidN";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kCorpusReadError: return "CorpusReadError";
    case ErrorCode::kTemplateError: return "TemplateError";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kCacheError: return "CacheError";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kTokenizerMismatch: return "TokenizerMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTierViolation: return "TierViolation";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kMissingTier: return "MissingTier";
    case ErrorCode::kTrainerFailure: return "TrainerFailure";
    case ErrorCode::kCheckpointMissing: return "CheckpointMissing";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kDegenerateGroups: return "DegenerateGroups";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sumforge
