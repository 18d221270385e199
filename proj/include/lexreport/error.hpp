#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexreport {

enum class ErrorCode {
  // corpus
  FileNotFound,
  EmptyCorpus,
  NotFound,
  EmptyQuery,
  // providers
  ProviderUnavailable,
  ResponseEmpty,
  DimensionMismatch,
  UnknownStage,
  // indexer
  ParseMismatch,
  VersionMismatch,
  CorruptIndex,
  // retrieval
  EmptyIndex,
  NoCandidates,
  InvalidParams,
  // clustering
  TooFewPoints,
  // outline
  FormatViolation,
  EmptyToc,
  NotALeaf,
  UnknownNode,
  // contentgen
  EmptyRetrieval,
  // report
  UnknownLeafId,
  BadTemplate,
  CorruptSession,
  // evalsuite
  ScoreParseFailure,
  NotEvaluable,
  // config / io
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the engine; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lexreport
