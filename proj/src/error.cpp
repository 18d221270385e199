#include "lexreport/error.hpp"

namespace lexreport {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::ResponseEmpty: return "ResponseEmpty";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::ParseMismatch: return "ParseMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::FormatViolation: return "FormatViolation";
    case ErrorCode::EmptyToc: return "EmptyToc";
    case ErrorCode::NotALeaf: return "NotALeaf";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::EmptyRetrieval: return "EmptyRetrieval";
    case ErrorCode::UnknownLeafId: return "UnknownLeafId";
    case ErrorCode::BadTemplate: return "BadTemplate";
    case ErrorCode::CorruptSession: return "CorruptSession";
    case ErrorCode::ScoreParseFailure: return "ScoreParseFailure";
    case ErrorCode::NotEvaluable: return "NotEvaluable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lexreport
