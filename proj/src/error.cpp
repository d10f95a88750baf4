#include "prockit/error.hpp"

namespace prockit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kMalformedMarkup: return "malformed_markup";
    case ErrorCode::kNotAnArticle: return "not_an_article";
    case ErrorCode::kNoNamedMethods: return "no_named_methods";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kNotImperative: return "not_imperative";
    case ErrorCode::kEmptyQuery: return "empty_query";
    case ErrorCode::kUnknownDocument: return "unknown_document";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kPoolTooSmall: return "pool_too_small";
    case ErrorCode::kAllFiltered: return "all_filtered";
    case ErrorCode::kMissingCounterpart: return "missing_counterpart";
    case ErrorCode::kScorerFailure: return "scorer_failure";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kDuplicateKeys: return "duplicate_keys";
    case ErrorCode::kNoHyperlinks: return "no_hyperlinks";
    case ErrorCode::kInvalidGrid: return "invalid_grid";
    case ErrorCode::kUnknownEntity: return "unknown_entity";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

namespace {

std::string with_line(const std::string& message,
                      std::optional<std::size_t> line) {
  if (!line) return message;
  return "line " + std::to_string(*line) + ": " + message;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(with_line(message, line)), code_(code), line_(line) {}

}  // namespace prockit
