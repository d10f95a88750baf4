#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prockit {

// Every failure the library reports maps onto exactly one of these codes. The
// C API exposes the same set as `pk_status` values, so keep the two in sync.
enum class ErrorCode {
  kIo = 1,
  kUsage,
  kMalformedMarkup,
  kNotAnArticle,
  kNoNamedMethods,
  kDuplicateId,
  kValidation,
  kNotImperative,
  kEmptyQuery,
  kUnknownDocument,
  kDimensionMismatch,
  kPoolTooSmall,
  kAllFiltered,
  kMissingCounterpart,
  kScorerFailure,
  kEmptyCorpus,
  kConfig,
  kDegenerateInput,
  kDuplicateKeys,
  kNoHyperlinks,
  kInvalidGrid,
  kUnknownEntity,
  kNotFound,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // 1-based input line, for errors raised while reading line-oriented files.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace prockit
