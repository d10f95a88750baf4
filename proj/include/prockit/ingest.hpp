#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/error.hpp"

namespace prockit {

enum class IngestFormat { kAuto, kHtmlSubset, kRecord };

struct IngestOptions {
  // kAuto: *.html / *.htm are markup, *.jsonl one record per line, *.json a
  // single record.
  IngestFormat format = IngestFormat::kAuto;
  // Reject bad inputs into the report instead of failing.
  bool keep_going = false;
};

struct IngestIssue {
  std::string path;
  std::optional<std::size_t> line;
  ErrorCode code = ErrorCode::kValidation;
  std::string message;
};

struct IngestReport {
  std::size_t files = 0;
  std::size_t articles = 0;
  std::vector<IngestIssue> rejected;
};

// Directories are walked recursively for the recognised extensions; all
// files are read in ascending path order. An article or step id seen before
// is a duplicate. Without keep_going the first problem throws, prefixed with
// the file path (and carrying the line for record files).
Corpus ingest(const std::vector<std::filesystem::path>& inputs, const IngestOptions& options = {},
              IngestReport* report = nullptr);

std::string ingest_report_text(const IngestReport& report);

}  // namespace prockit
