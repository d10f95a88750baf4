#include "prockit/ingest.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "prockit/text.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

namespace {

namespace fs = std::filesystem;

bool recognised(const fs::path& p) {
  const auto ext = text::casefold(p.extension().string());
  return ext == ".html" || ext == ".htm" || ext == ".jsonl" || ext == ".json";
}

std::vector<fs::path> expand(const std::vector<fs::path>& inputs) {
  std::set<fs::path> files;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      for (auto it = fs::recursive_directory_iterator(in, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec))
        if (it->is_regular_file() && recognised(it->path())) files.insert(it->path());
      if (ec) throw Error(ErrorCode::kIo, in.string() + ": " + ec.message());
    } else if (fs::exists(in, ec)) {
      files.insert(in);
    } else {
      throw Error(ErrorCode::kIo, in.string() + ": no such file or directory");
    }
  }
  return {files.begin(), files.end()};
}

enum class Kind { kHtml, kLines, kSingle };

Kind kind_of(const fs::path& p, IngestFormat format) {
  const auto ext = text::casefold(p.extension().string());
  if (format == IngestFormat::kHtmlSubset) return Kind::kHtml;
  if (format == IngestFormat::kRecord) return ext == ".json" ? Kind::kSingle : Kind::kLines;
  if (ext == ".html" || ext == ".htm") return Kind::kHtml;
  if (ext == ".json") return Kind::kSingle;
  return Kind::kLines;
}

}  // namespace

Corpus ingest(const std::vector<fs::path>& inputs, const IngestOptions& options, IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = {};
  std::vector<Article> articles;
  std::unordered_set<std::string> article_ids;
  std::unordered_set<std::string> step_ids;

  auto reject = [&](const fs::path& path, std::optional<std::size_t> line, const Error& e) {
    if (!options.keep_going) {
      throw Error(e.code(), path.string() + ": " + e.what(), line);
    }
    rep.rejected.push_back({path.string(), line, e.code(), e.what()});
  };
  auto accept = [&](Article a, const fs::path& path, std::optional<std::size_t> line) {
    if (article_ids.count(a.id)) {
      reject(path, line, Error(ErrorCode::kDuplicateId, "article id '" + a.id + "' seen before"));
      return;
    }
    for (const Step* s : a.steps())
      if (step_ids.count(s->id)) {
        reject(path, line, Error(ErrorCode::kDuplicateId, "step id '" + s->id + "' seen before"));
        return;
      }
    article_ids.insert(a.id);
    for (const Step* s : a.steps()) step_ids.insert(s->id);
    articles.push_back(std::move(a));
  };

  for (const auto& path : expand(inputs)) {
    ++rep.files;
    std::string data;
    try {
      data = persist::read_file(path);
    } catch (const Error& e) {
      reject(path, std::nullopt, e);
      continue;
    }
    const Kind kind = kind_of(path, options.format);
    if (kind != Kind::kLines) {
      try {
        accept(parse_article(data, kind == Kind::kHtml ? MarkupFormat::kHtmlSubset : MarkupFormat::kRecord),
               path, std::nullopt);
      } catch (const Error& e) {
        reject(path, std::nullopt, e);
      }
      continue;
    }
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
      const auto nl = data.find('\n', pos);
      const std::string_view line(data.data() + pos, (nl == std::string::npos ? data.size() : nl) - pos);
      pos = nl == std::string::npos ? data.size() : nl + 1;
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        accept(parse_article(line, MarkupFormat::kRecord), path, line_no);
      } catch (const Error& e) {
        reject(path, line_no, e);
      }
    }
  }
  rep.articles = articles.size();
  return Corpus::from_articles(std::move(articles));
}

std::string ingest_report_text(const IngestReport& report) {
  std::string out = "files\t" + std::to_string(report.files) + "\n";
  out += "articles\t" + std::to_string(report.articles) + "\n";
  out += "rejected\t" + std::to_string(report.rejected.size()) + "\n";
  for (const auto& r : report.rejected) {
    out += r.path;
    if (r.line) out += ":" + std::to_string(*r.line);
    out += "\t" + std::string(error_code_name(r.code)) + "\t" + r.message + "\n";
  }
  return out;
}

}  // namespace prockit
