#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prockit {

struct Step {
  std::string id;  // "<article id>#<method index>#<step index>", 0-based
  std::string headline;
  std::vector<std::string> details;
  std::vector<std::string> bullets;
  std::optional<std::string> link_target;

  bool operator==(const Step&) const = default;
};

struct MethodSection {
  std::optional<std::string> name;
  std::vector<Step> steps;

  bool operator==(const MethodSection&) const = default;
};

struct Hyperlink {
  std::string step_id;
  std::string target_article_id;

  bool operator==(const Hyperlink&) const = default;
};

struct Article {
  std::string id;
  std::string title;  // the goal
  std::vector<std::string> category_path;
  std::string language = "en";
  std::vector<MethodSection> methods;
  std::vector<Hyperlink> hyperlinks;

  std::size_t step_count() const;
  // Steps of all methods in article order.
  std::vector<const Step*> steps() const;
  const Step* find_step(std::string_view step_id) const;

  bool operator==(const Article&) const = default;
};

enum class Granularity { kTitle, kMethod };

struct Procedure {
  std::string goal;
  std::vector<std::string> steps;
  std::vector<std::string> step_ids;  // parallel to `steps`
  std::string source_article;
  std::optional<std::string> source_method;
  Granularity granularity = Granularity::kTitle;
};

enum class MarkupFormat { kHtmlSubset, kRecord };

// Throws Error{kMalformedMarkup} for unparseable input, Error{kNotAnArticle}
// when the markup lacks a title or steps, Error{kValidation} when the result
// breaks an Article invariant.
Article parse_article(std::string_view markup, MarkupFormat format);

// Throws Error{kValidation} describing the first broken invariant.
void validate_article(const Article& article);

// Canonical single-line JSON form (sorted keys, no trailing newline).
std::string serialize_article(const Article& article);

// Throws Error{kNoNamedMethods} for kMethod when no method carries a name.
std::vector<Procedure> extract_procedures(const Article& article,
                                          Granularity granularity);

// Immutable, id-indexed collection of articles. Articles are kept sorted by
// id so iteration order never depends on load order.
class Corpus {
 public:
  struct StepRef {
    const Article* article = nullptr;
    const Step* step = nullptr;
    std::size_t method_index = 0;
    std::size_t step_index = 0;  // within its method
    std::size_t flat_index = 0;  // within the whole article
  };

  Corpus() = default;
  Corpus(const Corpus&) = delete;
  Corpus& operator=(const Corpus&) = delete;
  Corpus(Corpus&&) noexcept;
  Corpus& operator=(Corpus&&) noexcept;

  // Throws Error{kDuplicateId} on repeated article or step ids.
  static Corpus from_articles(std::vector<Article> articles);

  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }
  const std::vector<Article>& articles() const { return articles_; }
  const Article* find(std::string_view id) const;
  const StepRef* find_step(std::string_view step_id) const;

  // One title-granularity procedure per article, in id order.
  std::vector<Procedure> procedures() const;

  // JSON Lines, one canonical article per line, in id order.
  void save(const std::filesystem::path& path) const;

 private:
  void build_lookup();

  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, StepRef> steps_;
};

// Reads a JSON Lines corpus. Blank lines are skipped. Errors carry the 1-based
// line number: Error{kDuplicateId}, Error{kValidation}, Error{kMalformedMarkup}
// or Error{kNotAnArticle}; Error{kIo} when the file cannot be read.
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace prockit
