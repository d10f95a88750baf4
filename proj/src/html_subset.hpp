#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prockit/corpus.hpp"

namespace prockit::html {

struct Node {
  std::string tag;  // empty for text nodes
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // text nodes only, entities decoded
  std::vector<std::unique_ptr<Node>> children;

  bool is_text() const { return tag.empty(); }
  const std::string* attribute(std::string_view name) const;
  bool has_class(std::string_view cls) const;
};

// Parses a document into a synthetic root node. Throws
// Error{kMalformedMarkup} on unterminated tags, bad nesting or stray closers.
std::unique_ptr<Node> parse_document(std::string_view markup);

// Applies the article grammar on top of parse_document(). Ids and hyperlinks
// are left for the caller to finalize.
Article parse_article_html(std::string_view markup);

}  // namespace prockit::html
