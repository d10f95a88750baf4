#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/suggest.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

// Searchable text of an article: its title followed by every step headline.
std::string article_search_text(const Article& article);

// The artifacts written by the `index` command: a BM25 index over articles
// and the step vectors used for suggestion.
struct IndexBundle {
  InvertedIndex search;
  SuggestIndex steps;
};

IndexBundle build_index_bundle(const Corpus& corpus, const Embedder& embedder,
                               const std::vector<std::string>& candidate_fields,
                               Bm25Params params = {});

// Directory layout: manifest.json, search.idx, embedder.cfg, candidates.vec,
// headlines.vec. Throws Error{kIo} naming the failing file.
void save_index_bundle(const IndexBundle& bundle, const std::filesystem::path& dir);
IndexBundle load_index_bundle(const std::filesystem::path& dir);

// Throws Error{kConfig} when the bundle was built from a different corpus.
void check_index_bundle(const IndexBundle& bundle, const Corpus& corpus);

}  // namespace prockit
