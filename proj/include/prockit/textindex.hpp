#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace prockit {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredDoc {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

struct QueryOptions {
  // Doubles the weight of the first query token and of the last token that
  // is not a function word (a cheap verb/object emphasis).
  bool emphasize_verb_object = false;
};

// BM25 postings over a fixed document set. Documents are stored in ascending
// id order, so the index does not depend on insertion order.
class InvertedIndex {
 public:
  struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
    bool operator==(const Posting&) const = default;
  };

  InvertedIndex() = default;

  // Throws Error{kDuplicateId} on repeated ids.
  static InvertedIndex build(
      const std::vector<std::pair<std::string, std::string>>& docs,
      Bm25Params params = {});

  std::size_t doc_count() const { return doc_ids_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::uint32_t doc_length(std::size_t doc) const { return doc_lengths_[doc]; }
  std::size_t document_frequency(const std::string& term) const;
  const std::vector<Posting>* postings(const std::string& term) const;

  // idf = ln(1 + (N - df + 0.5) / (df + 0.5))
  double idf(std::size_t df) const;

  // Line-based format with a magic header and a CRC-32 trailer.
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);
  std::string serialize() const;
  static InvertedIndex deserialize(std::string_view data);

  bool operator==(const InvertedIndex& other) const;

 private:
  void finish();

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

// Top-k documents by BM25, ties by ascending doc id; documents with score 0
// are dropped. Throws Error{kEmptyQuery} when no token survives tokenization
// and Error{kUsage} for k == 0.
std::vector<ScoredDoc> bm25_search(const InvertedIndex& index,
                                   std::string_view query, std::size_t k,
                                   const QueryOptions& options = {});

// All documents with a positive score, best first.
std::vector<ScoredDoc> bm25_score_all(const InvertedIndex& index,
                                      std::string_view query,
                                      const QueryOptions& options = {});

using Vector = std::vector<float>;

enum class EmbedderKind { kTfidf, kHashedCharNgram, kExternal };

std::string_view embedder_kind_name(EmbedderKind kind);

// Text -> fixed-length vector. Built-in kinds are deterministic functions of
// their configuration and return unit-length vectors (or all zeros when the
// text has no features).
class Embedder {
 public:
  // Vocabulary and smoothed idf fitted on `texts`; dim = vocabulary size.
  static Embedder tfidf(const std::vector<std::string>& texts);
  // Character 3- and 4-grams of each token (with boundary markers) plus the
  // token itself, hashed into `dim` buckets.
  static Embedder hashed_char_ngram(std::size_t dim = 512,
                                    std::uint64_t seed = 0);
  // "key<TAB>v1 v2 ..." per line. Keys are document ids or texts.
  static Embedder external(const std::filesystem::path& path);

  EmbedderKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }

  // Throws Error{kUnknownDocument} for external embedders when `text` is not
  // a key of the vector file.
  Vector embed(std::string_view text) const;
  // External embedders look `id` up first and fall back to `text`.
  Vector embed_document(std::string_view id, std::string_view text) const;

  // Configuration round trip (vocabulary, seed, or vector file contents).
  std::string serialize() const;
  static Embedder deserialize(std::string_view data);

 private:
  EmbedderKind kind_ = EmbedderKind::kHashedCharNgram;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, std::pair<std::size_t, double>> vocab_;
  std::unordered_map<std::string, Vector> external_;
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

enum class Metric { kCosine, kL2 };

struct Neighbor {
  std::string id;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Dense vectors with exact nearest-neighbor search. Cosine indexes store unit
// vectors and report 1 - cosine similarity; L2 indexes report Euclidean
// distance.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::size_t dim, Metric metric) : dim_(dim), metric_(metric) {}

  // Throws Error{kDimensionMismatch} or Error{kDuplicateId}.
  static VectorIndex build(std::size_t dim, Metric metric,
                           std::vector<std::pair<std::string, Vector>> entries);

  std::size_t dim() const { return dim_; }
  Metric metric() const { return metric_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> vector(std::size_t i) const;
  // Index of `id`, or size() when absent.
  std::size_t find(std::string_view id) const;

  double distance(std::span<const float> query, std::size_t i) const;

  // k nearest by the index metric, ties by ascending id. k larger than the
  // index returns everything. Throws Error{kDimensionMismatch}.
  std::vector<Neighbor> knn(std::span<const float> query, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  static VectorIndex load(const std::filesystem::path& path);
  std::string serialize() const;
  static VectorIndex deserialize(std::string_view data);

 private:
  std::size_t dim_ = 0;
  Metric metric_ = Metric::kCosine;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Line-format helpers shared by the persisted artifacts.
namespace persist {
// Appends "checksum <crc32 hex>\n" covering everything before it.
std::string seal(std::string body, std::string_view magic);
// Verifies magic and checksum; returns the body lines between them.
std::vector<std::string> open(std::string_view data, std::string_view magic);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);
}  // namespace persist

}  // namespace prockit
