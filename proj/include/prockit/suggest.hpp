#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/rankagg.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // per input vector, numbered by first appearance
  std::vector<Vector> centroids;    // indexed by label
  double inertia = 0.0;
};

// K-means with k-means++ seeding, `n_init` seeded restarts (lowest inertia
// wins), at most 100 Lloyd iterations and a 1e-6 tolerance on the largest
// centroid shift. Throws Error{kDegenerateInput} when there are fewer
// distinct vectors than clusters and Error{kUsage} for n_clusters == 0 or
// vectors of unequal length.
ClusterAssignment cluster_steps(const std::vector<Vector>& vectors, std::size_t n_clusters,
                                std::uint64_t seed, std::size_t n_init = 10);

enum class RelatednessScorer { kEmbeddingCosine, kExternal };
enum class OrderingScorerKind { kEmbeddingPrior, kPositionOracle };

struct SuggestionConfig {
  std::size_t k = 20;
  std::optional<std::size_t> n_clusters;  // unset: ceil(k / 2)
  RelatednessScorer scorer = RelatednessScorer::kEmbeddingCosine;
  // Lines of "goal<TAB>step id<TAB>score"; used with RelatednessScorer::kExternal.
  std::optional<std::filesystem::path> score_file;
  OrderingScorerKind ordering_scorer = OrderingScorerKind::kEmbeddingPrior;
  std::size_t prior_neighbours = 10;
  // Any of "headline", "goal", "details", "bullets".
  std::vector<std::string> candidate_fields = {"headline", "goal"};
  std::uint64_t seed = 0;
  std::size_t n_init = 10;
};

// Step vectors used by the suggestion pipeline: one over the configured
// candidate fields for goal relatedness, one over headlines for clustering
// and the ordering prior. Both are keyed by step id.
class SuggestIndex {
 public:
  // Throws Error{kEmptyCorpus} or Error{kConfig} for an unknown field.
  static SuggestIndex build(const Corpus& corpus, const Embedder& embedder,
                            const std::vector<std::string>& candidate_fields);
  // From persisted parts. Throws Error{kDimensionMismatch} when the vector
  // dimensions disagree with the embedder and Error{kConfig} when the two
  // indexes do not hold the same step ids.
  static SuggestIndex assemble(Embedder embedder, VectorIndex candidates, VectorIndex headlines,
                               std::vector<std::string> candidate_fields);

  const Embedder& embedder() const { return embedder_; }
  const VectorIndex& candidates() const { return candidates_; }
  const VectorIndex& headlines() const { return headlines_; }
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  Embedder embedder_;
  VectorIndex candidates_;
  VectorIndex headlines_;
  std::vector<std::string> fields_;
};

struct SuggestedStep {
  std::string text;
  std::string step_id;
  double relatedness = 0.0;
  std::size_t cluster = 0;
};

struct SuggestedSequence {
  std::string goal;
  std::vector<SuggestedStep> steps;       // final order, one per cluster
  std::vector<SuggestedStep> candidates;  // top-K by relatedness
  TournamentResult diagnostics;           // indexes refer to the medoid list
  std::size_t clusters_requested = 0;
};

// Scores every corpus step against `goal`, keeps the K best distinct
// headlines (case-insensitive), clusters their headline vectors, keeps each
// cluster's medoid and orders the medoids by tournament. Throws
// Error{kEmptyCorpus}, Error{kConfig} (n_clusters > K, K == 0, missing score
// file) or Error{kNotFound} when an external score file has no entry for
// the goal.
SuggestedSequence suggest_steps(std::string_view goal, const Corpus& corpus,
                                const SuggestIndex& index, const SuggestionConfig& config);

std::string suggested_sequence_to_json(const SuggestedSequence& seq);
std::string suggested_sequence_text(const SuggestedSequence& seq);

struct EditDistance {
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t moves = 0;
  std::size_t total = 0;

  bool operator==(const EditDistance&) const = default;
};

// Insert/delete/move-one-element distance between sequences of distinct
// keys. Throws Error{kDuplicateKeys}.
EditDistance edit_distance(const std::vector<std::string>& predicted,
                           const std::vector<std::string>& reference);

struct EditRecord {
  std::string id;
  std::vector<std::string> steps;
};

// JSON Lines of {"id": ..., "steps": [...]}. Errors carry line numbers.
std::vector<EditRecord> load_edit_records(const std::filesystem::path& path);

struct EditEvalRow {
  std::string id;
  EditDistance distance;
  bool missing_prediction = false;
};

struct EditEvalReport {
  std::vector<EditEvalRow> rows;  // reference order
  EditDistance sum;
  double mean_total = 0.0;
  std::size_t unmatched_predictions = 0;
};

// Missing predictions count as empty sequences.
EditEvalReport evaluate_edits(const std::vector<EditRecord>& predicted,
                              const std::vector<EditRecord>& reference);
std::string edit_report_text(const EditEvalReport& report);

}  // namespace prockit
