#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

enum class McTask { kStepInference, kGoalInference };
enum class DistractorMethod { kBm25, kEmbedding };

std::string_view mc_task_name(McTask task);
std::string_view distractor_method_name(DistractorMethod method);

// Where a choice (or prompt) came from: an article plus a step id, or the
// article title when `ref` equals the article id.
struct ChoiceProvenance {
  std::string article_id;
  std::string ref;

  bool operator==(const ChoiceProvenance&) const = default;
  auto operator<=>(const ChoiceProvenance&) const = default;
};

struct McAudit {
  DistractorMethod distractor_method = DistractorMethod::kBm25;
  bool reassigned = false;

  bool operator==(const McAudit&) const = default;
};

struct MultipleChoiceExample {
  McTask task = McTask::kStepInference;
  std::string prompt;
  ChoiceProvenance prompt_provenance;
  std::array<std::string, 4> choices;
  std::size_t answer_index = 0;
  std::array<ChoiceProvenance, 4> provenance;
  McAudit audit;

  bool operator==(const MultipleChoiceExample&) const = default;
};

// Searchable candidate texts (steps or goals) with both index kinds.
class CandidatePool {
 public:
  struct Item {
    std::string id;
    std::string text;
    std::string article_id;
  };

  // Throws Error{kDuplicateId}.
  static CandidatePool build(std::vector<Item> items, const Embedder& embedder);
  // One item per step headline, or one per article title.
  static CandidatePool steps_of(const Corpus& corpus, const Embedder& embedder);
  static CandidatePool goals_of(const Corpus& corpus, const Embedder& embedder);

  std::size_t size() const { return items_.size(); }
  const std::vector<Item>& items() const { return items_; }
  const InvertedIndex& bm25() const { return bm25_; }
  const VectorIndex& vectors() const { return vectors_; }
  const Embedder& embedder() const { return embedder_; }

 private:
  std::vector<Item> items_;  // id order, parallel to both indexes
  InvertedIndex bm25_;
  VectorIndex vectors_;
  Embedder embedder_;
};

struct SampleOptions {
  bool emphasize_verb_object = false;
  // Extra exclusion on top of "same text as the target".
  std::function<bool(const CandidatePool::Item&)> exclude;
};

// The k pool items most similar to `target`, skipping items whose text equals
// the target (case-insensitively) and anything `exclude` rejects. BM25 ranks
// zero-score items last in id order; embedding ranks by cosine distance with
// ties by id. Throws Error{kPoolTooSmall} when fewer than k items survive and
// Error{kUsage} for k == 0.
std::vector<CandidatePool::Item> sample_distractors(std::string_view target,
                                                    const CandidatePool& pool,
                                                    std::size_t k,
                                                    DistractorMethod method,
                                                    const SampleOptions& options = {});

// Keeps candidates whose token Jaccard with `gold` is <= max_overlap, in
// order. Throws Error{kAllFiltered} when none survive and Error{kUsage} for an
// empty candidate list or max_overlap outside [0, 1].
std::vector<std::string> filter_false_negatives(const std::vector<std::string>& candidates,
                                                std::string_view gold, double max_overlap);

struct Counterpart {
  std::string text;
  ChoiceProvenance provenance;
};

// Keyed by ChoiceProvenance::ref of each choice.
using CounterpartMap = std::map<std::string, Counterpart>;

// Picks a uniformly random choice as the new answer and swaps the prompt for
// that choice's counterpart. Throws Error{kMissingCounterpart}.
MultipleChoiceExample debias_reassign(const MultipleChoiceExample& example,
                                      const CounterpartMap& counterparts,
                                      std::uint64_t seed);

struct McOptions {
  McTask task = McTask::kStepInference;
  DistractorMethod method = DistractorMethod::kBm25;
  double max_overlap = 0.5;
  std::uint64_t seed = 0;
  std::size_t per_article = 1;
  bool debias = true;
  bool emphasize_verb_object = false;
};

struct McAuditReport {
  std::size_t generated = 0;
  std::size_t skipped = 0;  // not enough valid distractors
  std::array<std::size_t, 4> position_histogram{};
  double chi_square = 0.0;
  bool positions_uniform = true;  // chi_square below the 0.01 critical value
  double frequency_baseline = 0.0;
  double length_baseline = 0.0;
};

// Chi-square statistic of answer positions against the uniform distribution.
double position_chi_square(const std::array<std::size_t, 4>& histogram);
constexpr double kChiSquareCritical3df001 = 11.345;

// Choices-only baselines: pick the choice seen most often as a choice across
// the dataset, or the longest choice (ties to the lowest position).
double frequency_baseline_accuracy(const std::vector<MultipleChoiceExample>& examples);
double length_baseline_accuracy(const std::vector<MultipleChoiceExample>& examples);

McAuditReport audit_multiple_choice(const std::vector<MultipleChoiceExample>& examples,
                                    std::size_t skipped);

struct McDataset {
  std::vector<MultipleChoiceExample> examples;
  McAuditReport audit;
};

// Examples are ordered by source article, then source step. `pool` must match
// the task (steps for step inference, goals for goal inference); when null a
// pool is built with the hashed-char-ngram embedder.
McDataset gen_multiple_choice(const Corpus& corpus, const McOptions& options,
                              const CandidatePool* pool = nullptr);

enum class OrderLabel { kAFirst, kBFirst };

struct OrderingExample {
  std::string goal;
  std::string step_a;
  std::string step_b;
  OrderLabel label = OrderLabel::kAFirst;
  std::string article_id;
  std::size_t index_a = 0;  // flat step indexes within the article
  std::size_t index_b = 0;

  bool operator==(const OrderingExample&) const = default;
};

struct OrderingOptions {
  bool flip = false;
  std::uint64_t seed = 0;
};

// Pairs come from within one method section: every adjacent pair plus an
// equal number of sampled non-adjacent pairs. With flip each pair appears in
// both orientations; without it each pair gets a seeded orientation.
std::vector<OrderingExample> gen_ordering(const Corpus& corpus, const OrderingOptions& options);

std::string mc_example_to_json(const MultipleChoiceExample& example);
std::string ordering_example_to_json(const OrderingExample& example);
std::string audit_report_text(const McAuditReport& report);

}  // namespace prockit
