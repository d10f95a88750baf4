#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

enum class LinkSplit { kTrain, kTest };

// One corpus hyperlink as a (step, goal) training pair.
struct LinkPair {
  std::string step_id;
  std::string step_text;
  std::string source_article;
  std::string article_id;  // the hyperlink target
  std::string goal_text;   // title of the target
  LinkSplit split = LinkSplit::kTrain;

  bool operator==(const LinkPair&) const = default;
};

struct SplitOptions {
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
};

// Pairs in step id order. Whole articles go to one split: articles are
// shuffled with the seed and moved to the test split until it holds
// ceil(test_fraction * pairs) pairs. Hyperlinks whose target is not in the
// corpus are ignored. Throws Error{kNoHyperlinks}.
std::vector<LinkPair> extract_training_pairs(const Corpus& corpus, const SplitOptions& options = {});

struct LinkFeatures {
  double cosine = 0.0;        // embedding cosine similarity
  double jaccard = 0.0;       // token Jaccard
  double length_ratio = 0.0;  // shorter / longer letter count
  // idf-weighted share of goal tokens absent from the step that the
  // LexicalTable explains by some step token (1 when none are absent)
  double translation = 0.0;
};

// Step-word -> goal-word associations learned from linked pairs. For each
// pair, every goal token missing from the step is counted against every step
// token missing from the goal; P(g | s) = count(s, g) / pairs containing s
// unmatched.
class LexicalTable {
 public:
  // weight -1 removes a previously added pair.
  void add(const std::vector<std::string>& step_tokens,
           const std::vector<std::string>& goal_tokens, double weight = 1.0);
  double probability(const std::string& step_token, const std::string& goal_token) const;
  bool empty() const { return totals_.empty(); }
  bool operator==(const LexicalTable&) const = default;

 private:
  friend class Reranker;
  std::map<std::string, std::map<std::string, double>> counts_;
  std::map<std::string, double> totals_;
};

// Logistic score over LinkFeatures; weights are {bias, cosine, jaccard,
// length ratio, translation}.
class Reranker {
 public:
  using Weights = std::array<double, 5>;

  Reranker();
  // Throws Error{kConfig} unless threshold is in [0, 1].
  Reranker(Weights weights, double threshold, LexicalTable table = {});

  double score(const LinkFeatures& f) const;
  const Weights& weights() const { return weights_; }
  double threshold() const { return threshold_; }
  const LexicalTable& table() const { return table_; }

  // "PROCKIT-RERANK 1" line format with a checksum trailer.
  std::string serialize() const;
  static Reranker deserialize(std::string_view data);

 private:
  Weights weights_;
  double threshold_;
  LexicalTable table_;
};

struct LinkCandidate {
  std::string step_id;
  std::string article_id;
  std::size_t retrieve_rank = 0;  // 1-based
  double retrieve_distance = 0.0;
  double rerank_score = 0.0;

  bool operator==(const LinkCandidate&) const = default;
};

struct LinkerConfig {
  std::size_t k_retrieve = 20;
};

// Retrieve-then-rerank over article goals. Only titles are embedded.
class Linker {
 public:
  // Throws Error{kEmptyCorpus}; Error{kUsage} for k_retrieve == 0. The
  // corpus must outlive the linker.
  static Linker build(const Corpus& corpus, Embedder embedder, Reranker reranker = {},
                      LinkerConfig config = {});

  const Corpus& corpus() const { return *corpus_; }
  const Embedder& embedder() const { return embedder_; }
  const Reranker& reranker() const { return reranker_; }
  const LinkerConfig& config() const { return config_; }
  const VectorIndex& goals() const { return goals_; }
  void set_reranker(Reranker reranker) { reranker_ = std::move(reranker); }

  LinkFeatures features(std::string_view step_text, std::string_view article_id) const;
  LinkFeatures features(std::string_view step_text, std::string_view article_id,
                        const LexicalTable& table) const;

  // The k_retrieve nearest goals other than `exclude_article`, best rerank
  // score first (ties by retrieve rank).
  std::vector<LinkCandidate> candidates(std::string_view step_id, std::string_view step_text,
                                        std::string_view exclude_article) const;
  // Corpus step; its own article is excluded. Throws Error{kNotFound}.
  std::vector<LinkCandidate> candidates(std::string_view step_id) const;

  // Top candidate when its score reaches the threshold, otherwise none
  // (unlinkable).
  std::optional<LinkCandidate> link(std::string_view step_id, std::string_view step_text,
                                    std::string_view exclude_article) const;
  std::optional<LinkCandidate> link(std::string_view step_id) const;

 private:
  const Corpus* corpus_ = nullptr;
  Embedder embedder_;
  Reranker reranker_;
  LinkerConfig config_;
  VectorIndex goals_;
  std::unordered_map<std::string, double> title_idf_;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  double calibration_fraction = 0.2;
  std::size_t iterations = 2000;
  double learning_rate = 1.0;
  double l2 = 1e-4;
};

struct TrainingReport {
  std::size_t fit_pairs = 0;
  std::size_t fit_examples = 0;
  std::size_t calibration_pairs = 0;
  std::size_t calibration_unlinked = 0;
  double calibration_f1 = 0.0;
  bool used_default_weights = false;
};

// Learns the LexicalTable from the training pairs of some articles, fits the
// ranking weights with a softmax over each pair's retrieved candidates (table
// features computed leave-one-out), fits scale and bias as a class-balanced
// logistic link probability, and picks the threshold on a 0.01 grid that
// maximizes link-vs-unlinkable F1 over all steps of the remaining training
// articles: a step counts as a true positive when it has a hyperlink and its
// top candidate is the target with a score at or above the threshold. The
// midpoint of the best plateau wins. Test-split pairs are ignored.
Reranker train_reranker(const Linker& linker, const std::vector<LinkPair>& pairs,
                        const TrainOptions& options = {}, TrainingReport* report = nullptr);

struct RankingMetrics {
  std::size_t n = 0;
  double recall_at_1 = 0.0;
  double recall_at_5 = 0.0;
  double recall_at_10 = 0.0;
  double mrr = 0.0;  // reciprocal rank, 0 when gold is not retrieved
};

// From 1-based gold ranks (none = not retrieved). Throws Error{kUsage} when
// empty.
RankingMetrics ranking_metrics(const std::vector<std::optional<std::size_t>>& gold_ranks);

struct LinkEvaluation {
  RankingMetrics retrieve;  // candidates in retrieval order
  RankingMetrics rerank;    // same candidates in rerank order
};

// Every pair is evaluated regardless of split. Throws Error{kUsage} when
// `pairs` is empty.
LinkEvaluation evaluate_linker(const std::vector<LinkPair>& pairs, const Linker& linker);
std::string link_evaluation_to_json(const LinkEvaluation& eval);

enum class LinkProvenance { kCorpusHyperlink, kPredicted };
std::string_view link_provenance_name(LinkProvenance p);

struct PredictedLink {
  std::string step_id;
  std::string article_id;
  double score = 0.0;

  bool operator==(const PredictedLink&) const = default;
};

struct Predictions {
  std::vector<PredictedLink> links;    // step id order
  std::vector<std::string> unlinkable;  // step ids, ascending
};

// Links every step that has no corpus hyperlink. Steps are processed in
// parallel; the result does not depend on the thread count.
Predictions predict_links(const Linker& linker, std::size_t threads = 0);

// "step<TAB>article<TAB>predicted<TAB>score" lines; "-" as the article marks
// an unlinkable step.
std::string predictions_to_text(const Predictions& p);
Predictions parse_predictions(std::string_view text);

struct RealizedBy {
  std::string step_id;
  std::string article_id;
  LinkProvenance provenance = LinkProvenance::kPredicted;
  std::optional<double> score;  // none for corpus hyperlinks

  bool operator==(const RealizedBy&) const = default;
};

struct SkippedLink {
  std::string step_id;
  std::string article_id;
  LinkProvenance provenance = LinkProvenance::kPredicted;
  std::string reason;

  bool operator==(const SkippedLink&) const = default;
};

// Articles own their steps (has-step); a step may be realized by one other
// article (realized-by).
struct HierarchyGraph {
  std::vector<std::string> articles;  // ascending
  std::vector<std::pair<std::string, std::string>> has_step;  // (article, step), corpus order
  std::vector<RealizedBy> realized_by;  // ascending step id
  std::vector<SkippedLink> skipped;     // processing order
  std::vector<std::string> unlinkable;

  const RealizedBy* link_of(std::string_view step_id) const;
};

// Corpus hyperlinks first, then predictions, each in ascending step id
// order. A link is skipped (with a reason) when its step or article is
// unknown, its step is already linked, or it would close a cycle.
HierarchyGraph build_hierarchy(const Corpus& corpus, const Predictions& predictions = {});

// Node ids ("a:<article>" / "s:<step>") in a topological order of the
// article -> step -> article digraph, or none when it has a cycle.
std::optional<std::vector<std::string>> topological_order(const HierarchyGraph& graph);

// "parent_step_id<TAB>child_article_id<TAB>provenance<TAB>score" per
// realized-by edge; score is "-" for corpus hyperlinks.
std::string hierarchy_edge_list(const HierarchyGraph& graph);

// Nested tree under `article_id`: links are expanded `depth` levels deep.
// Throws Error{kNotFound}.
std::string hierarchy_tree_json(const HierarchyGraph& graph, const Corpus& corpus,
                                std::string_view article_id, std::size_t depth);
// Whole graph: roots, edges, skipped links and unlinkable steps.
std::string hierarchy_to_json(const HierarchyGraph& graph);

// Longest chain of realized-by links below `article_id` (0 for a leaf).
std::size_t hierarchy_depth(const HierarchyGraph& graph, const Corpus& corpus,
                            std::string_view article_id);

}  // namespace prockit
