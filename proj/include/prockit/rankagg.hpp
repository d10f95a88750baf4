#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "prockit/corpus.hpp"
#include "prockit/textindex.hpp"

namespace prockit {

// Probability in [0, 1] that step `a` happens before step `b` for `goal`.
class PrecedenceScorer {
 public:
  virtual ~PrecedenceScorer() = default;
  virtual double score(std::string_view goal, std::string_view a, std::string_view b) const = 0;
};

// Base for scorers that are antisymmetric by construction: only the
// lexicographically ordered direction is computed, rounded to a 2^-32 grid,
// and the other direction is 1 minus that value, so
// score(g, a, b) + score(g, b, a) == 1 holds exactly.
class CanonicalScorer : public PrecedenceScorer {
 public:
  double score(std::string_view goal, std::string_view a, std::string_view b) const final;

 protected:
  // Called with first < second.
  virtual double directed(std::string_view goal, std::string_view first,
                          std::string_view second) const = 0;
};

using ScoreFunction = std::function<double(std::string_view, std::string_view, std::string_view)>;

// Wraps an arbitrary callable; no antisymmetry is imposed.
std::unique_ptr<PrecedenceScorer> function_scorer(ScoreFunction fn);

// 1 when both steps occur in one article and `a` comes first, 0 when `b`
// does, 0.5 when no article holds both. Steps are matched by case-folded
// headline. The corpus must outlive the scorer.
std::unique_ptr<PrecedenceScorer> position_oracle_scorer(const Corpus& corpus);

// Looks up the m nearest corpus steps of `a` and of `b` and counts, over
// neighbour pairs sharing an article, how often the neighbour of `a` comes
// first: (before + 1) / (before + after + 2), or 0.5 with no shared article.
// `index` must hold step vectors keyed by step id, built with `embedder`.
// The corpus, index and embedder must outlive the scorer.
std::unique_ptr<PrecedenceScorer> embedding_prior_scorer(const VectorIndex& index,
                                                         const Embedder& embedder,
                                                         const Corpus& corpus, std::size_t m);

struct TournamentResult {
  std::vector<std::size_t> order;  // input indexes, earliest first
  std::vector<std::size_t> wins;   // per input index
  // Strongly connected components (size >= 2) of the "beats" digraph, each
  // as ascending input indexes; components ordered by their first index.
  std::vector<std::vector<std::size_t>> cycles;
  // Adjacent positions in `order` whose win counts are equal.
  std::size_t tie_breaks_used = 0;
  std::size_t decisive_pairs = 0;
};

// Copeland-style aggregation: every pair is scored once as score(goal,
// steps[i], steps[j]) with i < j; > 0.5 is a win for i, < 0.5 a win for j.
// Equal win counts are ordered by a seeded key derived from the step text,
// then by input index. Throws Error{kScorerFailure} for a score outside
// [0, 1] and Error{kUsage} for empty or duplicated steps.
TournamentResult order_steps(std::string_view goal, const std::vector<std::string>& steps,
                             const PrecedenceScorer& scorer, std::uint64_t seed);

}  // namespace prockit
