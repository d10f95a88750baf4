#include "prockit/rankagg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>

#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

double quantize(double s) {
  constexpr double kGrid = 4294967296.0;  // 2^32
  if (!std::isfinite(s)) return s;
  return std::nearbyint(s * kGrid) / kGrid;
}

class FunctionScorer final : public PrecedenceScorer {
 public:
  explicit FunctionScorer(ScoreFunction fn) : fn_(std::move(fn)) {}
  double score(std::string_view goal, std::string_view a, std::string_view b) const override {
    return fn_(goal, a, b);
  }

 private:
  ScoreFunction fn_;
};

class PositionOracle final : public CanonicalScorer {
 public:
  explicit PositionOracle(const Corpus& corpus) {
    for (const auto& article : corpus.articles()) {
      const auto steps = article.steps();
      for (std::size_t i = 0; i < steps.size(); ++i)
        where_[text::casefold(steps[i]->headline)].emplace(article.id, i);
    }
  }

 protected:
  double directed(std::string_view, std::string_view first, std::string_view second) const override {
    const auto a = where_.find(text::casefold(first));
    const auto b = where_.find(text::casefold(second));
    if (a == where_.end() || b == where_.end()) return 0.5;
    // First article (by id) containing both decides.
    for (const auto& [article, ia] : a->second) {
      const auto it = b->second.find(article);
      if (it != b->second.end() && it->second != ia) return ia < it->second ? 1.0 : 0.0;
    }
    return 0.5;
  }

 private:
  // Case-folded headline -> article id -> flat index (first occurrence).
  std::unordered_map<std::string, std::map<std::string, std::size_t>> where_;
};

class EmbeddingPrior final : public CanonicalScorer {
 public:
  EmbeddingPrior(const VectorIndex& index, const Embedder& embedder, const Corpus& corpus,
                 std::size_t m)
      : index_(index), embedder_(embedder), corpus_(corpus), m_(m) {}

 protected:
  double directed(std::string_view, std::string_view first, std::string_view second) const override {
    const auto na = neighbours(first);
    const auto nb = neighbours(second);
    std::size_t before = 0;
    std::size_t after = 0;
    for (const auto* x : na)
      for (const auto* y : nb) {
        if (x->article != y->article || x->flat_index == y->flat_index) continue;
        (x->flat_index < y->flat_index ? before : after) += 1;
      }
    if (before + after == 0) return 0.5;
    return (static_cast<double>(before) + 1.0) / (static_cast<double>(before + after) + 2.0);
  }

 private:
  std::vector<const Corpus::StepRef*> neighbours(std::string_view step) const {
    const std::string key(step);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<const Corpus::StepRef*> out;
    for (const auto& n : index_.knn(embedder_.embed(step), m_))
      if (const auto* ref = corpus_.find_step(n.id)) out.push_back(ref);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, out);
    return out;
  }

  const VectorIndex& index_;
  const Embedder& embedder_;
  const Corpus& corpus_;
  std::size_t m_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::vector<const Corpus::StepRef*>> cache_;
};

// Tarjan's algorithm over a dense adjacency matrix.
class SccFinder {
 public:
  explicit SccFinder(const std::vector<std::vector<char>>& adj)
      : adj_(adj), index_(adj.size(), -1), low_(adj.size(), 0), on_stack_(adj.size(), 0) {}

  std::vector<std::vector<std::size_t>> run() {
    for (std::size_t v = 0; v < adj_.size(); ++v)
      if (index_[v] < 0) visit(v);
    return std::move(components_);
  }

 private:
  void visit(std::size_t v) {
    index_[v] = low_[v] = counter_++;
    stack_.push_back(v);
    on_stack_[v] = 1;
    for (std::size_t w = 0; w < adj_.size(); ++w) {
      if (!adj_[v][w]) continue;
      if (index_[w] < 0) {
        visit(w);
        low_[v] = std::min(low_[v], low_[w]);
      } else if (on_stack_[w]) {
        low_[v] = std::min(low_[v], index_[w]);
      }
    }
    if (low_[v] == index_[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack_.back();
        stack_.pop_back();
        on_stack_[w] = 0;
        comp.push_back(w);
      } while (w != v);
      components_.push_back(std::move(comp));
    }
  }

  const std::vector<std::vector<char>>& adj_;
  std::vector<long> index_;
  std::vector<long> low_;
  std::vector<char> on_stack_;
  std::vector<std::size_t> stack_;
  long counter_ = 0;
  std::vector<std::vector<std::size_t>> components_;
};

}  // namespace

double CanonicalScorer::score(std::string_view goal, std::string_view a, std::string_view b) const {
  if (a == b) return 0.5;
  if (a < b) return quantize(directed(goal, a, b));
  return 1.0 - quantize(directed(goal, b, a));
}

std::unique_ptr<PrecedenceScorer> function_scorer(ScoreFunction fn) {
  return std::make_unique<FunctionScorer>(std::move(fn));
}

std::unique_ptr<PrecedenceScorer> position_oracle_scorer(const Corpus& corpus) {
  return std::make_unique<PositionOracle>(corpus);
}

std::unique_ptr<PrecedenceScorer> embedding_prior_scorer(const VectorIndex& index,
                                                         const Embedder& embedder,
                                                         const Corpus& corpus, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::kConfig, "neighbour count m must be positive");
  if (index.dim() != embedder.dim())
    throw Error(ErrorCode::kDimensionMismatch, "index and embedder dimensions differ");
  return std::make_unique<EmbeddingPrior>(index, embedder, corpus, m);
}

TournamentResult order_steps(std::string_view goal, const std::vector<std::string>& steps,
                             const PrecedenceScorer& scorer, std::uint64_t seed) {
  const std::size_t n = steps.size();
  if (n == 0) throw Error(ErrorCode::kUsage, "no steps to order");
  {
    std::set<std::string_view> seen(steps.begin(), steps.end());
    if (seen.size() != n) throw Error(ErrorCode::kUsage, "steps must be distinct");
  }
  TournamentResult r;
  r.wins.assign(n, 0);
  std::vector<std::vector<char>> beats(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = scorer.score(goal, steps[i], steps[j]);
      if (!(s >= 0.0 && s <= 1.0))
        throw Error(ErrorCode::kScorerFailure,
                    "scorer returned " + text::format_double(s) + " for a pair");
      if (s > 0.5) {
        ++r.wins[i];
        beats[i][j] = 1;
      } else if (s < 0.5) {
        ++r.wins[j];
        beats[j][i] = 1;
      }
      if (s != 0.5) ++r.decisive_pairs;
    }
  }
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = derive_seed(seed, steps[i]);
  r.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.order[i] = i;
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (r.wins[a] != r.wins[b]) return r.wins[a] > r.wins[b];
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;
  });
  for (std::size_t p = 1; p < n; ++p)
    if (r.wins[r.order[p - 1]] == r.wins[r.order[p]]) ++r.tie_breaks_used;

  for (auto& comp : SccFinder(beats).run()) {
    if (comp.size() < 2) continue;
    std::sort(comp.begin(), comp.end());
    r.cycles.push_back(std::move(comp));
  }
  std::sort(r.cycles.begin(), r.cycles.end());
  return r;
}

}  // namespace prockit
