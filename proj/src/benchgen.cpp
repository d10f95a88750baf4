#include "prockit/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "json_io.hpp"
#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

std::string fold(std::string_view s) { return text::casefold(text::normalize_space(s)); }

// Up to `limit` ranked items; never throws for a short result.
std::vector<CandidatePool::Item> ranked(std::string_view target, const CandidatePool& pool,
                                        std::size_t limit, DistractorMethod method,
                                        const SampleOptions& options) {
  const std::string target_key = fold(target);
  std::vector<CandidatePool::Item> out;
  std::vector<char> taken(pool.size(), 0);
  const auto& items = pool.items();
  auto offer = [&](std::size_t i) {
    if (taken[i]) return;
    taken[i] = 1;
    const auto& item = items[i];
    if (fold(item.text) == target_key) return;
    if (options.exclude && options.exclude(item)) return;
    out.push_back(item);
  };
  if (method == DistractorMethod::kBm25) {
    QueryOptions q;
    q.emphasize_verb_object = options.emphasize_verb_object;
    std::vector<ScoredDoc> scored;
    try {
      scored = bm25_score_all(pool.bm25(), target, q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyQuery) throw;
    }
    // Items and index documents share id order.
    const auto& ids = pool.bm25().doc_ids();
    for (const auto& s : scored) {
      if (out.size() >= limit) break;
      const auto it = std::lower_bound(ids.begin(), ids.end(), s.id);
      offer(static_cast<std::size_t>(it - ids.begin()));
    }
    for (std::size_t i = 0; i < items.size() && out.size() < limit; ++i) offer(i);
  } else {
    const auto query = pool.embedder().embed(target);
    for (const auto& n : pool.vectors().knn(query, pool.size())) {
      if (out.size() >= limit) break;
      offer(pool.vectors().find(n.id));
    }
  }
  return out;
}

bool overlap_ok(std::string_view candidate, std::string_view gold, double max_overlap) {
  return text::jaccard(candidate, gold) <= max_overlap;
}

Json provenance_json(const ChoiceProvenance& p) {
  return Json{{"article_id", p.article_id}, {"ref", p.ref}};
}

}  // namespace

std::string_view mc_task_name(McTask task) {
  return task == McTask::kStepInference ? "step-inference" : "goal-inference";
}

std::string_view distractor_method_name(DistractorMethod method) {
  return method == DistractorMethod::kBm25 ? "bm25" : "embedding";
}

CandidatePool CandidatePool::build(std::vector<Item> items, const Embedder& embedder) {
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < items.size(); ++i)
    if (items[i].id == items[i - 1].id)
      throw Error(ErrorCode::kDuplicateId, "duplicate pool id '" + items[i].id + "'");
  CandidatePool pool;
  std::vector<std::pair<std::string, std::string>> docs;
  std::vector<std::pair<std::string, Vector>> vectors;
  docs.reserve(items.size());
  vectors.reserve(items.size());
  for (const auto& item : items) {
    docs.emplace_back(item.id, item.text);
    vectors.emplace_back(item.id, embedder.embed_document(item.id, item.text));
  }
  pool.bm25_ = InvertedIndex::build(docs);
  pool.vectors_ = VectorIndex::build(embedder.dim(), Metric::kCosine, std::move(vectors));
  pool.items_ = std::move(items);
  pool.embedder_ = embedder;
  return pool;
}

CandidatePool CandidatePool::steps_of(const Corpus& corpus, const Embedder& embedder) {
  std::vector<Item> items;
  for (const auto& a : corpus.articles())
    for (const Step* s : a.steps()) items.push_back({s->id, s->headline, a.id});
  return build(std::move(items), embedder);
}

CandidatePool CandidatePool::goals_of(const Corpus& corpus, const Embedder& embedder) {
  std::vector<Item> items;
  for (const auto& a : corpus.articles()) items.push_back({a.id, a.title, a.id});
  return build(std::move(items), embedder);
}

std::vector<CandidatePool::Item> sample_distractors(std::string_view target,
                                                    const CandidatePool& pool, std::size_t k,
                                                    DistractorMethod method,
                                                    const SampleOptions& options) {
  if (k == 0) throw Error(ErrorCode::kUsage, "k must be at least 1");
  auto out = ranked(target, pool, k, method, options);
  if (out.size() < k)
    throw Error(ErrorCode::kPoolTooSmall, "only " + std::to_string(out.size()) +
                                              " candidates available, need " + std::to_string(k));
  return out;
}

std::vector<std::string> filter_false_negatives(const std::vector<std::string>& candidates,
                                                std::string_view gold, double max_overlap) {
  if (candidates.empty()) throw Error(ErrorCode::kUsage, "no candidates to filter");
  if (!(max_overlap >= 0.0 && max_overlap <= 1.0))
    throw Error(ErrorCode::kUsage, "max_overlap must lie in [0, 1]");
  std::vector<std::string> out;
  for (const auto& c : candidates)
    if (overlap_ok(c, gold, max_overlap)) out.push_back(c);
  if (out.empty()) throw Error(ErrorCode::kAllFiltered, "every candidate overlaps the gold answer");
  return out;
}

MultipleChoiceExample debias_reassign(const MultipleChoiceExample& example,
                                      const CounterpartMap& counterparts, std::uint64_t seed) {
  for (const auto& p : example.provenance)
    if (!counterparts.count(p.ref))
      throw Error(ErrorCode::kMissingCounterpart, "no counterpart for choice '" + p.ref + "'");
  Rng rng(seed);
  MultipleChoiceExample out = example;
  out.answer_index = rng.uniform_index(4);
  const Counterpart& c = counterparts.at(example.provenance[out.answer_index].ref);
  out.prompt = c.text;
  out.prompt_provenance = c.provenance;
  out.audit.reassigned = true;
  return out;
}

double position_chi_square(const std::array<std::size_t, 4>& histogram) {
  const double total = static_cast<double>(
      std::accumulate(histogram.begin(), histogram.end(), std::size_t{0}));
  if (total == 0) return 0.0;
  const double expected = total / 4.0;
  double chi = 0.0;
  for (auto n : histogram) chi += (n - expected) * (n - expected) / expected;
  return chi;
}

double frequency_baseline_accuracy(const std::vector<MultipleChoiceExample>& examples) {
  if (examples.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& ex : examples)
    for (const auto& c : ex.choices) ++seen[fold(c)];
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (seen[fold(ex.choices[i])] > seen[fold(ex.choices[best])]) best = i;
    correct += best == ex.answer_index;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double length_baseline_accuracy(const std::vector<MultipleChoiceExample>& examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (ex.choices[i].size() > ex.choices[best].size()) best = i;
    correct += best == ex.answer_index;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

McAuditReport audit_multiple_choice(const std::vector<MultipleChoiceExample>& examples,
                                    std::size_t skipped) {
  McAuditReport r;
  r.generated = examples.size();
  r.skipped = skipped;
  for (const auto& ex : examples) ++r.position_histogram[ex.answer_index];
  r.chi_square = position_chi_square(r.position_histogram);
  r.positions_uniform = r.chi_square < kChiSquareCritical3df001;
  r.frequency_baseline = frequency_baseline_accuracy(examples);
  r.length_baseline = length_baseline_accuracy(examples);
  return r;
}

McDataset gen_multiple_choice(const Corpus& corpus, const McOptions& options,
                              const CandidatePool* pool_in) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no articles");
  if (options.per_article == 0) throw Error(ErrorCode::kConfig, "per_article must be positive");
  if (!(options.max_overlap >= 0.0 && options.max_overlap <= 1.0))
    throw Error(ErrorCode::kConfig, "max_overlap must lie in [0, 1]");
  const bool step_task = options.task == McTask::kStepInference;
  std::optional<CandidatePool> own;
  if (!pool_in) {
    const auto embedder = Embedder::hashed_char_ngram();
    own = step_task ? CandidatePool::steps_of(corpus, embedder)
                    : CandidatePool::goals_of(corpus, embedder);
  }
  const CandidatePool& pool = pool_in ? *pool_in : *own;
  const std::string task_name(mc_task_name(options.task));

  // Three distractors from three different articles, none the gold article,
  // no two with the same text, each passing the overlap filter. The search
  // window grows until enough survive or the pool is exhausted.
  auto pick = [&](const std::string& gold, const std::string& gold_article)
      -> std::optional<std::vector<CandidatePool::Item>> {
    SampleOptions so;
    so.emphasize_verb_object = options.emphasize_verb_object;
    so.exclude = [&](const CandidatePool::Item& item) { return item.article_id == gold_article; };
    for (std::size_t window = 8;; window *= 4) {
      const auto cands = ranked(gold, pool, window, options.method, so);
      std::vector<CandidatePool::Item> chosen;
      std::set<std::string> articles{gold_article};
      std::set<std::string> texts{fold(gold)};
      for (const auto& c : cands) {
        if (!overlap_ok(c.text, gold, options.max_overlap)) continue;
        if (articles.count(c.article_id) || texts.count(fold(c.text))) continue;
        articles.insert(c.article_id);
        texts.insert(fold(c.text));
        chosen.push_back(c);
        if (chosen.size() == 3) return chosen;
      }
      if (cands.size() < window) return std::nullopt;
    }
  };

  McDataset out;
  std::size_t skipped = 0;
  for (const auto& article : corpus.articles()) {
    const auto steps = article.steps();
    if (steps.empty()) continue;
    std::vector<std::size_t> order(steps.size());
    std::iota(order.begin(), order.end(), 0);
    Rng pick_rng(derive_seed(options.seed, task_name + ":pick:" + article.id));
    pick_rng.shuffle(order);
    order.resize(std::min(order.size(), options.per_article));
    std::sort(order.begin(), order.end());

    for (std::size_t si : order) {
      const Step& step = *steps[si];
      const std::uint64_t ex_seed = derive_seed(options.seed, task_name + ":" + step.id);
      const std::string& gold = step_task ? step.headline : article.title;
      const ChoiceProvenance gold_prov{article.id, step_task ? step.id : article.id};
      const auto distractors = pick(gold, article.id);
      if (!distractors) {
        ++skipped;
        continue;
      }
      std::array<std::string, 4> texts{gold, (*distractors)[0].text, (*distractors)[1].text,
                                       (*distractors)[2].text};
      std::array<ChoiceProvenance, 4> provs{gold_prov,
                                            ChoiceProvenance{(*distractors)[0].article_id, (*distractors)[0].id},
                                            ChoiceProvenance{(*distractors)[1].article_id, (*distractors)[1].id},
                                            ChoiceProvenance{(*distractors)[2].article_id, (*distractors)[2].id}};
      std::array<std::size_t, 4> perm{0, 1, 2, 3};
      Rng shuffle_rng(derive_seed(ex_seed, "shuffle"));
      shuffle_rng.shuffle(perm);

      MultipleChoiceExample ex;
      ex.task = options.task;
      ex.prompt = step_task ? article.title : step.headline;
      ex.prompt_provenance = {article.id, step_task ? article.id : step.id};
      ex.audit.distractor_method = options.method;
      for (std::size_t i = 0; i < 4; ++i) {
        ex.choices[i] = texts[perm[i]];
        ex.provenance[i] = provs[perm[i]];
        if (perm[i] == 0) ex.answer_index = i;
      }

      if (options.debias) {
        CounterpartMap counterparts;
        for (const auto& p : ex.provenance) {
          const Article* a = corpus.find(p.article_id);
          if (!a) continue;
          if (step_task) {
            counterparts[p.ref] = {a->title, {a->id, a->id}};
          } else {
            const auto a_steps = a->steps();
            if (a_steps.empty()) continue;
            Rng c_rng(derive_seed(ex_seed, "counterpart:" + a->id));
            const Step* s = a_steps[c_rng.uniform_index(a_steps.size())];
            counterparts[p.ref] = {s->headline, {a->id, s->id}};
          }
        }
        ex = debias_reassign(ex, counterparts, derive_seed(ex_seed, "reassign"));
      }
      out.examples.push_back(std::move(ex));
    }
  }
  out.audit = audit_multiple_choice(out.examples, skipped);
  return out;
}

std::vector<OrderingExample> gen_ordering(const Corpus& corpus, const OrderingOptions& options) {
  std::vector<OrderingExample> out;
  for (const auto& article : corpus.articles()) {
    std::size_t offset = 0;
    for (std::size_t m = 0; m < article.methods.size(); ++m) {
      const auto& steps = article.methods[m].steps;
      const std::size_t n = steps.size();
      const std::size_t base = offset;
      offset += n;
      if (n < 2) continue;
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
      std::vector<std::pair<std::size_t, std::size_t>> far;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) far.emplace_back(i, j);
      Rng far_rng(derive_seed(options.seed, "order:" + article.id + "#" + std::to_string(m)));
      far_rng.shuffle(far);
      far.resize(std::min(far.size(), n - 1));
      pairs.insert(pairs.end(), far.begin(), far.end());
      std::sort(pairs.begin(), pairs.end());

      for (const auto& [i, j] : pairs) {
        if (fold(steps[i].headline) == fold(steps[j].headline)) continue;
        OrderingExample fwd{article.title, steps[i].headline, steps[j].headline,
                            OrderLabel::kAFirst, article.id, base + i, base + j};
        OrderingExample rev{article.title, steps[j].headline, steps[i].headline,
                            OrderLabel::kBFirst, article.id, base + j, base + i};
        if (options.flip) {
          out.push_back(std::move(fwd));
          out.push_back(std::move(rev));
        } else {
          Rng orient(derive_seed(options.seed, "orient:" + steps[i].id + ":" + steps[j].id));
          out.push_back(orient.uniform_index(2) == 0 ? std::move(fwd) : std::move(rev));
        }
      }
    }
  }
  return out;
}

std::string mc_example_to_json(const MultipleChoiceExample& ex) {
  Json provs = Json::array();
  for (const auto& p : ex.provenance) provs.push_back(provenance_json(p));
  return Json{{"task", mc_task_name(ex.task)},
              {"prompt", ex.prompt},
              {"prompt_provenance", provenance_json(ex.prompt_provenance)},
              {"choices", ex.choices},
              {"answer_index", ex.answer_index},
              {"provenance", provs},
              {"audit",
               {{"distractor_method", distractor_method_name(ex.audit.distractor_method)},
                {"reassigned", ex.audit.reassigned}}}}
      .dump();
}

std::string ordering_example_to_json(const OrderingExample& ex) {
  return Json{{"goal", ex.goal},
              {"step_a", ex.step_a},
              {"step_b", ex.step_b},
              {"label", ex.label == OrderLabel::kAFirst ? "a-first" : "b-first"},
              {"provenance",
               {{"article_id", ex.article_id}, {"index_a", ex.index_a}, {"index_b", ex.index_b}}}}
      .dump();
}

std::string audit_report_text(const McAuditReport& r) {
  std::string out;
  out += "metric\tvalue\n";
  out += "generated\t" + std::to_string(r.generated) + "\n";
  out += "skipped\t" + std::to_string(r.skipped) + "\n";
  for (std::size_t i = 0; i < 4; ++i)
    out += "answer_position_" + std::to_string(i) + "\t" + std::to_string(r.position_histogram[i]) + "\n";
  out += "chi_square\t" + text::format_double(r.chi_square) + "\n";
  out += "chi_square_critical_0.01\t" + text::format_double(kChiSquareCritical3df001) + "\n";
  out += std::string("positions_uniform\t") + (r.positions_uniform ? "yes" : "no") + "\n";
  out += "frequency_baseline\t" + text::format_double(r.frequency_baseline) + "\n";
  out += "length_baseline\t" + text::format_double(r.length_baseline) + "\n";
  return out;
}

}  // namespace prockit
