#include "prockit/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json_io.hpp"
#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

constexpr std::string_view kRerankMagic = "PROCKIT-RERANK 1";

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::kValidation, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Shuffles the keys with the seed and moves whole groups to the held-out side
// until it holds at least `fraction` of all items.
std::set<std::string> hold_out(const std::map<std::string, std::size_t>& group_sizes,
                               double fraction, std::uint64_t seed) {
  std::vector<std::string> keys;
  std::size_t total = 0;
  for (const auto& [k, n] : group_sizes) {
    keys.push_back(k);
    total += n;
  }
  Rng rng(seed);
  rng.shuffle(keys);
  const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total)));
  std::set<std::string> held;
  std::size_t count = 0;
  for (const auto& k : keys) {
    if (count >= target) break;
    held.insert(k);
    count += group_sizes.at(k);
  }
  return held;
}

// Characters of the normalized text, punctuation excluded.
std::size_t text_length(std::string_view s) {
  std::size_t n = 0;
  for (const auto& t : text::tokenize(s)) n += t.size();
  return n;
}

double length_ratio(std::size_t a, std::size_t b) {
  const auto hi = std::max(a, b);
  return hi ? static_cast<double>(std::min(a, b)) / static_cast<double>(hi) : 0.0;
}

std::vector<std::string> unique_tokens(std::string_view s) {
  auto t = text::tokenize(s);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

std::vector<std::string> minus(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

double translation_score(const std::vector<std::string>& step, const std::vector<std::string>& goal,
                         const LexicalTable& table,
                         const std::unordered_map<std::string, double>& idf) {
  const auto missing = minus(goal, step);
  const auto extra = minus(step, goal);
  double num = 0.0, den = 0.0;
  for (const auto& g : missing) {
    const auto it = idf.find(g);
    const double w = it == idf.end() ? 0.0 : it->second;
    double best = 0.0;
    for (const auto& s : extra) best = std::max(best, table.probability(s, g));
    num += w * best;
    den += w;
  }
  return den > 0.0 ? num / den : 1.0;
}

}  // namespace

void LexicalTable::add(const std::vector<std::string>& step_tokens,
                       const std::vector<std::string>& goal_tokens, double weight) {
  auto step = step_tokens;
  auto goal = goal_tokens;
  for (auto* v : {&step, &goal}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const auto missing = minus(goal, step);
  for (const auto& s : minus(step, goal)) {
    if ((totals_[s] += weight) <= 0.0) totals_.erase(s);
    auto& row = counts_[s];
    for (const auto& g : missing)
      if ((row[g] += weight) <= 0.0) row.erase(g);
    if (row.empty()) counts_.erase(s);
  }
}

double LexicalTable::probability(const std::string& step_token, const std::string& goal_token) const {
  const auto t = totals_.find(step_token);
  if (t == totals_.end()) return 0.0;
  const auto row = counts_.find(step_token);
  if (row == counts_.end()) return 0.0;
  const auto c = row->second.find(goal_token);
  return c == row->second.end() ? 0.0 : c->second / t->second;
}

std::vector<LinkPair> extract_training_pairs(const Corpus& corpus, const SplitOptions& options) {
  if (!(options.test_fraction >= 0.0 && options.test_fraction <= 1.0))
    throw Error(ErrorCode::kUsage, "test_fraction must be in [0, 1]");
  std::vector<LinkPair> pairs;
  std::map<std::string, std::size_t> per_article;
  for (const auto& a : corpus.articles())
    for (const auto& h : a.hyperlinks) {
      const Article* target = corpus.find(h.target_article_id);
      if (!target) continue;
      pairs.push_back({h.step_id, a.find_step(h.step_id)->headline, a.id, target->id,
                       target->title, LinkSplit::kTrain});
      ++per_article[a.id];
    }
  if (pairs.empty()) throw Error(ErrorCode::kNoHyperlinks, "corpus has no usable hyperlinks");
  const auto test = hold_out(per_article, options.test_fraction, derive_seed(options.seed, "link-split"));
  for (auto& p : pairs)
    if (test.count(p.source_article)) p.split = LinkSplit::kTest;
  std::sort(pairs.begin(), pairs.end(),
            [](const LinkPair& x, const LinkPair& y) { return x.step_id < y.step_id; });
  return pairs;
}

Reranker::Reranker() : weights_{-6.0, 8.0, 4.0, 1.0, 0.0}, threshold_(0.5) {}

Reranker::Reranker(Weights weights, double threshold, LexicalTable table)
    : weights_(weights), threshold_(threshold), table_(std::move(table)) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::kConfig, "reranker threshold must be in [0, 1]");
  for (double w : weights)
    if (!std::isfinite(w)) throw Error(ErrorCode::kConfig, "reranker weights must be finite");
}

double Reranker::score(const LinkFeatures& f) const {
  return sigmoid(weights_[0] + weights_[1] * f.cosine + weights_[2] * f.jaccard +
                 weights_[3] * f.length_ratio + weights_[4] * f.translation);
}

std::string Reranker::serialize() const {
  std::string body = "weights";
  for (double w : weights_) body += " " + text::format_double(w);
  body += "\nthreshold " + text::format_double(threshold_) + "\n";
  body += "table " + std::to_string(table_.totals_.size()) + "\n";
  for (const auto& [s, total] : table_.totals_) {
    body += s + "\t" + text::format_double(total);
    if (const auto row = table_.counts_.find(s); row != table_.counts_.end())
      for (const auto& [g, c] : row->second) body += "\t" + g + ":" + text::format_double(c);
    body += "\n";
  }
  return persist::seal(std::move(body), kRerankMagic);
}

Reranker Reranker::deserialize(std::string_view data) {
  const auto lines = persist::open(data, kRerankMagic);
  if (lines.size() < 3 || lines[0].rfind("weights ", 0) != 0 ||
      lines[1].rfind("threshold ", 0) != 0 || lines[2].rfind("table ", 0) != 0)
    throw Error(ErrorCode::kValidation, "bad reranker file");
  Weights w{};
  std::string_view rest = std::string_view(lines[0]).substr(8);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto sp = rest.find(' ');
    if ((i + 1 < w.size()) == (sp == std::string_view::npos))
      throw Error(ErrorCode::kValidation, "reranker needs 5 weights");
    w[i] = parse_real(rest.substr(0, sp), "weight");
    rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
  }
  const auto n = static_cast<std::size_t>(parse_real(std::string_view(lines[2]).substr(6), "table size"));
  if (lines.size() != 3 + n) throw Error(ErrorCode::kValidation, "reranker table size mismatch");
  LexicalTable table;
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = split_tabs(lines[3 + i]);
    if (f.size() < 2 || f[0].empty()) throw Error(ErrorCode::kValidation, "bad table line");
    table.totals_[f[0]] = parse_real(f[1], "count");
    for (std::size_t j = 2; j < f.size(); ++j) {
      const auto colon = f[j].rfind(':');
      if (colon == std::string::npos || colon == 0) throw Error(ErrorCode::kValidation, "bad table entry");
      table.counts_[f[0]][f[j].substr(0, colon)] =
          parse_real(std::string_view(f[j]).substr(colon + 1), "count");
    }
  }
  try {
    return Reranker(w, parse_real(std::string_view(lines[1]).substr(10), "threshold"),
                    std::move(table));
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
}

Linker Linker::build(const Corpus& corpus, Embedder embedder, Reranker reranker,
                     LinkerConfig config) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus is empty");
  if (config.k_retrieve == 0) throw Error(ErrorCode::kUsage, "k_retrieve must be at least 1");
  Linker l;
  l.corpus_ = &corpus;
  l.embedder_ = std::move(embedder);
  l.reranker_ = std::move(reranker);
  l.config_ = config;
  std::vector<std::pair<std::string, Vector>> entries;
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& a : corpus.articles()) {
    entries.emplace_back(a.id, l.embedder_.embed(a.title));
    for (const auto& t : unique_tokens(a.title)) ++df[t];
  }
  l.goals_ = VectorIndex::build(l.embedder_.dim(), Metric::kCosine, std::move(entries));
  const double n = static_cast<double>(corpus.size());
  for (const auto& [t, d] : df) l.title_idf_[t] = std::log(n / static_cast<double>(d));
  return l;
}

LinkFeatures Linker::features(std::string_view step_text, std::string_view article_id) const {
  return features(step_text, article_id, reranker_.table());
}

LinkFeatures Linker::features(std::string_view step_text, std::string_view article_id,
                              const LexicalTable& table) const {
  const Article* a = corpus_->find(article_id);
  if (!a) throw Error(ErrorCode::kNotFound, "unknown article '" + std::string(article_id) + "'");
  const Vector q = embedder_.embed(step_text);
  LinkFeatures f;
  f.cosine = 1.0 - goals_.distance(q, goals_.find(article_id));
  f.jaccard = text::jaccard(step_text, a->title);
  f.length_ratio = length_ratio(text_length(step_text), text_length(a->title));
  f.translation = translation_score(unique_tokens(step_text), unique_tokens(a->title), table, title_idf_);
  return f;
}

std::vector<LinkCandidate> Linker::candidates(std::string_view step_id,
                                              std::string_view step_text,
                                              std::string_view exclude_article) const {
  const Vector q = embedder_.embed(step_text);
  const auto hits = goals_.knn(q, config_.k_retrieve + 1);
  const auto step_length = text_length(step_text);
  const auto step_tokens = unique_tokens(step_text);
  std::vector<LinkCandidate> out;
  for (const auto& h : hits) {
    if (h.id == exclude_article) continue;
    if (out.size() == config_.k_retrieve) break;
    const Article* a = corpus_->find(h.id);
    LinkFeatures f;
    f.cosine = 1.0 - h.distance;
    f.jaccard = text::jaccard(step_text, a->title);
    f.length_ratio = length_ratio(step_length, text_length(a->title));
    f.translation =
        translation_score(step_tokens, unique_tokens(a->title), reranker_.table(), title_idf_);
    out.push_back({std::string(step_id), h.id, out.size() + 1, h.distance, reranker_.score(f)});
  }
  std::stable_sort(out.begin(), out.end(), [](const LinkCandidate& x, const LinkCandidate& y) {
    return x.rerank_score > y.rerank_score;
  });
  return out;
}

std::vector<LinkCandidate> Linker::candidates(std::string_view step_id) const {
  const auto* ref = corpus_->find_step(step_id);
  if (!ref) throw Error(ErrorCode::kNotFound, "unknown step '" + std::string(step_id) + "'");
  return candidates(step_id, ref->step->headline, ref->article->id);
}

std::optional<LinkCandidate> Linker::link(std::string_view step_id, std::string_view step_text,
                                          std::string_view exclude_article) const {
  auto c = candidates(step_id, step_text, exclude_article);
  if (c.empty() || c.front().rerank_score < reranker_.threshold()) return std::nullopt;
  return std::move(c.front());
}

std::optional<LinkCandidate> Linker::link(std::string_view step_id) const {
  auto c = candidates(step_id);
  if (c.empty() || c.front().rerank_score < reranker_.threshold()) return std::nullopt;
  return std::move(c.front());
}

Reranker train_reranker(const Linker& linker, const std::vector<LinkPair>& pairs,
                        const TrainOptions& options, TrainingReport* report) {
  const Corpus& corpus = linker.corpus();
  std::map<std::string, std::size_t> per_article;
  for (const auto& p : pairs)
    if (p.split == LinkSplit::kTrain) ++per_article[p.source_article];
  const auto calib = hold_out(per_article, options.calibration_fraction,
                              derive_seed(options.seed, "link-calibration"));

  std::vector<const LinkPair*> fit;
  for (const auto& p : pairs)
    if (p.split == LinkSplit::kTrain && !calib.count(p.source_article) &&
        p.article_id != p.source_article && corpus.find(p.article_id))
      fit.push_back(&p);

  LexicalTable table;
  for (const auto* p : fit) table.add(text::tokenize(p->step_text), text::tokenize(p->goal_text));

  // Each pair's retrieved candidates, gold appended when missing; the pair's
  // own table counts are left out while its features are computed.
  constexpr std::size_t kDims = 4;
  using Row = std::array<double, kDims>;
  struct Group {
    std::vector<Row> x;
    std::size_t gold = 0;
  };
  std::vector<Group> groups;
  TrainingReport rep;
  auto row = [](const LinkFeatures& f) {
    return Row{f.cosine, f.jaccard, f.length_ratio, f.translation};
  };
  for (const auto* p : fit) {
    ++rep.fit_pairs;
    const auto st = text::tokenize(p->step_text);
    const auto gt = text::tokenize(p->goal_text);
    table.add(st, gt, -1.0);
    Group g;
    g.gold = std::numeric_limits<std::size_t>::max();
    for (const auto& c : linker.candidates(p->step_id, p->step_text, p->source_article)) {
      if (c.article_id == p->article_id) g.gold = g.x.size();
      g.x.push_back(row(linker.features(p->step_text, c.article_id, table)));
    }
    if (g.gold == std::numeric_limits<std::size_t>::max()) {
      g.gold = g.x.size();
      g.x.push_back(row(linker.features(p->step_text, p->article_id, table)));
    }
    table.add(st, gt, 1.0);
    rep.fit_examples += g.x.size();
    if (g.x.size() > 1) groups.push_back(std::move(g));
  }
  auto dot = [](const Row& v, const Row& x) {
    double z = 0.0;
    for (std::size_t j = 0; j < kDims; ++j) z += v[j] * x[j];
    return z;
  };

  Reranker::Weights w = Reranker().weights();
  if (!groups.empty()) {
    // Ranking direction: softmax over each pair's candidates.
    Row v{};
    const double n_groups = static_cast<double>(groups.size());
    for (std::size_t it = 0; it < options.iterations; ++it) {
      Row grad{};
      for (const auto& g : groups) {
        std::vector<double> z(g.x.size());
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < g.x.size(); ++c) zmax = std::max(zmax, z[c] = dot(v, g.x[c]));
        double total = 0.0;
        for (auto& zc : z) total += (zc = std::exp(zc - zmax));
        for (std::size_t c = 0; c < g.x.size(); ++c)
          for (std::size_t j = 0; j < kDims; ++j)
            grad[j] += ((z[c] / total) - (c == g.gold ? 1.0 : 0.0)) * g.x[c][j] / n_groups;
      }
      for (std::size_t j = 0; j < kDims; ++j)
        v[j] -= options.learning_rate * (grad[j] + options.l2 * v[j]);
    }
    // Scale and bias: class-balanced logistic fit of link probability on the
    // ranking score.
    std::vector<std::pair<double, double>> sy;
    double n_pos = 0.0;
    for (const auto& g : groups)
      for (std::size_t c = 0; c < g.x.size(); ++c) {
        sy.emplace_back(dot(v, g.x[c]), c == g.gold ? 1.0 : 0.0);
        n_pos += c == g.gold;
      }
    const double wp = 0.5 / n_pos;
    const double wn = 0.5 / (static_cast<double>(sy.size()) - n_pos);
    double scale = 1.0, bias = 0.0;
    for (std::size_t it = 0; it < options.iterations; ++it) {
      double ga = 0.0, gb = 0.0;
      for (const auto& [sc, y] : sy) {
        const double err = (sigmoid(scale * sc + bias) - y) * (y > 0.5 ? wp : wn);
        ga += err * sc;
        gb += err;
      }
      scale -= options.learning_rate * ga;
      bias -= options.learning_rate * gb;
    }
    if (scale > 0.0 && std::isfinite(scale) && std::isfinite(bias))
      w = {bias, scale * v[0], scale * v[1], scale * v[2], scale * v[3]};
    else
      rep.used_default_weights = true;
  } else {
    rep.used_default_weights = true;
  }
  if (rep.used_default_weights) table = LexicalTable();

  // Threshold: F1 of link-vs-unlinkable over every step of the calibration
  // articles.
  Linker scored = linker;
  scored.set_reranker(Reranker(w, 0.0, table));
  struct Probe {
    bool linked = false;
    bool top_is_gold = false;
    double score = -1.0;
  };
  std::vector<Probe> probes;
  for (const auto& id : calib) {
    const Article* a = corpus.find(id);
    for (const Step* s : a->steps()) {
      Probe pr;
      const auto c = scored.candidates(s->id, s->headline, a->id);
      if (!c.empty()) pr.score = c.front().rerank_score;
      if (s->link_target && corpus.find(*s->link_target)) {
        pr.linked = true;
        pr.top_is_gold = !c.empty() && c.front().article_id == *s->link_target;
        ++rep.calibration_pairs;
      } else {
        ++rep.calibration_unlinked;
      }
      probes.push_back(pr);
    }
  }
  double threshold = Reranker().threshold();
  if (rep.calibration_pairs > 0) {
    std::vector<double> f1(101);
    for (int g = 0; g <= 100; ++g) {
      const double t = g / 100.0;
      std::size_t tp = 0, fp = 0, fn = 0;
      for (const auto& pr : probes) {
        const bool predicted = pr.score >= t;
        if (pr.linked && pr.top_is_gold && predicted) ++tp;
        else {
          if (predicted) ++fp;
          if (pr.linked) ++fn;
        }
      }
      f1[g] = tp ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    }
    const double best = *std::max_element(f1.begin(), f1.end());
    int lo = 0;
    while (f1[lo] != best) ++lo;
    int hi = lo;
    while (hi + 1 <= 100 && f1[hi + 1] == best) ++hi;
    threshold = ((lo + hi) / 2) / 100.0;
    rep.calibration_f1 = best;
  }
  if (report) *report = rep;
  return Reranker(w, threshold, std::move(table));
}

RankingMetrics ranking_metrics(const std::vector<std::optional<std::size_t>>& gold_ranks) {
  if (gold_ranks.empty()) throw Error(ErrorCode::kUsage, "no pairs to evaluate");
  RankingMetrics m;
  m.n = gold_ranks.size();
  for (const auto& r : gold_ranks) {
    if (!r) continue;
    m.recall_at_1 += *r <= 1;
    m.recall_at_5 += *r <= 5;
    m.recall_at_10 += *r <= 10;
    m.mrr += 1.0 / static_cast<double>(*r);
  }
  const double n = static_cast<double>(m.n);
  m.recall_at_1 /= n;
  m.recall_at_5 /= n;
  m.recall_at_10 /= n;
  m.mrr /= n;
  return m;
}

LinkEvaluation evaluate_linker(const std::vector<LinkPair>& pairs, const Linker& linker) {
  if (pairs.empty()) throw Error(ErrorCode::kUsage, "no pairs to evaluate");
  std::vector<std::optional<std::size_t>> retrieve, rerank;
  for (const auto& p : pairs) {
    const auto c = linker.candidates(p.step_id, p.step_text, p.source_article);
    std::optional<std::size_t> rr, rt;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i].article_id == p.article_id) {
        rr = i + 1;
        rt = c[i].retrieve_rank;
      }
    retrieve.push_back(rt);
    rerank.push_back(rr);
  }
  return {ranking_metrics(retrieve), ranking_metrics(rerank)};
}

std::string link_evaluation_to_json(const LinkEvaluation& eval) {
  auto metrics = [](const RankingMetrics& m) {
    return Json{{"n", m.n},
                {"recall_at_1", m.recall_at_1},
                {"recall_at_5", m.recall_at_5},
                {"recall_at_10", m.recall_at_10},
                {"mrr", m.mrr}};
  };
  return Json{{"retrieve", metrics(eval.retrieve)}, {"rerank", metrics(eval.rerank)}}.dump();
}

std::string_view link_provenance_name(LinkProvenance p) {
  return p == LinkProvenance::kCorpusHyperlink ? "corpus-hyperlink" : "predicted";
}

Predictions predict_links(const Linker& linker, std::size_t threads) {
  std::vector<const Step*> todo;
  std::vector<const Article*> parent;
  for (const auto& a : linker.corpus().articles())
    for (const Step* s : a.steps())
      if (!s->link_target) {
        todo.push_back(s);
        parent.push_back(&a);
      }
  std::vector<std::optional<LinkCandidate>> results(todo.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, todo.size()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < todo.size(); i += threads)
          results[i] = linker.link(todo[i]->id, todo[i]->headline, parent[i]->id);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Predictions p;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (results[i])
      p.links.push_back({todo[i]->id, results[i]->article_id, results[i]->rerank_score});
    else
      p.unlinkable.push_back(todo[i]->id);
  }
  std::sort(p.links.begin(), p.links.end(),
            [](const PredictedLink& x, const PredictedLink& y) { return x.step_id < y.step_id; });
  std::sort(p.unlinkable.begin(), p.unlinkable.end());
  return p;
}

std::string predictions_to_text(const Predictions& p) {
  std::map<std::string, std::string> lines;
  for (const auto& l : p.links)
    lines[l.step_id] += l.step_id + "\t" + l.article_id + "\tpredicted\t" +
                        text::format_double(l.score) + "\n";
  for (const auto& s : p.unlinkable) lines[s] += s + "\t-\tpredicted\t-\n";
  std::string out;
  for (const auto& [_, l] : lines) out += l;
  return out;
}

Predictions parse_predictions(std::string_view data) {
  Predictions p;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const auto line = data.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 4 || f[0].empty() || f[1].empty() || f[2] != "predicted")
      throw Error(ErrorCode::kValidation, "bad prediction line", line_no);
    if (f[1] == "-") {
      p.unlinkable.push_back(f[0]);
      continue;
    }
    try {
      p.links.push_back({f[0], f[1], parse_real(f[3], "score")});
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, e.what(), line_no);
    }
  }
  std::stable_sort(p.links.begin(), p.links.end(),
                   [](const PredictedLink& x, const PredictedLink& y) { return x.step_id < y.step_id; });
  std::sort(p.unlinkable.begin(), p.unlinkable.end());
  return p;
}

const RealizedBy* HierarchyGraph::link_of(std::string_view step_id) const {
  const auto it = std::lower_bound(
      realized_by.begin(), realized_by.end(), step_id,
      [](const RealizedBy& r, std::string_view id) { return r.step_id < id; });
  return it != realized_by.end() && it->step_id == step_id ? &*it : nullptr;
}

HierarchyGraph build_hierarchy(const Corpus& corpus, const Predictions& predictions) {
  HierarchyGraph g;
  for (const auto& a : corpus.articles()) {
    g.articles.push_back(a.id);
    for (const Step* s : a.steps()) g.has_step.emplace_back(a.id, s->id);
  }
  // child articles reachable in one link from each article, with multiplicity
  std::unordered_map<std::string, std::map<std::string, std::size_t>> children;
  std::unordered_set<std::string> linked;

  auto reaches = [&](const std::string& from, const std::string& to) {
    std::vector<const std::string*> stack{&from};
    std::unordered_set<std::string> seen{from};
    while (!stack.empty()) {
      const std::string* cur = stack.back();
      stack.pop_back();
      if (*cur == to) return true;
      const auto it = children.find(*cur);
      if (it == children.end()) continue;
      for (const auto& [c, _] : it->second)
        if (seen.insert(c).second) stack.push_back(&c);
    }
    return false;
  };

  auto add = [&](const std::string& step_id, const std::string& article_id, LinkProvenance prov,
                 std::optional<double> score) {
    const auto* ref = corpus.find_step(step_id);
    std::string reason;
    if (!ref) reason = "unknown step";
    else if (!corpus.find(article_id)) reason = "unknown article";
    else if (linked.count(step_id)) reason = "step already linked";
    else if (article_id == ref->article->id) reason = "cycle: step links to its own article";
    else if (reaches(article_id, ref->article->id))
      reason = "cycle: " + article_id + " already reaches " + ref->article->id;
    if (!reason.empty()) {
      g.skipped.push_back({step_id, article_id, prov, reason});
      return;
    }
    linked.insert(step_id);
    ++children[ref->article->id][article_id];
    g.realized_by.push_back({step_id, article_id, prov, score});
  };

  std::vector<Hyperlink> hyperlinks;
  for (const auto& a : corpus.articles())
    hyperlinks.insert(hyperlinks.end(), a.hyperlinks.begin(), a.hyperlinks.end());
  std::stable_sort(hyperlinks.begin(), hyperlinks.end(),
                   [](const Hyperlink& x, const Hyperlink& y) { return x.step_id < y.step_id; });
  for (const auto& h : hyperlinks)
    add(h.step_id, h.target_article_id, LinkProvenance::kCorpusHyperlink, std::nullopt);

  auto preds = predictions.links;
  std::stable_sort(preds.begin(), preds.end(),
                   [](const PredictedLink& x, const PredictedLink& y) { return x.step_id < y.step_id; });
  for (const auto& p : preds) add(p.step_id, p.article_id, LinkProvenance::kPredicted, p.score);

  for (const auto& s : predictions.unlinkable)
    if (!linked.count(s)) g.unlinkable.push_back(s);
  std::sort(g.unlinkable.begin(), g.unlinkable.end());
  g.unlinkable.erase(std::unique(g.unlinkable.begin(), g.unlinkable.end()), g.unlinkable.end());
  std::sort(g.realized_by.begin(), g.realized_by.end(),
            [](const RealizedBy& x, const RealizedBy& y) { return x.step_id < y.step_id; });
  return g;
}

std::optional<std::vector<std::string>> topological_order(const HierarchyGraph& graph) {
  std::map<std::string, std::vector<std::string>> out;
  std::map<std::string, std::size_t> indegree;
  auto node = [&](const std::string& n) { indegree.emplace(n, 0); };
  auto edge = [&](const std::string& from, const std::string& to) {
    node(from);
    node(to);
    out[from].push_back(to);
    ++indegree[to];
  };
  for (const auto& a : graph.articles) node("a:" + a);
  for (const auto& [a, s] : graph.has_step) edge("a:" + a, "s:" + s);
  for (const auto& r : graph.realized_by) edge("s:" + r.step_id, "a:" + r.article_id);

  std::vector<std::string> order;
  std::set<std::string> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.insert(n);
  while (!ready.empty()) {
    const std::string n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& m : out[n])
      if (--indegree[m] == 0) ready.insert(m);
  }
  if (order.size() != indegree.size()) return std::nullopt;
  return order;
}

std::string hierarchy_edge_list(const HierarchyGraph& graph) {
  std::string out;
  for (const auto& r : graph.realized_by) {
    out += r.step_id + "\t" + r.article_id + "\t" + std::string(link_provenance_name(r.provenance)) +
           "\t" + (r.score ? text::format_double(*r.score) : "-") + "\n";
  }
  return out;
}

namespace {

Json link_json(const RealizedBy& r) {
  return Json{{"article_id", r.article_id},
              {"provenance", link_provenance_name(r.provenance)},
              {"score", r.score ? Json(*r.score) : Json(nullptr)}};
}

Json tree(const HierarchyGraph& g, const Corpus& corpus, const Article& a, std::size_t depth) {
  Json steps = Json::array();
  std::size_t index = 0;
  for (const Step* s : a.steps()) {
    Json js{{"step_id", s->id}, {"index", index++}, {"headline", s->headline}, {"link", nullptr}};
    if (const auto* r = g.link_of(s->id)) {
      js["link"] = link_json(*r);
      if (depth > 0) js["link"]["article"] = tree(g, corpus, *corpus.find(r->article_id), depth - 1);
    }
    steps.push_back(std::move(js));
  }
  return Json{{"article_id", a.id}, {"title", a.title}, {"steps", std::move(steps)}};
}

}  // namespace

std::string hierarchy_tree_json(const HierarchyGraph& graph, const Corpus& corpus,
                                std::string_view article_id, std::size_t depth) {
  const Article* a = corpus.find(article_id);
  if (!a) throw Error(ErrorCode::kNotFound, "unknown article '" + std::string(article_id) + "'");
  return tree(graph, corpus, *a, depth).dump();
}

std::string hierarchy_to_json(const HierarchyGraph& graph) {
  std::set<std::string> targets;
  for (const auto& r : graph.realized_by) targets.insert(r.article_id);
  Json roots = Json::array();
  for (const auto& a : graph.articles)
    if (!targets.count(a)) roots.push_back(a);
  Json edges = Json::array();
  for (const auto& r : graph.realized_by) {
    Json e = link_json(r);
    e["step_id"] = r.step_id;
    edges.push_back(std::move(e));
  }
  Json skipped = Json::array();
  for (const auto& s : graph.skipped)
    skipped.push_back({{"step_id", s.step_id},
                       {"article_id", s.article_id},
                       {"provenance", link_provenance_name(s.provenance)},
                       {"reason", s.reason}});
  return Json{{"roots", std::move(roots)},
              {"edges", std::move(edges)},
              {"skipped", std::move(skipped)},
              {"unlinkable", graph.unlinkable}}
      .dump();
}

std::size_t hierarchy_depth(const HierarchyGraph& graph, const Corpus& corpus,
                            std::string_view article_id) {
  std::unordered_map<std::string, std::size_t> memo;
  std::function<std::size_t(const Article&)> depth = [&](const Article& a) -> std::size_t {
    if (auto it = memo.find(a.id); it != memo.end()) return it->second;
    std::size_t d = 0;
    for (const Step* s : a.steps())
      if (const auto* r = graph.link_of(s->id))
        d = std::max(d, 1 + depth(*corpus.find(r->article_id)));
    return memo[a.id] = d;
  };
  const Article* a = corpus.find(article_id);
  if (!a) throw Error(ErrorCode::kNotFound, "unknown article '" + std::string(article_id) + "'");
  return depth(*a);
}

}  // namespace prockit
