#include "prockit/suggest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json_io.hpp"
#include "prockit/error.hpp"
#include "prockit/random.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

using Point = std::vector<double>;

double dist2(const Vector& x, const Point& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = static_cast<double>(x[j]) - c[j];
    s += d * d;
  }
  return s;
}

Point to_point(const Vector& v) { return Point(v.begin(), v.end()); }

struct KmeansRun {
  std::vector<std::size_t> labels;
  std::vector<Point> centroids;
  double inertia = 0.0;
};

std::size_t nearest(const Vector& x, const std::vector<Point>& centroids, double* d_out) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = dist2(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (d_out) *d_out = best_d;
  return best;
}

KmeansRun kmeans_once(const std::vector<Vector>& xs, std::size_t k, Rng& rng) {
  const std::size_t n = xs.size();
  KmeansRun run;
  run.centroids.push_back(to_point(xs[rng.uniform_index(n)]));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(xs[i], run.centroids[0]);
  while (run.centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    const double r = rng.uniform_real() * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    run.centroids.push_back(to_point(xs[pick]));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], dist2(xs[i], run.centroids.back()));
  }

  const std::size_t dim = xs[0].size();
  run.labels.assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) run.labels[i] = nearest(xs[i], run.centroids, nullptr);
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[run.labels[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[run.labels[i]][j] += xs[i][j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an empty cluster keeps its centroid
      double moved = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = sums[c][j] / static_cast<double>(counts[c]);
        moved += (v - run.centroids[c][j]) * (v - run.centroids[c][j]);
        run.centroids[c][j] = v;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    if (shift <= 1e-6) break;
  }
  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    run.labels[i] = nearest(xs[i], run.centroids, &d);
    run.inertia += d;
  }
  return run;
}

std::string field_text(const Article& article, const Step& step,
                       const std::vector<std::string>& fields) {
  std::string out;
  auto add = [&](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += s;
  };
  for (const auto& f : fields) {
    if (f == "headline") add(step.headline);
    else if (f == "goal") add(article.title);
    else if (f == "details") for (const auto& d : step.details) add(d);
    else if (f == "bullets") for (const auto& b : step.bullets) add(b);
  }
  return out;
}

// goal -> step id -> score
using ScoreTable = std::unordered_map<std::string, std::unordered_map<std::string, double>>;

ScoreTable load_score_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw Error(ErrorCode::kValidation, "expected goal<TAB>step id<TAB>score", line_no);
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(line.substr(t2 + 1), &used);
      if (used != line.size() - t2 - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kValidation, "bad score", line_no);
    }
    table[text::casefold(text::normalize_space(line.substr(0, t1)))]
         [line.substr(t1 + 1, t2 - t1 - 1)] = score;
  }
  return table;
}

}  // namespace

ClusterAssignment cluster_steps(const std::vector<Vector>& vectors, std::size_t n_clusters,
                                std::uint64_t seed, std::size_t n_init) {
  if (n_clusters == 0) throw Error(ErrorCode::kUsage, "n_clusters must be positive");
  for (const auto& v : vectors)
    if (v.size() != vectors[0].size())
      throw Error(ErrorCode::kUsage, "vectors differ in length");
  const std::set<Vector> distinct(vectors.begin(), vectors.end());
  if (distinct.size() < n_clusters)
    throw Error(ErrorCode::kDegenerateInput,
                std::to_string(distinct.size()) + " distinct vectors for " +
                    std::to_string(n_clusters) + " clusters");
  KmeansRun best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(n_init, 1); ++r) {
    Rng rng(derive_seed(seed, "kmeans:" + std::to_string(r)));
    auto run = kmeans_once(vectors, n_clusters, rng);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  ClusterAssignment out;
  std::vector<std::size_t> relabel(n_clusters, n_clusters);
  std::size_t next = 0;
  for (auto& l : best.labels) {
    if (relabel[l] == n_clusters) relabel[l] = next++;
    l = relabel[l];
  }
  out.centroids.resize(next);
  for (std::size_t c = 0; c < n_clusters; ++c)
    if (relabel[c] < next)
      out.centroids[relabel[c]] = Vector(best.centroids[c].begin(), best.centroids[c].end());
  out.labels = std::move(best.labels);
  out.inertia = best.inertia;
  return out;
}

SuggestIndex SuggestIndex::build(const Corpus& corpus, const Embedder& embedder,
                                 const std::vector<std::string>& candidate_fields) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no articles");
  if (candidate_fields.empty()) throw Error(ErrorCode::kConfig, "no candidate fields");
  for (const auto& f : candidate_fields)
    if (f != "headline" && f != "goal" && f != "details" && f != "bullets")
      throw Error(ErrorCode::kConfig, "unknown candidate field '" + f + "'");
  SuggestIndex index;
  index.embedder_ = embedder;
  index.fields_ = candidate_fields;
  std::vector<std::pair<std::string, Vector>> cand;
  std::vector<std::pair<std::string, Vector>> heads;
  for (const auto& a : corpus.articles()) {
    for (const Step* s : a.steps()) {
      cand.emplace_back(s->id, embedder.embed_document(s->id, field_text(a, *s, candidate_fields)));
      heads.emplace_back(s->id, embedder.embed_document(s->id, s->headline));
    }
  }
  index.candidates_ = VectorIndex::build(embedder.dim(), Metric::kCosine, std::move(cand));
  index.headlines_ = VectorIndex::build(embedder.dim(), Metric::kCosine, std::move(heads));
  return index;
}

SuggestIndex SuggestIndex::assemble(Embedder embedder, VectorIndex candidates,
                                    VectorIndex headlines,
                                    std::vector<std::string> candidate_fields) {
  if (candidates.dim() != embedder.dim() || headlines.dim() != embedder.dim())
    throw Error(ErrorCode::kDimensionMismatch, "step vectors do not match the embedder dimension");
  if (candidates.ids() != headlines.ids())
    throw Error(ErrorCode::kConfig, "candidate and headline vectors cover different steps");
  SuggestIndex index;
  index.embedder_ = std::move(embedder);
  index.candidates_ = std::move(candidates);
  index.headlines_ = std::move(headlines);
  index.fields_ = std::move(candidate_fields);
  return index;
}

SuggestedSequence suggest_steps(std::string_view goal, const Corpus& corpus,
                                const SuggestIndex& index, const SuggestionConfig& config) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no articles");
  if (config.k == 0) throw Error(ErrorCode::kConfig, "K must be at least 1");
  const std::size_t n_clusters = config.n_clusters.value_or((config.k + 1) / 2);
  if (n_clusters == 0) throw Error(ErrorCode::kConfig, "n_clusters must be at least 1");
  if (n_clusters > config.k)
    throw Error(ErrorCode::kConfig, "n_clusters (" + std::to_string(n_clusters) +
                                        ") exceeds K (" + std::to_string(config.k) + ")");

  SuggestedSequence out;
  out.goal = std::string(goal);
  out.clusters_requested = n_clusters;

  std::vector<std::pair<double, std::string>> scored;  // (relatedness, step id)
  if (config.scorer == RelatednessScorer::kExternal) {
    if (!config.score_file) throw Error(ErrorCode::kConfig, "external scorer needs a score file");
    const auto table = load_score_file(*config.score_file);
    const auto it = table.find(text::casefold(text::normalize_space(goal)));
    if (it == table.end())
      throw Error(ErrorCode::kNotFound, "score file has no entry for goal '" + std::string(goal) + "'");
    for (const auto& [id, s] : it->second)
      if (corpus.find_step(id)) scored.emplace_back(s, id);
  } else {
    const Vector q = index.embedder().embed(goal);
    const auto& cands = index.candidates();
    for (std::size_t i = 0; i < cands.size(); ++i)
      scored.emplace_back(1.0 - cands.distance(q, i), cands.ids()[i]);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::unordered_set<std::string> seen;
  for (const auto& [rel, id] : scored) {
    if (out.candidates.size() >= config.k) break;
    const auto* ref = corpus.find_step(id);
    if (!seen.insert(text::casefold(text::normalize_space(ref->step->headline))).second) continue;
    out.candidates.push_back({ref->step->headline, id, rel, 0});
  }
  if (out.candidates.empty()) return out;

  std::vector<Vector> vecs;
  for (const auto& c : out.candidates) {
    const std::size_t row = index.headlines().find(c.step_id);
    if (row >= index.headlines().size())
      throw Error(ErrorCode::kUnknownDocument, "step '" + c.step_id + "' is not indexed");
    const auto v = index.headlines().vector(row);
    vecs.emplace_back(v.begin(), v.end());
  }
  const std::size_t distinct = std::set<Vector>(vecs.begin(), vecs.end()).size();
  const auto clusters = cluster_steps(vecs, std::min(n_clusters, distinct), config.seed, config.n_init);
  std::vector<std::size_t> medoid(clusters.centroids.size(), out.candidates.size());
  std::vector<double> medoid_d(clusters.centroids.size(), 0.0);
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    const std::size_t c = clusters.labels[i];
    out.candidates[i].cluster = c;
    const double d = dist2(vecs[i], Point(clusters.centroids[c].begin(), clusters.centroids[c].end()));
    if (medoid[c] == out.candidates.size() || d < medoid_d[c]) {
      medoid[c] = i;
      medoid_d[c] = d;
    }
  }

  std::vector<std::string> texts;
  for (auto m : medoid) texts.push_back(out.candidates[m].text);
  std::unique_ptr<PrecedenceScorer> scorer;
  if (config.ordering_scorer == OrderingScorerKind::kPositionOracle)
    scorer = position_oracle_scorer(corpus);
  else
    scorer = embedding_prior_scorer(index.headlines(), index.embedder(), corpus,
                                    std::max<std::size_t>(config.prior_neighbours, 1));
  out.diagnostics = order_steps(goal, texts, *scorer, config.seed);
  for (auto i : out.diagnostics.order) out.steps.push_back(out.candidates[medoid[i]]);
  return out;
}

std::string suggested_sequence_to_json(const SuggestedSequence& seq) {
  auto steps_json = [](const std::vector<SuggestedStep>& steps) {
    Json arr = Json::array();
    for (const auto& s : steps)
      arr.push_back({{"text", s.text},
                     {"step_id", s.step_id},
                     {"relatedness", s.relatedness},
                     {"cluster", s.cluster}});
    return arr;
  };
  const auto& d = seq.diagnostics;
  return Json{{"goal", seq.goal},
              {"steps", steps_json(seq.steps)},
              {"candidates", steps_json(seq.candidates)},
              {"clusters_requested", seq.clusters_requested},
              {"diagnostics",
               {{"order", d.order},
                {"wins", d.wins},
                {"cycles", d.cycles},
                {"tie_breaks_used", d.tie_breaks_used},
                {"decisive_pairs", d.decisive_pairs}}}}
      .dump();
}

std::string suggested_sequence_text(const SuggestedSequence& seq) {
  std::string out = "goal: " + seq.goal + "\n";
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const auto& s = seq.steps[i];
    out += std::to_string(i + 1) + ". " + s.text + "  [" + s.step_id + ", relatedness " +
           text::format_double(std::round(s.relatedness * 1e4) / 1e4) + ", cluster " +
           std::to_string(s.cluster) + "]\n";
  }
  out += "candidates: " + std::to_string(seq.candidates.size()) +
         ", clusters: " + std::to_string(seq.steps.size()) +
         ", cycles: " + std::to_string(seq.diagnostics.cycles.size()) +
         ", tie breaks: " + std::to_string(seq.diagnostics.tie_breaks_used) + "\n";
  return out;
}

EditDistance edit_distance(const std::vector<std::string>& predicted,
                           const std::vector<std::string>& reference) {
  std::unordered_map<std::string, std::size_t> ref_pos;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (!ref_pos.emplace(reference[i], i).second)
      throw Error(ErrorCode::kDuplicateKeys, "reference repeats '" + reference[i] + "'");
  std::unordered_set<std::string> pred_keys;
  for (const auto& p : predicted)
    if (!pred_keys.insert(p).second)
      throw Error(ErrorCode::kDuplicateKeys, "prediction repeats '" + p + "'");

  EditDistance d;
  std::vector<std::size_t> common;  // reference positions in predicted order
  for (const auto& p : predicted) {
    auto it = ref_pos.find(p);
    if (it == ref_pos.end()) ++d.deletions;
    else common.push_back(it->second);
  }
  d.insertions = reference.size() - common.size();
  // Longest increasing subsequence (patience sorting); positions are distinct.
  std::vector<std::size_t> tails;
  for (auto x : common) {
    auto it = std::lower_bound(tails.begin(), tails.end(), x);
    if (it == tails.end()) tails.push_back(x);
    else *it = x;
  }
  d.moves = common.size() - tails.size();
  d.total = d.insertions + d.deletions + d.moves;
  return d;
}

std::vector<EditRecord> load_edit_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<EditRecord> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kValidation, std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("steps") ||
        !j["steps"].is_array())
      throw Error(ErrorCode::kValidation, "expected {\"id\": string, \"steps\": [string]}", line_no);
    EditRecord r;
    r.id = j["id"].get<std::string>();
    for (const auto& s : j["steps"]) {
      if (!s.is_string()) throw Error(ErrorCode::kValidation, "steps must be strings", line_no);
      r.steps.push_back(s.get<std::string>());
    }
    if (!ids.insert(r.id).second)
      throw Error(ErrorCode::kDuplicateId, "duplicate record id '" + r.id + "'", line_no);
    out.push_back(std::move(r));
  }
  return out;
}

EditEvalReport evaluate_edits(const std::vector<EditRecord>& predicted,
                              const std::vector<EditRecord>& reference) {
  std::unordered_map<std::string, const EditRecord*> by_id;
  for (const auto& p : predicted)
    if (!by_id.emplace(p.id, &p).second)
      throw Error(ErrorCode::kDuplicateId, "duplicate prediction id '" + p.id + "'");
  EditEvalReport report;
  std::size_t matched = 0;
  for (const auto& ref : reference) {
    EditEvalRow row;
    row.id = ref.id;
    auto it = by_id.find(ref.id);
    if (it == by_id.end()) {
      row.missing_prediction = true;
      row.distance = edit_distance({}, ref.steps);
    } else {
      ++matched;
      row.distance = edit_distance(it->second->steps, ref.steps);
    }
    report.sum.insertions += row.distance.insertions;
    report.sum.deletions += row.distance.deletions;
    report.sum.moves += row.distance.moves;
    report.sum.total += row.distance.total;
    report.rows.push_back(std::move(row));
  }
  report.unmatched_predictions = predicted.size() - matched;
  if (!report.rows.empty())
    report.mean_total = static_cast<double>(report.sum.total) / static_cast<double>(report.rows.size());
  return report;
}

std::string edit_report_text(const EditEvalReport& report) {
  std::string out = "id\tinsertions\tdeletions\tmoves\ttotal\tmissing\n";
  auto row = [&](const std::string& id, const EditDistance& d, const std::string& missing) {
    out += id + "\t" + std::to_string(d.insertions) + "\t" + std::to_string(d.deletions) + "\t" +
           std::to_string(d.moves) + "\t" + std::to_string(d.total) + "\t" + missing + "\n";
  };
  for (const auto& r : report.rows) row(r.id, r.distance, r.missing_prediction ? "yes" : "no");
  row("ALL", report.sum, std::to_string(std::count_if(report.rows.begin(), report.rows.end(),
                                                      [](const auto& r) { return r.missing_prediction; })));
  out += "mean_total\t" + text::format_double(report.mean_total) + "\n";
  out += "unmatched_predictions\t" + std::to_string(report.unmatched_predictions) + "\n";
  return out;
}

}  // namespace prockit
