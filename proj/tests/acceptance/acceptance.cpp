// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <prockit-cli> <test-data-dir>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "prockit/benchgen.hpp"
#include "prockit/corpus.hpp"
#include "prockit/error.hpp"
#include "prockit/hierarchy.hpp"
#include "prockit/random.hpp"
#include "prockit/rankagg.hpp"
#include "prockit/statetrack.hpp"
#include "prockit/suggest.hpp"
#include "prockit/text.hpp"
#include "prockit/textindex.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace prockit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string cli;
fs::path data_dir;

std::string fmt(double x, int digits = 4) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

// ---- retrieval

std::vector<std::string> queries(std::size_t n, std::uint64_t seed,
                                 const std::vector<std::pair<std::string, std::string>>& docs) {
  Rng rng(seed);
  const auto unseen = synth::vocabulary(40, seed ^ 0x9e37);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string q;
    const std::size_t len = 1 + rng.uniform_index(4);
    for (std::size_t j = 0; j < len; ++j) {
      if (!q.empty()) q += ' ';
      if (rng.uniform_index(5) == 0) {
        q += unseen[rng.uniform_index(unseen.size())];
      } else {
        const auto toks = text::tokenize(docs[rng.uniform_index(docs.size())].second);
        q += toks[rng.uniform_index(toks.size())];
      }
    }
    out.push_back(q);
  }
  return out;
}

std::vector<std::pair<std::string, Vector>> vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::string, Vector>> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(dim);
    for (auto& x : v) x = static_cast<float>(rng.uniform_real() * 2 - 1);
    char id[16];
    std::snprintf(id, sizeof(id), "v%05zu", i);
    out.emplace_back(id, std::move(v));
  }
  return out;
}

Outcome retrieval() {
  const auto docs = synth::documents(1000, 101);
  const auto index = InvertedIndex::build(docs);
  std::size_t bm25_ok = 0, bm25_n = 0;
  for (const auto& q : queries(100, 102, docs)) {
    ++bm25_n;
    const auto got = bm25_search(index, q, 10);
    auto want = oracle::bm25_all(docs, q);
    if (want.size() > 10) want.resize(10);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].id == want[i].id && std::abs(got[i].score - want[i].score) <= 1e-9;
    bm25_ok += same;
  }

  std::size_t knn_ok = 0, knn_n = 0;
  const auto entries = vectors(5000, 64, 103);
  const auto qs = vectors(50, 64, 104);
  for (Metric metric : {Metric::kL2, Metric::kCosine}) {
    const auto vi = VectorIndex::build(64, metric, entries);
    for (const auto& [_, q] : qs) {
      ++knn_n;
      const auto got = vi.knn(q, 10);
      const auto want = oracle::knn_scan(entries, q, 10, metric);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i)
        same = got[i].id == want[i].id && std::abs(got[i].distance - want[i].distance) <= 1e-6;
      knn_ok += same;
    }
  }
  return {bm25_ok == bm25_n && knn_ok == knn_n,
          "bm25 top-10 " + std::to_string(bm25_ok) + "/" + std::to_string(bm25_n) + " queries over 1000 docs, knn " +
              std::to_string(knn_ok) + "/" + std::to_string(knn_n) + " queries over 5000 vectors"};
}

// ---- de-biasing

Outcome debiasing() {
  const auto corpus = Corpus::from_articles(synth::articles(9000, 5, 201));
  std::vector<MultipleChoiceExample> all;
  std::size_t skipped = 0;
  for (auto task : {McTask::kStepInference, McTask::kGoalInference}) {
    McOptions opt;
    opt.task = task;
    opt.seed = 202;
    opt.per_article = task == McTask::kStepInference ? 3 : 2;
    auto ds = gen_multiple_choice(corpus, opt);
    skipped += ds.audit.skipped;
    for (auto& ex : ds.examples) all.push_back(std::move(ex));
  }
  if (all.size() < 40000)
    return {false, "only " + std::to_string(all.size()) + " examples (" + std::to_string(skipped) + " skipped)"};
  all.resize(40000);

  std::array<double, 4> hist{};
  std::map<std::string, std::size_t> seen;
  for (const auto& ex : all) {
    hist[ex.answer_index] += 1;
    for (const auto& c : ex.choices) ++seen[c];
  }
  const double expected = all.size() / 4.0;
  double chi = 0;
  for (double h : hist) chi += (h - expected) * (h - expected) / expected;
  const double critical = 11.3449;  // chi-square, 3 df, upper 0.01

  std::size_t freq_hits = 0, len_hits = 0;
  for (const auto& ex : all) {
    std::size_t f = 0, l = 0;
    for (std::size_t i = 1; i < 4; ++i) {
      if (seen[ex.choices[i]] > seen[ex.choices[f]]) f = i;
      if (ex.choices[i].size() > ex.choices[l].size()) l = i;
    }
    freq_hits += f == ex.answer_index;
    len_hits += l == ex.answer_index;
  }
  const double freq = double(freq_hits) / all.size();
  const double len = double(len_hits) / all.size();
  return {chi < critical && freq <= 0.27 && len <= 0.27,
          std::to_string(all.size()) + " examples, positions " + std::to_string(std::size_t(hist[0])) + "/" +
              std::to_string(std::size_t(hist[1])) + "/" + std::to_string(std::size_t(hist[2])) + "/" +
              std::to_string(std::size_t(hist[3])) + ", chi-square " + fmt(chi, 3) + " < " + fmt(critical, 3) +
              ", frequency baseline " + fmt(freq) + ", length baseline " + fmt(len)};
}

// ---- tournament

Outcome tournament() {
  std::vector<Article> arts = synth::articles(100, 10, 301);
  std::vector<std::vector<std::string>> truth;
  Rng rng(302);
  for (auto& a : arts) {
    a.methods[0].steps.resize(2 + rng.uniform_index(9));
    std::vector<std::string> t;
    for (const auto& s : a.methods[0].steps) t.push_back(s.headline);
    truth.push_back(t);
  }
  const auto corpus = Corpus::from_articles(std::move(arts));
  const auto scorer = position_oracle_scorer(corpus);
  std::size_t recovered = 0;
  for (const auto& t : truth) {
    auto input = t;
    rng.shuffle(input);
    const auto r = order_steps("goal", input, *scorer, rng.next());
    std::vector<std::string> got;
    for (auto i : r.order) got.push_back(input[i]);
    recovered += got == t;
  }

  const auto rps = function_scorer([](std::string_view, std::string_view a, std::string_view b) {
    return (a == "rock" && b == "scissors") || (a == "scissors" && b == "paper") || (a == "paper" && b == "rock")
               ? 1.0
               : 0.0;
  });
  const std::vector<std::string> hands = {"rock", "paper", "scissors"};
  bool rps_ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = order_steps("play", hands, *rps, seed);
    rps_ok = rps_ok && r.cycles.size() == 1 && r.cycles[0].size() == 3;
    for (int rep = 0; rep < 3; ++rep) {
      const auto again = order_steps("play", hands, *rps, seed);
      rps_ok = rps_ok && again.order == r.order && again.cycles == r.cycles;
    }
  }
  return {recovered == truth.size() && rps_ok,
          "recovered " + std::to_string(recovered) + "/" + std::to_string(truth.size()) +
              " source orders; rock-paper-scissors " +
              (rps_ok ? "one 3-cycle, stable per seed over 20 seeds" : "cycle report or determinism broken")};
}

// ---- edit distance

Outcome edit_distance_minimality() {
  std::size_t pairs = 0, mismatches = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<std::string> universe;
    for (std::size_t i = 0; i < n; ++i) universe.push_back(std::string(1, char('a' + i)));
    const auto seqs = oracle::all_sequences(universe);
    for (const auto& ref : seqs) {
      const auto dist = oracle::edit_distances_to(ref, universe);
      for (const auto& pred : seqs) {
        ++pairs;
        mismatches += edit_distance(pred, ref).total != dist.at(pred);
      }
    }
  }
  return {mismatches == 0, std::to_string(pairs) + " sequence pairs over up to 5 keys, " +
                               std::to_string(mismatches) + " differ from the breadth-first oracle"};
}

// ---- suggestion

Outcome suggestion_dedup() {
  std::size_t ok = 0;
  std::string failures;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto arts = synth::trip_articles(seed);
    for (auto& a : synth::articles(80, 5, seed + 500)) arts.push_back(std::move(a));
    const auto corpus = Corpus::from_articles(std::move(arts));
    const auto index = SuggestIndex::build(corpus, Embedder::hashed_char_ngram(), {"headline", "goal"});
    SuggestionConfig cfg;
    cfg.k = 15;
    cfg.n_clusters = 5;
    cfg.seed = seed;
    const auto seq = suggest_steps("Plan a trip", corpus, index, cfg);
    std::set<int> planted_in_top_k;
    for (const auto& c : seq.candidates) planted_in_top_k.insert(synth::trip_family_of(c.text));
    std::map<int, int> reps;
    for (const auto& s : seq.steps) ++reps[synth::trip_family_of(s.text)];
    bool good = planted_in_top_k == std::set<int>{0, 1, 2, 3, 4} && reps.size() == 5 && !reps.count(-1);
    for (const auto& [_, n] : reps) good = good && n == 1;
    ok += good;
    if (!good) failures += " " + std::to_string(seed);
  }
  return {ok == 10, std::to_string(ok) + "/10 seeds give one representative per paraphrase family" +
                        (failures.empty() ? "" : "; failing seeds:" + failures)};
}

// ---- linker

bool acyclic(const HierarchyGraph& g) {
  std::map<std::string, std::vector<std::string>> out;
  std::map<std::string, std::size_t> indeg;
  auto edge = [&](const std::string& a, const std::string& b) {
    out[a].push_back(b);
    indeg[a];
    ++indeg[b];
  };
  for (const auto& a : g.articles) indeg["a:" + a];
  for (const auto& [a, s] : g.has_step) edge("a:" + a, "s:" + s);
  for (const auto& r : g.realized_by) edge("s:" + r.step_id, "a:" + r.article_id);
  std::vector<std::string> ready;
  for (const auto& [n, d] : indeg)
    if (d == 0) ready.push_back(n);
  std::size_t done = 0;
  while (!ready.empty()) {
    const auto n = ready.back();
    ready.pop_back();
    ++done;
    for (const auto& m : out[n])
      if (--indeg[m] == 0) ready.push_back(m);
  }
  return done == indeg.size();
}

// Ten seeded corpora; a single 20-link split often has perfect retrieval,
// which leaves nothing for the reranker to improve.
Outcome linker_quality() {
  std::size_t graphs = 0, acyclic_graphs = 0;
  auto check = [&](const HierarchyGraph& g) {
    ++graphs;
    acyclic_graphs += acyclic(g);
  };
  std::size_t held_out = 0, seeds_worse = 0, seeds_better = 0;
  double hits10 = 0, retrieve_rr = 0, rerank_rr = 0;
  for (std::uint64_t seed = 401; seed <= 410; ++seed) {
    const auto corpus = Corpus::from_articles(synth::planted_link_corpus(500, 200, seed));
    const auto pairs = extract_training_pairs(corpus, {seed, 0.1});
    std::vector<LinkPair> test;
    for (const auto& x : pairs)
      if (x.split == LinkSplit::kTest) test.push_back(x);
    auto linker = Linker::build(corpus, Embedder::hashed_char_ngram());
    linker.set_reranker(train_reranker(linker, pairs, {seed}));
    const auto eval = evaluate_linker(test, linker);
    held_out += test.size();
    hits10 += eval.retrieve.recall_at_10 * test.size();
    retrieve_rr += eval.retrieve.mrr * test.size();
    rerank_rr += eval.rerank.mrr * test.size();
    seeds_worse += eval.rerank.mrr < eval.retrieve.mrr;
    seeds_better += eval.rerank.mrr > eval.retrieve.mrr;

    check(build_hierarchy(corpus));
    check(build_hierarchy(corpus, predict_links(linker)));
    std::vector<std::string> steps;
    for (const auto& a : corpus.articles())
      for (const auto* s : a.steps()) steps.push_back(s->id);
    Rng rng(seed + 1000);
    Predictions p;
    for (int i = 0; i < 1000; ++i)
      p.links.push_back({steps[rng.uniform_index(steps.size())],
                         corpus.articles()[rng.uniform_index(corpus.size())].id, rng.uniform_real()});
    check(build_hierarchy(corpus, p));
  }
  const double recall = hits10 / held_out;
  const double retrieve = retrieve_rr / held_out;
  const double rerank = rerank_rr / held_out;
  const bool pass = recall >= 0.9 && rerank > retrieve && seeds_worse == 0 && acyclic_graphs == graphs;
  return {pass, std::to_string(held_out) + " held-out links over 10 corpora of 500 articles: retrieve recall@10 " +
                    fmt(recall) + ", retrieve MRR " + fmt(retrieve) + ", rerank MRR " + fmt(rerank) +
                    " (better on " + std::to_string(seeds_better) + ", worse on " + std::to_string(seeds_worse) +
                    " corpora); " + std::to_string(acyclic_graphs) + "/" + std::to_string(graphs) +
                    " hierarchies acyclic"};
}

// ---- state tracking

Outcome state_tracking() {
  std::size_t caught = 0, false_alarms = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto clean = synth::random_grid(2 + i % 5, 1 + i % 7, i % 3 != 0, 600 + i);
    false_alarms += !validate_grid(clean).empty();
    auto bad = clean;
    synth::corrupt_grid(bad, i, 700 + i);
    caught += !validate_grid(bad).empty();
  }
  std::size_t replayed = 0, grids = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = synth::random_grid(1 + seed % 6, seed % 9, false, 800 + seed);
    ++grids;
    replayed += apply_events(g.entities, g.cells[0], grid_events(g), g.steps.size()) == g.cells;
  }
  const auto fixture = load_grid(data_dir / "photosynthesis.tsv");
  const auto answer = query_state(fixture, "water", "location", 0);
  const bool soil = answer.kind == StateAnswer::Kind::kValue && answer.value == "soil";
  return {caught == 50 && false_alarms == 0 && replayed == grids && soil,
          "corruptions caught " + std::to_string(caught) + "/50, false alarms " + std::to_string(false_alarms) +
              "/50, round-trips " + std::to_string(replayed) + "/" + std::to_string(grids) +
              ", water at state 0: " + (soil ? "soil" : state_answer_to_json(answer))};
}

// ---- command line

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the pipeline into `dir`; returns the failing step or empty.
std::string pipeline(const fs::path& inputs, const fs::path& dir, int threads) {
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"ingest", "ingest " + inputs.string() + " -o " + d + "corpus.jsonl --report " + d + "ingest.txt"},
      {"index", "index --corpus " + d + "corpus.jsonl -o " + d + "index --embedding-seed 7"},
      {"gen step", "gen --corpus " + d + "corpus.jsonl --task step --seed 11 --per-article 2 -o " + d + "step.jsonl"},
      {"gen goal", "gen --corpus " + d + "corpus.jsonl --task goal --seed 12 -o " + d + "goal.jsonl"},
      {"gen order", "gen --corpus " + d + "corpus.jsonl --task order --flip --seed 13 -o " + d + "order.jsonl"},
      {"link", "link --corpus " + d + "corpus.jsonl --index " + d + "index --seed 14 --threads " +
                   std::to_string(threads) + " -o " + d + "links.tsv --report " + d + "link_report.json"},
      {"hierarchy", "hierarchy --corpus " + d + "corpus.jsonl --links " + d + "links.tsv -o " + d +
                        "edges.tsv --json " + d + "hierarchy.json"},
  };
  for (const auto& [name, args] : steps)
    if (run(cli + " " + args) != 0) return name;
  return {};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

Outcome ordering_and_determinism(Outcome& ordering) {
  const fs::path root = fs::temp_directory_path() / ("prockit-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "inputs");
  {
    std::ofstream out(root / "inputs" / "planted.jsonl", std::ios::binary);
    for (const auto& a : synth::planted_link_corpus(150, 60, 501)) out << serialize_article(a) << "\n";
  }
  fs::copy_file(data_dir / "make-a-youtube-video.html", root / "inputs" / "make-a-youtube-video.html");

  Outcome det;
  const auto fail1 = pipeline(root / "inputs", root / "run1", 4);
  const auto fail2 = fail1.empty() ? pipeline(root / "inputs", root / "run2", 1) : fail1;
  if (!fail1.empty() || !fail2.empty()) {
    det = {false, "`" + (fail1.empty() ? fail2 : fail1) + "` exited non-zero"};
    ordering = {false, "pipeline did not run"};
  } else {
    const auto a = tree(root / "run1");
    const auto b = tree(root / "run2");
    std::vector<std::string> differ;
    for (const auto& [name, bytes] : a) {
      const auto it = b.find(name);
      if (it == b.end() || it->second != bytes) differ.push_back(name);
    }
    const bool nonempty = !a.at("step.jsonl").empty() && !a.at("edges.tsv").empty();
    det = {differ.empty() && a.size() == b.size() && nonempty,
           std::to_string(a.size()) + " output files compared (threads 4 vs 1), " +
               (differ.empty() ? std::string("all byte-identical") : std::to_string(differ.size()) + " differ")};

    std::size_t total = 0, a_first = 0;
    std::istringstream lines(a.at("order.jsonl"));
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      ++total;
      a_first += line.find("\"label\":\"a-first\"") != std::string::npos;
    }
    ordering = {total > 0 && a_first * 2 == total,
                std::to_string(a_first) + "/" + std::to_string(total) + " examples labelled a-first"};
  }
  fs::remove_all(root);
  return det;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <prockit-cli> <test-data-dir>\n";
    return 2;
  }
  cli = argv[1];
  data_dir = argv[2];

  int failed = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << fmt(secs, 1) << " s)"
              << std::endl;
  };

  report("retrieval-oracle-equivalence", retrieval);
  report("debiasing-uniformity", debiasing);
  Outcome ordering;
  Outcome determinism;
  bool ran = false;
  auto pipelines = [&] {
    if (!ran) determinism = ordering_and_determinism(ordering);
    ran = true;
  };
  report("ordering-balance", [&] {
    pipelines();
    return ordering;
  });
  report("tournament-correctness", tournament);
  report("edit-distance-minimality", edit_distance_minimality);
  report("suggestion-dedup", suggestion_dedup);
  report("linker-quality", linker_quality);
  report("state-tracking", state_tracking);
  report("determinism", [&] {
    pipelines();
    return determinism;
  });
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << 9 - failed << "/9" << std::endl;
  return failed ? 1 : 0;
}
