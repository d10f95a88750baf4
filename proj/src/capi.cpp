#include "prockit/prockit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <set>

#include "json_io.hpp"
#include "prockit/benchgen.hpp"
#include "prockit/bundle.hpp"
#include "prockit/error.hpp"
#include "prockit/hierarchy.hpp"
#include "prockit/ingest.hpp"
#include "prockit/service.hpp"
#include "prockit/statetrack.hpp"
#include "prockit/suggest.hpp"

using namespace prockit;

struct pk_corpus {
  Corpus corpus;
};

struct pk_index {
  IndexBundle bundle;
};

struct pk_linker {
  const pk_corpus* corpus;
  Linker linker;
};

struct pk_hierarchy {
  const pk_corpus* corpus;
  HierarchyGraph graph;
};

struct pk_service {
  std::unique_ptr<Service> service;
};

static_assert(static_cast<int>(ErrorCode::kIo) == PK_ERR_IO);
static_assert(static_cast<int>(ErrorCode::kUsage) == PK_ERR_USAGE);
static_assert(static_cast<int>(ErrorCode::kValidation) == PK_ERR_VALIDATION);
static_assert(static_cast<int>(ErrorCode::kConfig) == PK_ERR_CONFIG);
static_assert(static_cast<int>(ErrorCode::kInvalidGrid) == PK_ERR_INVALID_GRID);
static_assert(static_cast<int>(ErrorCode::kNotFound) == PK_ERR_NOT_FOUND);

namespace {

thread_local std::string g_message;
thread_local std::size_t g_line = 0;

pk_status fail(pk_status status, std::string message, std::size_t line = 0) {
  g_message = std::move(message);
  g_line = line;
  return status;
}

template <typename F>
pk_status guard(F&& f) {
  try {
    f();
    g_message.clear();
    g_line = 0;
    return PK_OK;
  } catch (const Error& e) {
    return fail(static_cast<pk_status>(e.code()), e.what(), e.line().value_or(0));
  } catch (const std::bad_alloc&) {
    return fail(PK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PK_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::kUsage, std::string(name) + " must not be NULL");
}

char* dup(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void put(char** out, std::string_view s) {
  if (out) *out = dup(s);
}

// Strict reader for the JSON option objects.
class Options {
 public:
  explicit Options(const char* text) {
    if (!text || !*text) return;
    j_ = Json::parse(text, nullptr, false);
    if (j_.is_discarded() || !j_.is_object()) throw Error(ErrorCode::kConfig, "options must be a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
  }

  std::size_t count(const char* key, std::size_t def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  }
  std::uint64_t seed(const char* key, std::uint64_t def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  double real(const char* key, double def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a number");
    return v.get<double>();
  }
  bool flag(const char* key, bool def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a boolean");
    return v.get<bool>();
  }
  std::string str(const char* key, std::string def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<std::string> list(const char* key, std::vector<std::string> def) {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    std::vector<std::string> out;
    if (v.is_array())
      for (const auto& x : v)
        if (x.is_string()) out.push_back(x.get<std::string>());
    if (!v.is_array() || out.size() != v.size())
      throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be a list of strings");
    return out;
  }
  std::string choice(const char* key, std::string def, std::initializer_list<const char*> allowed) {
    std::string v = str(key, def);
    for (const char* a : allowed)
      if (v == a) return v;
    std::string all;
    for (const char* a : allowed) all += std::string(all.empty() ? "" : ", ") + a;
    throw Error(ErrorCode::kConfig, std::string("option '") + key + "' must be one of " + all);
  }

  // Rejects keys nobody asked for.
  void finish() const {
    if (!j_.is_object()) return;
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) throw Error(ErrorCode::kConfig, "unknown option '" + k + "'");
  }

 private:
  Json j_;
  std::set<std::string> seen_;
};

Embedder make_embedder(const Corpus& corpus, Options& o) {
  const std::string kind = o.choice("embedder", "hashed", {"hashed", "tfidf", "external"});
  const std::size_t dim = o.count("dim", 512);
  const std::uint64_t seed = o.seed("seed", 0);
  const std::string vectors = o.str("vectors", "");
  if (kind == "external") {
    if (vectors.empty()) throw Error(ErrorCode::kConfig, "external embedder needs 'vectors'");
    return Embedder::external(vectors);
  }
  if (!vectors.empty()) throw Error(ErrorCode::kConfig, "'vectors' only applies to the external embedder");
  if (kind == "tfidf") {
    std::vector<std::string> texts;
    for (const auto& a : corpus.articles()) {
      texts.push_back(a.title);
      for (const Step* s : a.steps()) texts.push_back(s->headline);
    }
    return Embedder::tfidf(texts);
  }
  if (dim == 0) throw Error(ErrorCode::kConfig, "dim must be at least 1");
  return Embedder::hashed_char_ngram(dim, seed);
}

Json violations_json(const std::vector<GridViolation>& vs) {
  Json arr = Json::array();
  for (const auto& v : vs)
    arr.push_back({{"kind", std::string(grid_violation_name(v.kind))},
                   {"row", v.row ? Json(*v.row) : Json(nullptr)},
                   {"column", v.column ? Json(*v.column) : Json(nullptr)},
                   {"message", v.message}});
  return arr;
}

Json violations_json(const std::vector<TimelineViolation>& vs) {
  Json arr = Json::array();
  for (const auto& v : vs)
    arr.push_back({{"kind", std::string(timeline_violation_name(v.kind))},
                   {"index", v.index},
                   {"message", v.message}});
  return arr;
}

bool is_grid_path(const char* path) {
  return std::filesystem::path(path).extension() == ".tsv";
}

std::vector<LinkPair> pairs_for(const Corpus& corpus, Options& o, bool* all) {
  SplitOptions split;
  split.seed = o.seed("seed", 0);
  split.test_fraction = o.real("test_fraction", 0.1);
  if (split.test_fraction < 0.0 || split.test_fraction > 1.0)
    throw Error(ErrorCode::kConfig, "test_fraction must be in [0, 1]");
  if (all) *all = o.choice("split", "test", {"test", "all"}) == "all";
  return extract_training_pairs(corpus, split);
}

}  // namespace

extern "C" {

const char* pk_version(void) { return "0.1.0"; }

const char* pk_status_name(pk_status status) {
  if (status == PK_OK) return "ok";
  if (status == PK_ERR_INTERNAL) return "internal";
  if (status < PK_ERR_IO || status > PK_ERR_NOT_FOUND) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* pk_last_error(void) { return g_message.c_str(); }
size_t pk_last_error_line(void) { return g_line; }

void pk_free(char* s) { std::free(s); }

pk_status pk_corpus_ingest(const char* const* inputs, size_t n_inputs, const char* options, pk_corpus** out,
                           char** report) {
  return guard([&] {
    require(out, "out");
    if (n_inputs == 0) throw Error(ErrorCode::kUsage, "no inputs");
    require(inputs, "inputs");
    Options o(options);
    IngestOptions io;
    const std::string format = o.choice("format", "auto", {"auto", "html", "record"});
    io.format = format == "html" ? IngestFormat::kHtmlSubset
                : format == "record" ? IngestFormat::kRecord
                                     : IngestFormat::kAuto;
    io.keep_going = o.flag("keep_going", false);
    o.finish();
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n_inputs; ++i) {
      require(inputs[i], "input path");
      paths.emplace_back(inputs[i]);
    }
    IngestReport rep;
    auto c = std::make_unique<pk_corpus>(pk_corpus{ingest(paths, io, &rep)});
    put(report, ingest_report_text(rep));
    *out = c.release();
  });
}

pk_status pk_corpus_load(const char* path, pk_corpus** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new pk_corpus{load_corpus(path)};
  });
}

pk_status pk_corpus_save(const pk_corpus* corpus, const char* path) {
  return guard([&] {
    require(corpus, "corpus");
    require(path, "path");
    corpus->corpus.save(path);
  });
}

size_t pk_corpus_size(const pk_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }

pk_status pk_corpus_article(const pk_corpus* corpus, const char* id, char** json) {
  return guard([&] {
    require(corpus, "corpus");
    require(id, "id");
    require(json, "json");
    const Article* a = corpus->corpus.find(id);
    if (!a) throw Error(ErrorCode::kNotFound, std::string("no article '") + id + "'");
    *json = dup(serialize_article(*a));
  });
}

void pk_corpus_free(pk_corpus* corpus) { delete corpus; }

pk_status pk_index_build(const pk_corpus* corpus, const char* options, pk_index** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    Options o(options);
    const Embedder embedder = make_embedder(corpus->corpus, o);
    const auto fields = o.list("fields", {"headline", "goal"});
    Bm25Params params;
    params.k1 = o.real("k1", params.k1);
    params.b = o.real("b", params.b);
    o.finish();
    *out = new pk_index{build_index_bundle(corpus->corpus, embedder, fields, params)};
  });
}

pk_status pk_index_save(const pk_index* index, const char* dir) {
  return guard([&] {
    require(index, "index");
    require(dir, "dir");
    save_index_bundle(index->bundle, dir);
  });
}

pk_status pk_index_load(const char* dir, pk_index** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new pk_index{load_index_bundle(dir)};
  });
}

void pk_index_free(pk_index* index) { delete index; }

pk_status pk_search(const pk_index* index, const char* query, size_t k, char** json) {
  return guard([&] {
    require(index, "index");
    require(query, "query");
    require(json, "json");
    Json arr = Json::array();
    for (const auto& hit : bm25_search(index->bundle.search, query, k))
      arr.push_back({{"id", hit.id}, {"score", hit.score}});
    *json = dup(arr.dump());
  });
}

pk_status pk_generate(const pk_corpus* corpus, const pk_index* index, const char* options, char** dataset,
                      char** audit) {
  return guard([&] {
    require(corpus, "corpus");
    require(dataset, "dataset");
    Options o(options);
    const std::string task = o.choice("task", "step", {"step", "goal", "order"});
    const std::uint64_t seed = o.seed("seed", 0);
    std::string data;
    std::string report;
    if (task == "order") {
      OrderingOptions opts;
      opts.seed = seed;
      opts.flip = o.flag("flip", false);
      o.finish();
      const auto examples = gen_ordering(corpus->corpus, opts);
      std::size_t a_first = 0;
      for (const auto& e : examples) {
        data += ordering_example_to_json(e);
        data += '\n';
        a_first += e.label == OrderLabel::kAFirst;
      }
      report = "examples\t" + std::to_string(examples.size()) + "\n";
      report += "a_first\t" + std::to_string(a_first) + "\n";
      report += "b_first\t" + std::to_string(examples.size() - a_first) + "\n";
      report += "flip\t" + std::string(opts.flip ? "yes" : "no") + "\n";
    } else {
      McOptions opts;
      opts.task = task == "goal" ? McTask::kGoalInference : McTask::kStepInference;
      opts.seed = seed;
      opts.method = o.choice("method", "bm25", {"bm25", "embedding"}) == "embedding" ? DistractorMethod::kEmbedding
                                                                                      : DistractorMethod::kBm25;
      opts.max_overlap = o.real("max_overlap", opts.max_overlap);
      opts.per_article = o.count("per_article", opts.per_article);
      opts.debias = o.flag("debias", opts.debias);
      opts.emphasize_verb_object = o.flag("emphasize", false);
      if (o.has("flip")) throw Error(ErrorCode::kConfig, "'flip' only applies to the order task");
      o.finish();
      std::optional<CandidatePool> pool;
      if (index) {
        const Embedder& e = index->bundle.steps.embedder();
        pool = opts.task == McTask::kGoalInference ? CandidatePool::goals_of(corpus->corpus, e)
                                                   : CandidatePool::steps_of(corpus->corpus, e);
      }
      const auto ds = gen_multiple_choice(corpus->corpus, opts, pool ? &*pool : nullptr);
      for (const auto& e : ds.examples) {
        data += mc_example_to_json(e);
        data += '\n';
      }
      report = audit_report_text(ds.audit);
    }
    char* d = dup(data);
    if (audit) {
      try {
        *audit = dup(report);
      } catch (...) {
        std::free(d);
        throw;
      }
    }
    *dataset = d;
  });
}

pk_status pk_suggest(const pk_corpus* corpus, const pk_index* index, const char* goal, const char* options,
                     char** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(goal, "goal");
    require(out, "out");
    Options o(options);
    SuggestionConfig cfg;
    cfg.k = o.count("k", cfg.k);
    if (o.has("n_clusters")) cfg.n_clusters = o.count("n_clusters", 0);
    cfg.seed = o.seed("seed", 0);
    cfg.n_init = o.count("n_init", cfg.n_init);
    cfg.prior_neighbours = o.count("prior_neighbours", cfg.prior_neighbours);
    if (o.has("score_file")) {
      cfg.score_file = o.str("score_file", "");
      cfg.scorer = RelatednessScorer::kExternal;
    }
    if (o.choice("ordering", "prior", {"prior", "oracle"}) == "oracle")
      cfg.ordering_scorer = OrderingScorerKind::kPositionOracle;
    const bool text = o.choice("format", "json", {"json", "text"}) == "text";
    o.finish();
    cfg.candidate_fields = index->bundle.steps.fields();
    const auto seq = suggest_steps(goal, corpus->corpus, index->bundle.steps, cfg);
    *out = dup(text ? suggested_sequence_text(seq) : suggested_sequence_to_json(seq));
  });
}

pk_status pk_linker_create(const pk_corpus* corpus, const pk_index* index, const char* options,
                           pk_linker** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(index, "index");
    require(out, "out");
    Options o(options);
    LinkerConfig cfg;
    cfg.k_retrieve = o.count("k_retrieve", cfg.k_retrieve);
    o.finish();
    *out = new pk_linker{corpus, Linker::build(corpus->corpus, index->bundle.steps.embedder(), {}, cfg)};
  });
}

pk_status pk_linker_load_model(pk_linker* linker, const char* path) {
  return guard([&] {
    require(linker, "linker");
    require(path, "path");
    try {
      linker->linker.set_reranker(Reranker::deserialize(persist::read_file(path)));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(path) + ": " + e.what());
    }
  });
}

pk_status pk_linker_save_model(const pk_linker* linker, const char* path) {
  return guard([&] {
    require(linker, "linker");
    require(path, "path");
    persist::write_file(path, linker->linker.reranker().serialize());
  });
}

pk_status pk_linker_train(pk_linker* linker, const char* options, char** report_json) {
  return guard([&] {
    require(linker, "linker");
    Options o(options);
    const auto pairs = pairs_for(linker->corpus->corpus, o, nullptr);
    TrainOptions t;
    t.seed = o.seed("seed", 0);
    t.calibration_fraction = o.real("calibration_fraction", t.calibration_fraction);
    t.iterations = o.count("iterations", t.iterations);
    o.finish();
    TrainingReport rep;
    Reranker r = train_reranker(linker->linker, pairs, t, &rep);
    const auto& w = r.weights();
    Json j = {{"fit_pairs", rep.fit_pairs},
              {"fit_examples", rep.fit_examples},
              {"calibration_pairs", rep.calibration_pairs},
              {"calibration_unlinked", rep.calibration_unlinked},
              {"calibration_f1", rep.calibration_f1},
              {"used_default_weights", rep.used_default_weights},
              {"threshold", r.threshold()},
              {"weights", std::vector<double>(w.begin(), w.end())}};
    linker->linker.set_reranker(std::move(r));
    put(report_json, j.dump());
  });
}

pk_status pk_linker_evaluate(const pk_linker* linker, const char* options, char** metrics_json) {
  return guard([&] {
    require(linker, "linker");
    require(metrics_json, "metrics_json");
    Options o(options);
    bool all = false;
    auto pairs = pairs_for(linker->corpus->corpus, o, &all);
    o.finish();
    if (!all)
      pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                                 [](const LinkPair& p) { return p.split != LinkSplit::kTest; }),
                  pairs.end());
    Json j = Json::parse(link_evaluation_to_json(evaluate_linker(pairs, linker->linker)));
    j["split"] = all ? "all" : "test";
    j["pairs"] = pairs.size();
    *metrics_json = dup(j.dump());
  });
}

pk_status pk_linker_predict(const pk_linker* linker, size_t threads, char** predictions) {
  return guard([&] {
    require(linker, "linker");
    require(predictions, "predictions");
    *predictions = dup(predictions_to_text(predict_links(linker->linker, threads)));
  });
}

pk_status pk_linker_candidates(const pk_linker* linker, const char* step_id, char** json) {
  return guard([&] {
    require(linker, "linker");
    require(step_id, "step_id");
    require(json, "json");
    Json arr = Json::array();
    for (const auto& c : linker->linker.candidates(step_id))
      arr.push_back({{"article_id", c.article_id},
                     {"retrieve_rank", c.retrieve_rank},
                     {"retrieve_distance", c.retrieve_distance},
                     {"rerank_score", c.rerank_score}});
    *json = dup(arr.dump());
  });
}

void pk_linker_free(pk_linker* linker) { delete linker; }

pk_status pk_hierarchy_build(const pk_corpus* corpus, const char* predictions, pk_hierarchy** out) {
  return guard([&] {
    require(corpus, "corpus");
    require(out, "out");
    const Predictions p = predictions ? parse_predictions(predictions) : Predictions{};
    *out = new pk_hierarchy{corpus, build_hierarchy(corpus->corpus, p)};
  });
}

pk_status pk_hierarchy_export(const pk_hierarchy* hierarchy, const char* format, char** out) {
  return guard([&] {
    require(hierarchy, "hierarchy");
    require(format, "format");
    require(out, "out");
    const std::string f = format;
    if (f == "edges") *out = dup(hierarchy_edge_list(hierarchy->graph));
    else if (f == "json") *out = dup(hierarchy_to_json(hierarchy->graph));
    else throw Error(ErrorCode::kUsage, "format must be 'edges' or 'json'");
  });
}

pk_status pk_hierarchy_tree(const pk_hierarchy* hierarchy, const char* article_id, size_t depth, char** json) {
  return guard([&] {
    require(hierarchy, "hierarchy");
    require(article_id, "article_id");
    require(json, "json");
    *json = dup(hierarchy_tree_json(hierarchy->graph, hierarchy->corpus->corpus, article_id, depth));
  });
}

int pk_hierarchy_is_acyclic(const pk_hierarchy* hierarchy) {
  if (!hierarchy) return 0;
  return topological_order(hierarchy->graph).has_value() ? 1 : 0;
}

void pk_hierarchy_free(pk_hierarchy* hierarchy) { delete hierarchy; }

pk_status pk_eval_edits(const char* predicted_path, const char* reference_path, char** report) {
  return guard([&] {
    require(predicted_path, "predicted_path");
    require(reference_path, "reference_path");
    require(report, "report");
    auto load = [](const char* p) {
      try {
        return load_edit_records(p);
      } catch (const Error& e) {
        throw Error(e.code(), std::string(p) + ": " + e.what(), e.line());
      }
    };
    const auto predicted = load(predicted_path);
    const auto reference = load(reference_path);
    *report = dup(edit_report_text(evaluate_edits(predicted, reference)));
  });
}

pk_status pk_state_validate(const char* path, char** json) {
  return guard([&] {
    require(path, "path");
    require(json, "json");
    Json j;
    if (is_grid_path(path)) {
      const auto grid = load_grid(path);
      const auto v = validate_grid(grid);
      j = {{"kind", "grid"},
           {"valid", v.empty()},
           {"entities", grid.entities.size()},
           {"steps", grid.steps.size()},
           {"violations", violations_json(v)}};
      if (v.empty()) j["events"] = grid_events(grid).size();
    } else {
      const auto tl = load_timeline(path);
      const auto v = validate_timeline(tl);
      j = {{"kind", "timeline"}, {"valid", v.empty()}, {"changes", tl.size()}, {"violations", violations_json(v)}};
    }
    *json = dup(j.dump());
  });
}

pk_status pk_state_query(const char* path, const char* entity, const char* attribute, size_t at, char** json) {
  return guard([&] {
    require(path, "path");
    require(entity, "entity");
    require(attribute, "attribute");
    require(json, "json");
    const StateAnswer a = is_grid_path(path) ? query_state(load_grid(path), entity, attribute, at)
                                             : query_state(load_timeline(path), entity, attribute, at);
    *json = dup(state_answer_to_json(a));
  });
}

pk_status pk_service_create(const char* config_path, const char* overrides, pk_service** out) {
  return guard([&] {
    require(config_path, "config_path");
    require(out, "out");
    ServiceConfig cfg = load_service_config(config_path);
    apply_env_overrides(cfg);
    Options o(overrides);
    cfg.host = o.str("host", cfg.host);
    if (o.has("port")) {
      const std::size_t port = o.count("port", 0);
      if (port > 65535) throw Error(ErrorCode::kConfig, "port " + std::to_string(port) + " is out of range");
      cfg.port = static_cast<int>(port);
    }
    cfg.threads = o.count("threads", cfg.threads);
    o.finish();
    auto data = load_service_data(cfg);
    *out = new pk_service{std::make_unique<Service>(std::move(data), cfg)};
  });
}

pk_status pk_service_start(pk_service* service, int* port) {
  return guard([&] {
    require(service, "service");
    const int p = service->service->start();
    if (port) *port = p;
  });
}

pk_status pk_service_run(pk_service* service) {
  return guard([&] {
    require(service, "service");
    service->service->run();
  });
}

void pk_service_stop(pk_service* service) {
  if (service) service->service->stop();
}

pk_status pk_service_handle(pk_service* service, const char* method, const char* target, const char* body,
                            int* http_status, char** response) {
  return guard([&] {
    require(service, "service");
    require(method, "method");
    require(target, "target");
    require(response, "response");
    const HttpResponse r = service->service->handle(make_request(method, target, body ? body : ""));
    *response = dup(r.body);
    if (http_status) *http_status = r.status;
  });
}

void pk_service_free(pk_service* service) { delete service; }

}  // extern "C"
