// prockit command line: thin wrapper over the C API.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prockit/prockit.h"

namespace {

using Json = nlohmann::json;

struct Failure {
  pk_status status;
  std::string message;
  std::size_t line = 0;
};

int exit_code(pk_status s) { return s == PK_ERR_USAGE || s == PK_ERR_CONFIG ? 2 : 1; }

void check(pk_status s) {
  if (s != PK_OK) throw Failure{s, pk_last_error(), pk_last_error_line()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  pk_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  out.close();
  if (!out) throw Failure{PK_ERR_IO, "cannot write " + path};
}

void emit(const std::optional<std::string>& path, const std::string& data) {
  if (path) write_file(*path, data);
  else std::cout << data << (data.empty() || data.back() == '\n' ? "" : "\n");
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
};

using Corpus = Handle<pk_corpus, pk_corpus_free>;
using Index = Handle<pk_index, pk_index_free>;
using Linker = Handle<pk_linker, pk_linker_free>;
using Hierarchy = Handle<pk_hierarchy, pk_hierarchy_free>;
using ServiceHandle = Handle<pk_service, pk_service_free>;

std::string dump(const Json& j) { return j.dump(); }

// ---- commands

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string format = "auto";
  bool keep_going = false;
  std::optional<std::string> report;
};

void run_ingest(const IngestArgs& a) {
  std::vector<const char*> paths;
  for (const auto& s : a.inputs) paths.push_back(s.c_str());
  Corpus c;
  char* report = nullptr;
  check(pk_corpus_ingest(paths.data(), paths.size(),
                         dump({{"format", a.format}, {"keep_going", a.keep_going}}).c_str(), c.out(), &report));
  const std::string text = take(report);
  check(pk_corpus_save(c.p, a.out.c_str()));
  if (a.report) write_file(*a.report, text);
  else std::cerr << text;
}

struct IndexArgs {
  std::string corpus;
  std::string out;
  std::string embedder = "hashed";
  std::size_t dim = 512;
  std::uint64_t seed = 0;
  std::optional<std::string> vectors;
  std::vector<std::string> fields = {"headline", "goal"};
  double k1 = 1.2;
  double b = 0.75;
};

void run_index(const IndexArgs& a) {
  Corpus c;
  check(pk_corpus_load(a.corpus.c_str(), c.out()));
  Json o = {{"embedder", a.embedder}, {"fields", a.fields}, {"k1", a.k1}, {"b", a.b}};
  if (a.embedder == "hashed") {
    o["dim"] = a.dim;
    o["seed"] = a.seed;
  }
  if (a.vectors) o["vectors"] = *a.vectors;
  Index idx;
  check(pk_index_build(c.p, dump(o).c_str(), idx.out()));
  check(pk_index_save(idx.p, a.out.c_str()));
}

struct GenArgs {
  std::string corpus;
  std::string task;
  std::string out;
  std::optional<std::string> audit;
  std::optional<std::string> index;
  std::uint64_t seed = 0;
  std::string method = "bm25";
  double max_overlap = 0.5;
  std::size_t per_article = 1;
  bool no_debias = false;
  bool emphasize = false;
  bool flip = false;
};

void run_gen(const GenArgs& a) {
  Corpus c;
  check(pk_corpus_load(a.corpus.c_str(), c.out()));
  Index idx;
  if (a.index) check(pk_index_load(a.index->c_str(), idx.out()));
  Json o = {{"task", a.task}, {"seed", a.seed}};
  if (a.task == "order") {
    o["flip"] = a.flip;
  } else {
    if (a.flip) throw Failure{PK_ERR_USAGE, "--flip only applies to --task order"};
    o["method"] = a.method;
    o["max_overlap"] = a.max_overlap;
    o["per_article"] = a.per_article;
    o["debias"] = !a.no_debias;
    o["emphasize"] = a.emphasize;
  }
  char* data = nullptr;
  char* audit = nullptr;
  check(pk_generate(c.p, idx.p, dump(o).c_str(), &data, &audit));
  const std::string d = take(data);
  const std::string r = take(audit);
  write_file(a.out, d);
  write_file(a.audit.value_or(a.out + ".audit.txt"), r);
}

struct SuggestArgs {
  std::string corpus;
  std::string index;
  std::string goal;
  std::size_t k = 20;
  std::optional<std::size_t> clusters;
  std::uint64_t seed = 0;
  std::size_t n_init = 10;
  std::string ordering = "prior";
  std::optional<std::string> score_file;
  std::string format = "json";
  std::optional<std::string> out;
};

void run_suggest(const SuggestArgs& a) {
  Corpus c;
  check(pk_corpus_load(a.corpus.c_str(), c.out()));
  Index idx;
  check(pk_index_load(a.index.c_str(), idx.out()));
  Json o = {{"k", a.k}, {"seed", a.seed}, {"n_init", a.n_init}, {"ordering", a.ordering}, {"format", a.format}};
  if (a.clusters) o["n_clusters"] = *a.clusters;
  if (a.score_file) o["score_file"] = *a.score_file;
  char* out = nullptr;
  check(pk_suggest(c.p, idx.p, a.goal.c_str(), dump(o).c_str(), &out));
  emit(a.out, take(out));
}

struct LinkArgs {
  std::string corpus;
  std::string index;
  std::string out;
  std::optional<std::string> model;
  std::optional<std::string> save_model;
  std::optional<std::string> report;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  std::size_t k_retrieve = 20;
  std::size_t threads = 0;
};

// Loads the model, or trains one on the train split; corpora without
// hyperlinks keep the built-in weights.
std::string prepare_linker(pk_linker* linker, const std::optional<std::string>& model, std::uint64_t seed,
                           double test_fraction) {
  if (model) {
    check(pk_linker_load_model(linker, model->c_str()));
    return dump({{"model", *model}});
  }
  char* report = nullptr;
  const pk_status s =
      pk_linker_train(linker, dump({{"seed", seed}, {"test_fraction", test_fraction}}).c_str(), &report);
  if (s == PK_ERR_NO_HYPERLINKS) return dump({{"trained", false}, {"reason", pk_last_error()}});
  check(s);
  Json r = Json::parse(take(report));
  r["trained"] = true;
  return r.dump();
}

void run_link(const LinkArgs& a) {
  Corpus c;
  check(pk_corpus_load(a.corpus.c_str(), c.out()));
  Index idx;
  check(pk_index_load(a.index.c_str(), idx.out()));
  Linker l;
  check(pk_linker_create(c.p, idx.p, dump({{"k_retrieve", a.k_retrieve}}).c_str(), l.out()));
  const std::string report = prepare_linker(l.p, a.model, a.seed, a.test_fraction);
  if (a.save_model) check(pk_linker_save_model(l.p, a.save_model->c_str()));
  char* preds = nullptr;
  check(pk_linker_predict(l.p, a.threads, &preds));
  write_file(a.out, take(preds));
  if (a.report) write_file(*a.report, report + "\n");
}

struct HierarchyArgs {
  std::string corpus;
  std::optional<std::string> links;
  std::string out;
  std::optional<std::string> json;
  std::optional<std::string> tree;
  std::size_t depth = 1;
};

void run_hierarchy(const HierarchyArgs& a) {
  Corpus c;
  check(pk_corpus_load(a.corpus.c_str(), c.out()));
  std::string preds;
  if (a.links) {
    std::ifstream in(*a.links, std::ios::binary);
    if (!in) throw Failure{PK_ERR_IO, "cannot read " + *a.links};
    std::ostringstream ss;
    ss << in.rdbuf();
    preds = ss.str();
  }
  Hierarchy h;
  check(pk_hierarchy_build(c.p, a.links ? preds.c_str() : nullptr, h.out()));
  if (!pk_hierarchy_is_acyclic(h.p)) throw Failure{PK_ERR_INTERNAL, "hierarchy has a cycle"};
  char* edges = nullptr;
  check(pk_hierarchy_export(h.p, "edges", &edges));
  write_file(a.out, take(edges));
  if (a.json) {
    char* j = nullptr;
    check(pk_hierarchy_export(h.p, "json", &j));
    write_file(*a.json, take(j) + "\n");
  }
  if (a.tree) {
    char* t = nullptr;
    check(pk_hierarchy_tree(h.p, a.tree->c_str(), a.depth, &t));
    std::cout << take(t) << "\n";
  }
}

struct EvalArgs {
  std::string task;
  std::optional<std::string> predicted;
  std::optional<std::string> reference;
  std::optional<std::string> corpus;
  std::optional<std::string> index;
  std::optional<std::string> model;
  std::optional<std::string> file;
  std::optional<std::string> entity;
  std::string attribute = "location";
  std::optional<std::size_t> at;
  std::string split = "test";
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  std::size_t k_retrieve = 20;
  std::optional<std::string> out;
};

template <typename T>
const T& need(const std::optional<T>& v, const char* flag, const std::string& task) {
  if (!v) throw Failure{PK_ERR_USAGE, std::string(flag) + " is required for --task " + task};
  return *v;
}

void run_eval(const EvalArgs& a) {
  if (a.task == "edit") {
    char* r = nullptr;
    check(pk_eval_edits(need(a.predicted, "--predicted", a.task).c_str(),
                        need(a.reference, "--reference", a.task).c_str(), &r));
    emit(a.out, take(r));
  } else if (a.task == "link") {
    Corpus c;
    check(pk_corpus_load(need(a.corpus, "--corpus", a.task).c_str(), c.out()));
    Index idx;
    check(pk_index_load(need(a.index, "--index", a.task).c_str(), idx.out()));
    Linker l;
    check(pk_linker_create(c.p, idx.p, dump({{"k_retrieve", a.k_retrieve}}).c_str(), l.out()));
    const Json training = Json::parse(prepare_linker(l.p, a.model, a.seed, a.test_fraction));
    char* m = nullptr;
    check(pk_linker_evaluate(
        l.p, dump({{"seed", a.seed}, {"test_fraction", a.test_fraction}, {"split", a.split}}).c_str(), &m));
    Json metrics = Json::parse(take(m));
    metrics["training"] = training;
    emit(a.out, metrics.dump(2) + "\n");
  } else {
    const std::string& file = need(a.file, "--file", a.task);
    if (a.entity) {
      char* r = nullptr;
      check(pk_state_query(file.c_str(), a.entity->c_str(), a.attribute.c_str(), need(a.at, "--at", a.task),
                           &r));
      emit(a.out, take(r));
      return;
    }
    char* r = nullptr;
    check(pk_state_validate(file.c_str(), &r));
    const std::string text = take(r);
    emit(a.out, text);
    const Json j = Json::parse(text);
    if (!j.at("valid").get<bool>())
      throw Failure{j.at("kind") == "grid" ? PK_ERR_INVALID_GRID : PK_ERR_VALIDATION,
                    file + ": " + std::to_string(j.at("violations").size()) + " violation(s)"};
  }
}

struct ServeArgs {
  std::string config;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::size_t> threads;
};

void run_serve(const ServeArgs& a) {
  Json o = Json::object();
  if (a.host) o["host"] = *a.host;
  if (a.port) {
    if (*a.port < 0 || *a.port > 65535) throw Failure{PK_ERR_USAGE, "--port must be in [0, 65535]"};
    o["port"] = *a.port;
  }
  if (a.threads) o["threads"] = *a.threads;

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  ServiceHandle s;
  check(pk_service_create(a.config.c_str(), dump(o).c_str(), s.out()));
  int port = 0;
  check(pk_service_start(s.p, &port));
  std::cerr << "listening on port " << port << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  pk_service_stop(s.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural knowledge toolkit", "prockit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pk_version());

  IngestArgs ingest;
  auto* ci = app.add_subcommand("ingest", "Parse markup and record files into a corpus");
  ci->add_option("inputs", ingest.inputs, "Files or directories")->required();
  ci->add_option("-o,--out", ingest.out, "Corpus JSON Lines output")->required();
  ci->add_option("--format", ingest.format, "Input format")->check(CLI::IsMember({"auto", "html", "record"}));
  ci->add_flag("--keep-going", ingest.keep_going, "Skip bad inputs and list them in the report");
  ci->add_option("--report", ingest.report, "Ingest report path (default: stderr)");

  IndexArgs index;
  auto* cx = app.add_subcommand("index", "Build the search index and step vectors");
  cx->add_option("--corpus", index.corpus)->required();
  cx->add_option("-o,--out", index.out, "Index directory")->required();
  cx->add_option("--embedder", index.embedder)->check(CLI::IsMember({"hashed", "tfidf", "external"}));
  cx->add_option("--dim", index.dim, "Hashed embedder dimension");
  cx->add_option("--embedding-seed", index.seed, "Hashed embedder seed");
  cx->add_option("--vectors", index.vectors, "Vector file for the external embedder");
  cx->add_option("--fields", index.fields, "Step fields embedded for suggestion")->delimiter(',');
  cx->add_option("--k1", index.k1);
  cx->add_option("--b", index.b);

  GenArgs gen;
  auto* cg = app.add_subcommand("gen", "Generate a benchmark dataset");
  cg->add_option("--corpus", gen.corpus)->required();
  cg->add_option("--task", gen.task)->required()->check(CLI::IsMember({"step", "goal", "order"}));
  cg->add_option("-o,--out", gen.out, "Dataset JSON Lines output")->required();
  cg->add_option("--audit", gen.audit, "Audit report path (default: <out>.audit.txt)");
  cg->add_option("--index", gen.index, "Index directory (embedder for --method embedding)");
  cg->add_option("--seed", gen.seed);
  cg->add_option("--method", gen.method)->check(CLI::IsMember({"bm25", "embedding"}));
  cg->add_option("--max-overlap", gen.max_overlap)->check(CLI::Range(0.0, 1.0));
  cg->add_option("--per-article", gen.per_article);
  cg->add_flag("--no-debias", gen.no_debias, "Keep the original answers");
  cg->add_flag("--emphasize", gen.emphasize, "Up-weight verb and object in distractor search");
  cg->add_flag("--flip", gen.flip, "Add the swapped pair of every ordering example");

  SuggestArgs suggest;
  auto* cs = app.add_subcommand("suggest", "Suggest an ordered step sequence for a goal");
  cs->add_option("--corpus", suggest.corpus)->required();
  cs->add_option("--index", suggest.index)->required();
  cs->add_option("--goal", suggest.goal)->required();
  cs->add_option("-k,--k", suggest.k, "Candidates kept before clustering");
  cs->add_option("--clusters", suggest.clusters);
  cs->add_option("--seed", suggest.seed);
  cs->add_option("--n-init", suggest.n_init);
  cs->add_option("--ordering", suggest.ordering)->check(CLI::IsMember({"prior", "oracle"}));
  cs->add_option("--score-file", suggest.score_file, "External relatedness scores");
  cs->add_option("--format", suggest.format)->check(CLI::IsMember({"json", "text"}));
  cs->add_option("-o,--out", suggest.out);

  LinkArgs link;
  auto* cl = app.add_subcommand("link", "Predict step-to-article links");
  cl->add_option("--corpus", link.corpus)->required();
  cl->add_option("--index", link.index)->required();
  cl->add_option("-o,--out", link.out, "Predictions output")->required();
  cl->add_option("--model", link.model, "Reranker model to use instead of training");
  cl->add_option("--save-model", link.save_model);
  cl->add_option("--report", link.report, "Training report (JSON)");
  cl->add_option("--seed", link.seed);
  cl->add_option("--test-fraction", link.test_fraction)->check(CLI::Range(0.0, 1.0));
  cl->add_option("--k-retrieve", link.k_retrieve);
  cl->add_option("--threads", link.threads, "0 = all cores");

  HierarchyArgs hier;
  auto* ch = app.add_subcommand("hierarchy", "Build and export the procedural hierarchy");
  ch->add_option("--corpus", hier.corpus)->required();
  ch->add_option("--links", hier.links, "Predictions from `link`");
  ch->add_option("-o,--out", hier.out, "Edge list output")->required();
  ch->add_option("--json", hier.json, "Whole-graph JSON output");
  ch->add_option("--tree", hier.tree, "Print the tree under this article");
  ch->add_option("--depth", hier.depth);

  EvalArgs eval;
  auto* ce = app.add_subcommand("eval", "Evaluate edits, links or state annotations");
  ce->add_option("--task", eval.task)->required()->check(CLI::IsMember({"edit", "link", "state"}));
  ce->add_option("--predicted", eval.predicted);
  ce->add_option("--reference", eval.reference);
  ce->add_option("--corpus", eval.corpus);
  ce->add_option("--index", eval.index);
  ce->add_option("--model", eval.model);
  ce->add_option("--split", eval.split)->check(CLI::IsMember({"test", "all"}));
  ce->add_option("--seed", eval.seed);
  ce->add_option("--test-fraction", eval.test_fraction)->check(CLI::Range(0.0, 1.0));
  ce->add_option("--k-retrieve", eval.k_retrieve);
  ce->add_option("--file", eval.file, "Grid (.tsv) or timeline (.jsonl)");
  ce->add_option("--entity", eval.entity);
  ce->add_option("--attribute", eval.attribute);
  ce->add_option("--at", eval.at, "State index");
  ce->add_option("-o,--out", eval.out);

  ServeArgs serve;
  auto* cv = app.add_subcommand("serve", "Run the HTTP service");
  cv->add_option("--config", serve.config)->required();
  cv->add_option("--host", serve.host);
  cv->add_option("--port", serve.port);
  cv->add_option("--threads", serve.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch2 : msg)
      if (ch2 == '\n') ch2 = ' ';
    std::cerr << "error: code=usage message=" << msg << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::string help = sub->help();
    if (sub != &app) {
      const std::string plain = "Usage: " + sub->get_name();
      if (const auto at = help.find(plain); at != std::string::npos)
        help.replace(at, plain.size(), "Usage: prockit " + sub->get_name());
    }
    std::cerr << help;
    return 2;
  }

  try {
    if (ci->parsed()) run_ingest(ingest);
    else if (cx->parsed()) run_index(index);
    else if (cg->parsed()) run_gen(gen);
    else if (cs->parsed()) run_suggest(suggest);
    else if (cl->parsed()) run_link(link);
    else if (ch->parsed()) run_hierarchy(hier);
    else if (ce->parsed()) run_eval(eval);
    else if (cv->parsed()) run_serve(serve);
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (auto& c : msg)
      if (c == '\n' || c == '\r') c = ' ';
    std::cerr << "error: code=" << pk_status_name(f.status);
    if (f.line) std::cerr << " line=" << f.line;
    std::cerr << " message=" << msg << "\n";
    return exit_code(f.status);
  }
  return 0;
}
