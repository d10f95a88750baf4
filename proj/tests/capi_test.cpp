#include "prockit/prockit.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kData = PROCKIT_TEST_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("prockit_capi_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// takes ownership of a returned string
std::string take(char* s) {
  std::string out = s ? s : "";
  pk_free(s);
  return out;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct Loaded {
  pk_corpus* corpus = nullptr;
  pk_index* index = nullptr;
  Loaded(const fs::path& path, const char* index_options = R"({"dim": 256})") {
    EXPECT_EQ(pk_corpus_load(path.c_str(), &corpus), PK_OK) << pk_last_error();
    EXPECT_EQ(pk_index_build(corpus, index_options, &index), PK_OK) << pk_last_error();
  }
  ~Loaded() {
    pk_index_free(index);
    pk_corpus_free(corpus);
  }
};

}  // namespace

TEST(CApi, StatusNamesAndErrors) {
  EXPECT_STREQ(pk_status_name(PK_OK), "ok");
  EXPECT_STREQ(pk_status_name(PK_ERR_IO), "io");
  EXPECT_STREQ(pk_status_name(PK_ERR_INVALID_GRID), "invalid_grid");
  EXPECT_STREQ(pk_status_name(PK_ERR_INTERNAL), "internal");
  EXPECT_STREQ(pk_status_name(static_cast<pk_status>(77)), "unknown");
  EXPECT_STREQ(pk_version(), "0.1.0");

  pk_corpus* c = nullptr;
  EXPECT_EQ(pk_corpus_load(nullptr, &c), PK_ERR_USAGE);
  EXPECT_EQ(pk_corpus_load("/no/such/corpus.jsonl", &c), PK_ERR_IO);
  EXPECT_NE(std::string(pk_last_error()).find("/no/such/corpus.jsonl"), std::string::npos);
  EXPECT_EQ(c, nullptr);

  TempDir d;
  write(d.path / "bad.jsonl", "{\"title\": \"Fold a Shirt\", \"steps\": [\"Fold it.\"]}\n{\"title\": 5}\n");
  EXPECT_EQ(pk_corpus_load((d.path / "bad.jsonl").c_str(), &c), PK_ERR_VALIDATION);
  EXPECT_EQ(pk_last_error_line(), 2u);

  // success clears the error
  ASSERT_EQ(pk_corpus_load((kData / "navigator.jsonl").c_str(), &c), PK_OK);
  EXPECT_STREQ(pk_last_error(), "");
  EXPECT_EQ(pk_last_error_line(), 0u);
  pk_index* idx = nullptr;
  EXPECT_EQ(pk_index_build(c, R"({"dimension": 3})", &idx), PK_ERR_CONFIG);
  EXPECT_NE(std::string(pk_last_error()).find("dimension"), std::string::npos);
  EXPECT_EQ(pk_index_build(c, "[1, 2]", &idx), PK_ERR_CONFIG);
  EXPECT_EQ(pk_index_build(c, R"({"embedder": "glove"})", &idx), PK_ERR_CONFIG);
  EXPECT_EQ(idx, nullptr);
  pk_corpus_free(c);
  pk_corpus_free(nullptr);
}

TEST(CApi, IngestIndexAndSearch) {
  TempDir d;
  fs::copy_file(kData / "navigator.jsonl", d.path / "a.jsonl");
  fs::copy_file(kData / "make-a-youtube-video.html", d.path / "b.html");
  const std::string dir = d.path.string();
  const char* inputs[] = {dir.c_str()};
  pk_corpus* c = nullptr;
  char* report = nullptr;
  ASSERT_EQ(pk_corpus_ingest(inputs, 1, R"({"format": "auto"})", &c, &report), PK_OK) << pk_last_error();
  EXPECT_NE(take(report).find("articles\t7"), std::string::npos);
  EXPECT_EQ(pk_corpus_size(c), 7u);
  ASSERT_EQ(pk_corpus_save(c, (d.path / "corpus.jsonl").c_str()), PK_OK);

  pk_index* idx = nullptr;
  ASSERT_EQ(pk_index_build(c, R"({"embedder": "tfidf", "fields": ["headline"]})", &idx), PK_OK)
      << pk_last_error();
  ASSERT_EQ(pk_index_save(idx, (d.path / "idx").c_str()), PK_OK) << pk_last_error();
  pk_index* loaded = nullptr;
  ASSERT_EQ(pk_index_load((d.path / "idx").c_str(), &loaded), PK_OK) << pk_last_error();
  char* a = nullptr;
  char* b = nullptr;
  ASSERT_EQ(pk_search(idx, "trim clips timeline", 3, &a), PK_OK);
  ASSERT_EQ(pk_search(loaded, "trim clips timeline", 3, &b), PK_OK);
  const std::string sa = take(a);
  EXPECT_EQ(sa, take(b));
  EXPECT_EQ(Json::parse(sa)[0].at("id"), "trim-video-clips");
  EXPECT_EQ(pk_search(idx, "...", 3, &a), PK_ERR_EMPTY_QUERY);
  pk_index_free(loaded);
  pk_index_free(idx);
  pk_corpus_free(c);
}

TEST(CApi, GenerateIsDeterministicAndBalanced) {
  Loaded l(kData / "first_aid.jsonl");
  char* d1 = nullptr;
  char* a1 = nullptr;
  char* d2 = nullptr;
  ASSERT_EQ(pk_generate(l.corpus, nullptr, R"({"task": "order", "flip": true, "seed": 4})", &d1, &a1), PK_OK)
      << pk_last_error();
  ASSERT_EQ(pk_generate(l.corpus, nullptr, R"({"task": "order", "flip": true, "seed": 4})", &d2, nullptr),
            PK_OK);
  const std::string data = take(d1);
  EXPECT_EQ(data, take(d2));
  std::size_t a_first = 0;
  std::size_t lines = 0;
  std::istringstream in(data);
  for (std::string line; std::getline(in, line); ++lines)
    a_first += Json::parse(line).at("label") == "a-first";
  EXPECT_GT(lines, 0u);
  EXPECT_EQ(2 * a_first, lines);
  EXPECT_NE(take(a1).find("a_first\t" + std::to_string(a_first)), std::string::npos);

  ASSERT_EQ(pk_generate(l.corpus, l.index, R"({"task": "step", "method": "embedding", "seed": 1})", &d1, &a1),
            PK_OK)
      << pk_last_error();
  EXPECT_FALSE(take(d1).empty());
  EXPECT_NE(take(a1).find("chi"), std::string::npos);
  EXPECT_EQ(pk_generate(l.corpus, nullptr, R"({"task": "step", "flip": true})", &d1, &a1), PK_ERR_CONFIG);
  EXPECT_EQ(pk_generate(l.corpus, nullptr, R"({"task": "stories"})", &d1, &a1), PK_ERR_CONFIG);
}

TEST(CApi, SuggestLinkAndHierarchy) {
  Loaded l(kData / "navigator.jsonl");
  char* out = nullptr;
  ASSERT_EQ(pk_suggest(l.corpus, l.index, "Edit a Video", R"({"k": 6, "seed": 2})", &out), PK_OK)
      << pk_last_error();
  const Json s = Json::parse(take(out));
  EXPECT_EQ(s.at("goal"), "Edit a Video");
  EXPECT_EQ(s.at("candidates").size(), 6u);
  ASSERT_EQ(pk_suggest(l.corpus, l.index, "Edit a Video", R"({"k": 6, "format": "text"})", &out), PK_OK);
  EXPECT_FALSE(take(out).empty());
  EXPECT_EQ(pk_suggest(l.corpus, l.index, "Edit a Video", R"({"k": 2, "n_clusters": 3})", &out),
            PK_ERR_CONFIG);

  pk_linker* linker = nullptr;
  ASSERT_EQ(pk_linker_create(l.corpus, l.index, R"({"k_retrieve": 5})", &linker), PK_OK) << pk_last_error();
  char* cands = nullptr;
  ASSERT_EQ(pk_linker_candidates(linker, "make-a-movie#0#1", &cands), PK_OK);
  const Json cj = Json::parse(take(cands));
  EXPECT_EQ(cj.size(), 5u);
  for (const auto& c : cj) EXPECT_NE(c.at("article_id"), "make-a-movie");
  EXPECT_EQ(pk_linker_candidates(linker, "nope#0#0", &cands), PK_ERR_NOT_FOUND);

  char* preds = nullptr;
  ASSERT_EQ(pk_linker_predict(linker, 2, &preds), PK_OK);
  const std::string p = take(preds);
  std::size_t lines = 0;
  for (char ch : p) lines += ch == '\n';
  EXPECT_EQ(lines, 18u - 3u);  // every step without a hyperlink

  TempDir d;
  const auto model = (d.path / "reranker.model").string();
  ASSERT_EQ(pk_linker_save_model(linker, model.c_str()), PK_OK);
  ASSERT_EQ(pk_linker_load_model(linker, model.c_str()), PK_OK);
  write(d.path / "broken.model", "PROCKIT-RERANK 1\nnonsense\n");
  EXPECT_NE(pk_linker_load_model(linker, (d.path / "broken.model").c_str()), PK_OK);
  EXPECT_NE(std::string(pk_last_error()).find("broken.model"), std::string::npos);

  char* metrics = nullptr;
  ASSERT_EQ(pk_linker_evaluate(linker, R"({"split": "all"})", &metrics), PK_OK) << pk_last_error();
  const Json m = Json::parse(take(metrics));
  EXPECT_EQ(m.at("pairs"), 3);
  EXPECT_EQ(m.at("split"), "all");

  pk_hierarchy* h = nullptr;
  ASSERT_EQ(pk_hierarchy_build(l.corpus, p.c_str(), &h), PK_OK) << pk_last_error();
  EXPECT_EQ(pk_hierarchy_is_acyclic(h), 1);
  char* edges = nullptr;
  ASSERT_EQ(pk_hierarchy_export(h, "edges", &edges), PK_OK);
  EXPECT_NE(take(edges).find("make-a-movie#0#0\twrite-a-script\tcorpus-hyperlink\t-"), std::string::npos);
  char* tree = nullptr;
  ASSERT_EQ(pk_hierarchy_tree(h, "make-a-movie", 2, &tree), PK_OK);
  EXPECT_EQ(Json::parse(take(tree)).at("article_id"), "make-a-movie");
  EXPECT_EQ(pk_hierarchy_export(h, "dot", &edges), PK_ERR_USAGE);
  pk_hierarchy_free(h);
  pk_linker_free(linker);
}

TEST(CApi, StateAndEdits) {
  char* out = nullptr;
  const auto grid = (kData / "photosynthesis.tsv").string();
  ASSERT_EQ(pk_state_validate(grid.c_str(), &out), PK_OK) << pk_last_error();
  const Json v = Json::parse(take(out));
  EXPECT_EQ(v.at("kind"), "grid");
  EXPECT_TRUE(v.at("valid"));
  ASSERT_EQ(pk_state_query(grid.c_str(), "water", "location", 0, &out), PK_OK);
  EXPECT_EQ(Json::parse(take(out)).at("value"), "soil");
  EXPECT_EQ(pk_state_query(grid.c_str(), "oxygen", "location", 0, &out), PK_ERR_UNKNOWN_ENTITY);

  TempDir d;
  write(d.path / "broken.tsv", "#\twater\tlight\n(before)\tsoil\n");
  ASSERT_EQ(pk_state_validate((d.path / "broken.tsv").c_str(), &out), PK_OK);
  const Json b = Json::parse(take(out));
  EXPECT_FALSE(b.at("valid"));
  EXPECT_EQ(b.at("violations")[0].at("kind"), "dimension");

  write(d.path / "ref.jsonl", R"({"id": "g", "steps": ["a", "b", "c"]})" "\n");
  write(d.path / "pred.jsonl", R"({"id": "g", "steps": ["b", "a", "c", "d"]})" "\n");
  ASSERT_EQ(pk_eval_edits((d.path / "pred.jsonl").c_str(), (d.path / "ref.jsonl").c_str(), &out), PK_OK)
      << pk_last_error();
  EXPECT_FALSE(take(out).empty());
}

TEST(CApi, ServiceInProcess) {
  TempDir d;
  fs::copy_file(kData / "navigator.jsonl", d.path / "corpus.jsonl");
  pk_corpus* c = nullptr;
  ASSERT_EQ(pk_corpus_load((d.path / "corpus.jsonl").c_str(), &c), PK_OK);
  pk_index* idx = nullptr;
  ASSERT_EQ(pk_index_build(c, nullptr, &idx), PK_OK);
  ASSERT_EQ(pk_index_save(idx, (d.path / "idx").c_str()), PK_OK);
  pk_index_free(idx);
  pk_corpus_free(c);
  write(d.path / "service.json", R"({"corpus": "corpus.jsonl", "index_dir": "idx"})");

  pk_service* svc = nullptr;
  EXPECT_EQ(pk_service_create((d.path / "service.json").c_str(), R"({"port": 99999})", &svc), PK_ERR_CONFIG);
  ASSERT_EQ(pk_service_create((d.path / "service.json").c_str(), R"({"port": 0})", &svc), PK_OK)
      << pk_last_error();
  int status = 0;
  char* body = nullptr;
  ASSERT_EQ(pk_service_handle(svc, "GET", "/v1/search?q=drag%20the%20clip%20edges&k=1", nullptr, &status, &body), PK_OK);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(Json::parse(take(body)).at("results")[0].at("article_id"), "trim-video-clips");
  ASSERT_EQ(pk_service_handle(svc, "GET", "/v1/steps/make-a-movie%230%230/link", nullptr, &status, &body),
            PK_OK);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(Json::parse(take(body)).at("provenance"), "corpus-hyperlink");
  ASSERT_EQ(pk_service_handle(svc, "POST", "/v1/sessions", R"({"article_id": "nope"})", &status, &body),
            PK_OK);
  EXPECT_EQ(status, 404);
  EXPECT_EQ(Json::parse(take(body)).at("code"), "not_found");

  int port = 0;
  ASSERT_EQ(pk_service_start(svc, &port), PK_OK) << pk_last_error();
  EXPECT_GT(port, 0);
  pk_service_stop(svc);
  pk_service_free(svc);
}
