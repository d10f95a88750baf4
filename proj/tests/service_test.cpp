#include "prockit/service.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "httplib.h"
#include "json_io.hpp"
#include "prockit/error.hpp"

using namespace prockit;
namespace fs = std::filesystem;

namespace {

const fs::path kData = PROCKIT_TEST_DATA;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("prockit_service_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Embedder test_embedder() { return Embedder::hashed_char_ngram(256, 3); }

// corpus, index, predictions and a states directory under one root
struct Fixture {
  TempDir dir;
  ServiceConfig config;

  Fixture() {
    const auto root = dir.path();
    fs::copy_file(kData / "navigator.jsonl", root / "corpus.jsonl");
    fs::copy_file(kData / "navigator_links.tsv", root / "links.tsv");
    fs::create_directories(root / "states");
    fs::copy_file(kData / "photosynthesis.tsv", root / "states" / "photosynthesis.tsv");
    fs::copy_file(kData / "dough.jsonl", root / "states" / "dough.jsonl");
    const auto corpus = load_corpus(root / "corpus.jsonl");
    save_index_bundle(build_index_bundle(corpus, test_embedder(), {"headline", "goal"}), root / "index");
    persist::write_file(root / "service.json", R"({
      "corpus": "corpus.jsonl",
      "index_dir": "index",
      "predictions": "links.tsv",
      "states_dir": "states",
      "port": 0,
      "seed": 7,
      "link_threshold": 0.5,
      "suggestion": {"k": 6, "n_init": 4}
    })");
    config = load_service_config(root / "service.json");
  }

  std::unique_ptr<Service> service() const {
    return std::make_unique<Service>(load_service_data(config), config);
  }
};

HttpRequest get(std::string path, std::map<std::string, std::string> query = {}) {
  HttpRequest r;
  r.method = "GET";
  r.path = std::move(path);
  r.query = std::move(query);
  return r;
}

HttpRequest post(std::string path, std::string body = {}) {
  HttpRequest r;
  r.method = "POST";
  r.path = std::move(path);
  r.body = std::move(body);
  return r;
}

Json body(const HttpResponse& r) { return Json::parse(r.body); }

void expect_error(const HttpResponse& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body;
  const Json j = body(r);
  EXPECT_EQ(j.at("code"), code) << r.body;
  EXPECT_TRUE(j.at("message").is_string());
  EXPECT_TRUE(j.contains("detail"));
}

}  // namespace

TEST(ServiceConfig, ParsesAndResolvesRelativePaths) {
  const auto c = parse_service_config(
      R"({"corpus": "c.jsonl", "index_dir": "/abs/idx", "port": 9000, "host": "0.0.0.0",
          "seed": 3, "session_idle_seconds": 60, "suggestion": {"k": 10, "n_clusters": 4}})",
      "/base");
  EXPECT_EQ(c.corpus, fs::path("/base/c.jsonl"));
  EXPECT_EQ(c.index_dir, fs::path("/abs/idx"));
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.session_idle, std::chrono::seconds(60));
  EXPECT_EQ(c.suggestion.k, 10u);
  EXPECT_EQ(c.suggestion.n_clusters, 4u);
  EXPECT_EQ(c.suggestion.seed, 3u);
  EXPECT_FALSE(c.predictions);

  auto code = [](const char* json) {
    try {
      parse_service_config(json);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code(R"({"corpus": "c", "index_dir": "i", "colour": 1})"), ErrorCode::kConfig);
  EXPECT_EQ(code(R"({"index_dir": "i"})"), ErrorCode::kConfig);
  EXPECT_EQ(code(R"({"corpus": "c", "index_dir": "i", "port": "80"})"), ErrorCode::kConfig);
  EXPECT_EQ(code(R"({"corpus": "c", "index_dir": "i", "suggestion": {"kk": 1}})"), ErrorCode::kConfig);
  EXPECT_EQ(code("[1]"), ErrorCode::kConfig);
}

TEST(ServiceConfig, EnvironmentOverrides) {
  ServiceConfig c;
  std::map<std::string, std::string> env = {{"PROCKIT_BIND", "0.0.0.0:9123"},
                                            {"PROCKIT_CORPUS", "/data/other.jsonl"}};
  auto lookup = [&](const char* name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  apply_env_overrides(c, lookup);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9123);
  EXPECT_EQ(c.corpus, fs::path("/data/other.jsonl"));

  env = {{"PROCKIT_BIND", ":8181"}};
  apply_env_overrides(c, lookup);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 8181);

  env = {{"PROCKIT_BIND", "localhost:http"}};
  EXPECT_THROW(apply_env_overrides(c, lookup), Error);
}

TEST(ServiceConfig, StartupErrorsNameThePath) {
  Fixture f;
  auto c = f.config;
  c.corpus = f.dir.path() / "missing.jsonl";
  try {
    load_service_data(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("missing.jsonl"), std::string::npos);
  }

  c = f.config;
  c.port = 70000;
  try {
    load_service_data(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("70000"), std::string::npos);
  }

  // index built from another corpus
  c = f.config;
  const auto other = load_corpus(kData / "first_aid.jsonl");
  save_index_bundle(build_index_bundle(other, test_embedder(), {"headline"}), f.dir.path() / "other");
  c.index_dir = f.dir.path() / "other";
  try {
    load_service_data(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("other"), std::string::npos);
  }

  // corrupted index file
  c = f.config;
  persist::write_file(f.dir.path() / "index" / "search.idx", "garbage\n");
  try {
    load_service_data(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("search.idx"), std::string::npos);
  }
}

TEST(Service, ArticlesAndSearch) {
  Fixture f;
  auto svc = f.service();
  const auto r = svc->handle(get("/v1/articles/edit-a-video"));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(body(r), Json::parse(serialize_article(*svc->data().corpus.find("edit-a-video"))));
  EXPECT_EQ(r.headers.at("Content-Type"), "application/json");

  expect_error(svc->handle(get("/v1/articles/nope")), 404, "not_found");
  expect_error(svc->handle(get("/v1/nothing")), 404, "not_found");
  expect_error(svc->handle(post("/v1/articles/edit-a-video")), 405, "method_not_allowed");

  const auto s = body(svc->handle(get("/v1/search", {{"q", "drag the clip edges"}, {"k", "3"}})));
  ASSERT_FALSE(s.at("results").empty());
  EXPECT_LE(s.at("results").size(), 3u);
  EXPECT_EQ(s.at("results")[0].at("article_id"), "trim-video-clips");
  EXPECT_EQ(s.at("results")[0].at("title"), "Trim Video Clips");

  // same ranking as the index itself
  const auto direct = bm25_search(svc->data().index.search, "video", 10);
  const auto viaapi = body(svc->handle(get("/v1/search", {{"q", "video"}})));
  ASSERT_EQ(viaapi.at("results").size(), direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    EXPECT_EQ(viaapi.at("results")[i].at("article_id"), direct[i].id);

  expect_error(svc->handle(get("/v1/search")), 400, "usage");
  expect_error(svc->handle(get("/v1/search", {{"q", "video"}, {"k", "0"}})), 400, "usage");
  expect_error(svc->handle(get("/v1/search", {{"q", "video"}, {"k", "-1"}})), 400, "usage");
  expect_error(svc->handle(get("/v1/search", {{"q", "video"}, {"k", "ten"}})), 400, "usage");
  expect_error(svc->handle(get("/v1/search", {{"q", "!!!"}})), 400, "empty_query");
}

TEST(Service, SuggestMatchesTheSuggestModule) {
  Fixture f;
  auto svc = f.service();
  const auto r = svc->handle(post("/v1/suggest", R"({"goal": "Edit a Video", "K": 6})"));
  ASSERT_EQ(r.status, 200) << r.body;

  SuggestionConfig cfg = f.config.suggestion;
  cfg.k = 6;
  const auto corpus = load_corpus(f.config.corpus);
  const auto index = SuggestIndex::build(corpus, test_embedder(), {"headline", "goal"});
  EXPECT_EQ(r.body, suggested_sequence_to_json(suggest_steps("Edit a Video", corpus, index, cfg)));

  // self-retrieval: the article's own steps are among the candidates
  std::size_t own = 0;
  const Json j = body(r);
  for (const auto& c : j.at("candidates"))
    own += c.at("step_id").get<std::string>().rfind("edit-a-video#", 0) == 0;
  EXPECT_EQ(own, 3u);

  expect_error(svc->handle(post("/v1/suggest", R"({"K": 3})")), 400, "usage");
  expect_error(svc->handle(post("/v1/suggest", R"({"goal": "x", "K": 0})")), 400, "usage");
  expect_error(svc->handle(post("/v1/suggest", "{not json")), 400, "validation");
  expect_error(svc->handle(get("/v1/suggest")), 405, "method_not_allowed");
}

TEST(Service, StepLinksAgreeWithTheHierarchyBuild) {
  Fixture f;
  auto svc = f.service();
  const auto corpus = load_corpus(f.config.corpus);
  const auto predictions = parse_predictions(persist::read_file(*f.config.predictions));
  const auto graph = build_hierarchy(corpus, apply_link_threshold(predictions, 0.5));

  std::size_t linked = 0;
  for (const auto& a : corpus.articles()) {
    for (const Step* s : a.steps()) {
      auto req = get("/v1/steps/" + s->id + "/link");
      const auto r = svc->handle(req);
      const RealizedBy* l = graph.link_of(s->id);
      if (!l) {
        expect_error(r, 409, "unlinkable");
        continue;
      }
      ++linked;
      ASSERT_EQ(r.status, 200) << s->id;
      const Json j = body(r);
      EXPECT_EQ(j.at("article_id"), l->article_id);
      EXPECT_EQ(j.at("provenance"), std::string(link_provenance_name(l->provenance)));
      if (l->score) EXPECT_EQ(j.at("score").get<double>(), *l->score);
      else EXPECT_TRUE(j.at("score").is_null());
    }
  }
  EXPECT_EQ(linked, 4u);

  const Json hyper = body(svc->handle(get("/v1/steps/make-a-movie#0#0/link")));
  EXPECT_EQ(hyper.at("article_id"), "write-a-script");
  EXPECT_EQ(hyper.at("provenance"), "corpus-hyperlink");
  const Json pred = body(svc->handle(get("/v1/steps/make-a-movie#0#1/link")));
  EXPECT_EQ(pred.at("article_id"), "shoot-footage");
  EXPECT_EQ(pred.at("provenance"), "predicted");
  EXPECT_DOUBLE_EQ(pred.at("score").get<double>(), 0.91);

  // below the threshold, closing a cycle, explicitly unlinkable
  auto reason = [&](const std::string& id) {
    return body(svc->handle(get("/v1/steps/" + id + "/link"))).at("detail").at("reason").get<std::string>();
  };
  EXPECT_EQ(reason("make-a-movie#0#3"), "no confident link");
  EXPECT_EQ(reason("trim-video-clips#0#0").rfind("cycle", 0), 0u);
  EXPECT_EQ(reason("write-a-script#0#0"), "no confident link");
  EXPECT_EQ(reason("shoot-footage#0#0"), "no link");
  expect_error(svc->handle(get("/v1/steps/nope#0#0/link")), 404, "not_found");
}

TEST(Service, HierarchyAndState) {
  Fixture f;
  auto svc = f.service();
  const auto& d = svc->data();
  const auto r = svc->handle(get("/v1/hierarchy/make-a-movie", {{"depth", "2"}}));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body, hierarchy_tree_json(d.hierarchy, d.corpus, "make-a-movie", 2));
  EXPECT_EQ(svc->handle(get("/v1/hierarchy/make-a-movie")).body,
            hierarchy_tree_json(d.hierarchy, d.corpus, "make-a-movie", 1));
  expect_error(svc->handle(get("/v1/hierarchy/nope")), 404, "not_found");
  expect_error(svc->handle(get("/v1/hierarchy/make-a-movie", {{"depth", "x"}})), 400, "usage");

  const Json water = body(svc->handle(
      get("/v1/state/photosynthesis", {{"entity", "water"}, {"attribute", "location"}, {"at", "0"}})));
  EXPECT_EQ(water.at("answer").at("kind"), "value");
  EXPECT_EQ(water.at("answer").at("value"), "soil");
  const Json sugar = body(svc->handle(get("/v1/state/photosynthesis", {{"entity", "sugar"}, {"at", "0"}})));
  EXPECT_EQ(sugar.at("attribute"), "location");
  EXPECT_EQ(sugar.at("answer").at("kind"), "absent");

  const Json dough = body(svc->handle(
      get("/v1/state/dough", {{"entity", "dough"}, {"attribute", "texture"}, {"at", "0"}})));
  EXPECT_EQ(dough.at("answer").at("value"), "sticky");
  const Json later = body(svc->handle(
      get("/v1/state/dough", {{"entity", "dough"}, {"attribute", "texture"}, {"at", "5"}})));
  EXPECT_EQ(later.at("answer").at("value"), "smooth");

  expect_error(svc->handle(get("/v1/state/nope", {{"entity", "x"}, {"at", "0"}})), 404, "not_found");
  expect_error(svc->handle(get("/v1/state/photosynthesis", {{"entity", "oxygen"}, {"at", "0"}})), 404,
               "unknown_entity");
  expect_error(svc->handle(get("/v1/state/photosynthesis", {{"entity", "water"}})), 400, "usage");
  expect_error(svc->handle(get("/v1/state/photosynthesis", {{"entity", "water"}, {"at", "99"}})), 400,
               "usage");
  expect_error(svc->handle(get("/v1/state/dough", {{"entity", "dough"}, {"at", "1"}})), 400, "usage");
}

TEST(Service, StrongValidatorsOnGets) {
  Fixture f;
  auto svc = f.service();
  const auto a = svc->handle(get("/v1/hierarchy/make-a-movie"));
  const auto b = svc->handle(get("/v1/hierarchy/make-a-movie"));
  EXPECT_EQ(a.body, b.body);
  ASSERT_TRUE(a.headers.count("ETag"));
  EXPECT_EQ(a.headers.at("ETag"), b.headers.at("ETag"));
  EXPECT_EQ(a.headers.at("ETag").front(), '"');

  auto cond = get("/v1/hierarchy/make-a-movie");
  cond.headers["if-none-match"] = a.headers.at("ETag");
  const auto c = svc->handle(cond);
  EXPECT_EQ(c.status, 304);
  EXPECT_TRUE(c.body.empty());

  cond.headers["if-none-match"] = "\"0000\"";
  EXPECT_EQ(svc->handle(cond).status, 200);

  EXPECT_NE(svc->handle(get("/v1/articles/make-a-movie")).headers.at("ETag"), a.headers.at("ETag"));
  EXPECT_FALSE(svc->handle(post("/v1/suggest", R"({"goal": "Edit a Video"})")).headers.count("ETag"));

  // a second instance over the same artifacts answers byte-identically
  auto other = f.service();
  for (const auto& path : {"/v1/articles/edit-a-video", "/v1/hierarchy/make-a-movie",
                           "/v1/steps/make-a-movie#0#1/link"})
    EXPECT_EQ(svc->handle(get(path)).body, other->handle(get(path)).body);
  EXPECT_EQ(svc->handle(post("/v1/suggest", R"({"goal": "Make a Movie", "K": 8})")).body,
            other->handle(post("/v1/suggest", R"({"goal": "Make a Movie", "K": 8})")).body);
}

TEST(Service, SessionNavigation) {
  Fixture f;
  auto svc = f.service();
  const auto created = svc->handle(post("/v1/sessions", R"({"article_id": "make-a-movie"})"));
  ASSERT_EQ(created.status, 201) << created.body;
  const Json v0 = body(created);
  const std::string id = v0.at("session_id");
  EXPECT_EQ(id.size(), 32u);
  EXPECT_EQ(v0.at("current"), 0);
  EXPECT_EQ(v0.at("stack").size(), 1u);
  EXPECT_EQ(v0.at("article").at("steps").size(), 4u);
  EXPECT_EQ(v0.at("article").at("steps")[0].at("link").at("article_id"), "write-a-script");
  EXPECT_TRUE(v0.at("article").at("steps")[3].at("link").is_null());

  const std::string base = "/v1/sessions/" + id;
  expect_error(svc->handle(post(base + "/prev")), 409, "at_start");
  expect_error(svc->handle(post(base + "/up")), 409, "at_root");
  EXPECT_EQ(body(svc->handle(post(base + "/next"))).at("current"), 1);
  EXPECT_EQ(body(svc->handle(post(base + "/next"))).at("current"), 2);
  const std::string before = svc->handle(get(base)).body;

  // drill into step 2 (edit-a-video), then step 1 there (trim-video-clips)
  const Json d1 = body(svc->handle(post(base + "/drill", "{}")));
  EXPECT_EQ(d1.at("article").at("id"), "edit-a-video");
  EXPECT_EQ(d1.at("stack").size(), 2u);
  EXPECT_EQ(body(svc->handle(post(base + "/next"))).at("current"), 1);
  const std::string mid = svc->handle(get(base)).body;
  const Json d2 = body(svc->handle(post(base + "/drill", R"({"step_index": 1})")));
  EXPECT_EQ(d2.at("article").at("id"), "trim-video-clips");
  EXPECT_EQ(d2.at("stack").size(), 3u);

  // unlinkable: 409 and the session is untouched
  const std::string deep = svc->handle(get(base)).body;
  const auto refused = svc->handle(post(base + "/drill", R"({"step_index": 0})"));
  expect_error(refused, 409, "unlinkable");
  EXPECT_EQ(body(refused).at("detail").at("step_id"), "trim-video-clips#0#0");
  EXPECT_EQ(svc->handle(get(base)).body, deep);
  expect_error(svc->handle(post(base + "/drill", R"({"step_index": 9})")), 400, "usage");
  EXPECT_EQ(body(svc->handle(post(base + "/next"))).at("current"), 1);
  expect_error(svc->handle(post(base + "/next")), 409, "at_end");
  EXPECT_EQ(body(svc->handle(post(base + "/up"))).dump(), Json::parse(mid).dump());
}

TEST(Service, SessionUpRestoresPriorViews) {
  Fixture f;
  auto svc = f.service();
  const std::string id = body(svc->handle(post("/v1/sessions", R"({"article_id": "make-a-movie"})")))
                             .at("session_id");
  const std::string base = "/v1/sessions/" + id;
  svc->handle(post(base + "/next"));
  svc->handle(post(base + "/next"));
  std::vector<std::string> views = {svc->handle(get(base)).body};
  ASSERT_EQ(svc->handle(post(base + "/drill")).status, 200);
  svc->handle(post(base + "/next"));
  views.push_back(svc->handle(get(base)).body);
  ASSERT_EQ(svc->handle(post(base + "/drill")).status, 200);
  views.push_back(svc->handle(get(base)).body);
  for (std::size_t i = views.size() - 1; i-- > 0;) {
    const auto up = svc->handle(post(base + "/up"));
    ASSERT_EQ(up.status, 200);
    EXPECT_EQ(up.body, views[i]);
  }
  expect_error(svc->handle(post(base + "/up")), 409, "at_root");

  expect_error(svc->handle(post("/v1/sessions/ffff/next")), 404, "not_found");
  expect_error(svc->handle(post(base + "/sideways")), 404, "not_found");
  expect_error(svc->handle(post("/v1/sessions", R"({"article_id": "nope"})")), 404, "not_found");
  expect_error(svc->handle(post("/v1/sessions", R"({})")), 400, "usage");
}

TEST(Service, SessionsExpireWhenIdle) {
  Fixture f;
  auto svc = f.service();
  auto t = std::chrono::steady_clock::time_point{} + std::chrono::hours(1);
  svc->set_clock([&t] { return t; });
  const std::string a = body(svc->handle(post("/v1/sessions", R"({"article_id": "make-a-movie"})")))
                            .at("session_id");
  const std::string b = body(svc->handle(post("/v1/sessions", R"({"article_id": "edit-a-video"})")))
                            .at("session_id");
  EXPECT_EQ(svc->session_count(), 2u);
  t += std::chrono::minutes(20);
  EXPECT_EQ(svc->handle(post("/v1/sessions/" + a + "/next")).status, 200);
  t += std::chrono::minutes(20);  // b idle for 40 min, a for 20
  EXPECT_EQ(svc->session_count(), 1u);
  expect_error(svc->handle(get("/v1/sessions/" + b)), 404, "not_found");
  EXPECT_EQ(svc->handle(get("/v1/sessions/" + a)).status, 200);
  t += std::chrono::minutes(31);
  expect_error(svc->handle(get("/v1/sessions/" + a)), 404, "not_found");
  EXPECT_EQ(svc->session_count(), 0u);
}

TEST(Service, ConcurrentSessions) {
  Fixture f;
  auto svc = f.service();
  const std::string shared = body(svc->handle(post("/v1/sessions", R"({"article_id": "make-a-movie"})")))
                                 .at("session_id");
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        const auto c = svc->handle(post("/v1/sessions", R"({"article_id": "make-a-movie"})"));
        const std::string base = "/v1/sessions/" + body(c).at("session_id").get<std::string>();
        bool ok = svc->handle(post(base + "/next")).status == 200;
        ok &= svc->handle(post(base + "/next")).status == 200;
        ok &= svc->handle(post(base + "/drill")).status == 200;
        ok &= svc->handle(post(base + "/up")).status == 200;
        ok &= body(svc->handle(get(base))).at("current") == 2;
        // drills on one shared session race; each answers 200 or 409
        const std::string s = "/v1/sessions/" + shared;
        const int st = svc->handle(post(s + "/drill", R"({"step_index": 0})")).status;
        ok &= st == 200 || st == 409;
        if (t % 2) ok &= svc->handle(get("/v1/hierarchy/make-a-movie")).status == 200;
        if (!ok) ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(svc->session_count(), 201u);
}

TEST(Service, ServesOverHttp) {
  Fixture f;
  auto config = f.config;
  config.host = "127.0.0.1";
  config.port = 0;
  Service svc(load_service_data(config), config);
  const int port = svc.start();
  ASSERT_GT(port, 0);

  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Get("/v1/articles/make-a-movie");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body).at("title"), "Make a Movie");
  const std::string tag = r->get_header_value("ETag");
  EXPECT_FALSE(tag.empty());
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");

  auto cached = cli.Get("/v1/articles/make-a-movie", {{"If-None-Match", tag}});
  ASSERT_TRUE(cached);
  EXPECT_EQ(cached->status, 304);

  r = cli.Get("/v1/steps/make-a-movie%230%232/link");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(Json::parse(r->body).at("article_id"), "edit-a-video");

  r = cli.Get("/v1/search?q=share%20video&k=2");
  ASSERT_TRUE(r);
  EXPECT_EQ(Json::parse(r->body).at("results")[0].at("article_id"), "share-a-video-online");

  r = cli.Post("/v1/sessions", R"({"article_id": "make-a-movie"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  const std::string id = Json::parse(r->body).at("session_id");
  r = cli.Post("/v1/sessions/" + id + "/drill", R"({"step_index": 3})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 409);
  EXPECT_EQ(Json::parse(r->body).at("code"), "unlinkable");

  r = cli.Put("/v1/articles/make-a-movie", "{}", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 405);

  r = cli.Options("/v1/suggest");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);

  // a second service cannot take the same port
  auto clash = config;
  clash.port = port;
  Service second(load_service_data(clash), clash);
  try {
    second.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find(std::to_string(port)), std::string::npos);
  }
  svc.stop();
}
