#include "prockit/service.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json_io.hpp"
#include "prockit/error.hpp"
#include "prockit/text.hpp"

namespace prockit {

namespace {

template <typename F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::size_t as_count(const Json& v, const char* key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(ErrorCode::kConfig, std::string("\"") + key + "\" must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string as_string(const Json& v, const char* key) {
  if (!v.is_string()) throw Error(ErrorCode::kConfig, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

void parse_suggestion(const Json& j, SuggestionConfig& s, const std::filesystem::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "\"suggestion\" must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "k") {
      s.k = as_count(v, "k");
    } else if (key == "n_clusters") {
      if (v.is_null()) s.n_clusters.reset();
      else s.n_clusters = as_count(v, "n_clusters");
    } else if (key == "prior_neighbours") {
      s.prior_neighbours = as_count(v, "prior_neighbours");
    } else if (key == "n_init") {
      s.n_init = as_count(v, "n_init");
    } else if (key == "score_file") {
      s.score_file = resolve(base, as_string(v, "score_file"));
      s.scorer = RelatednessScorer::kExternal;
    } else {
      throw Error(ErrorCode::kConfig, "unknown suggestion key \"" + key + "\"");
    }
  }
}

std::pair<std::string, std::optional<int>> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) return {bind, std::nullopt};
  const std::string port = bind.substr(colon + 1);
  int value = 0;
  try {
    std::size_t used = 0;
    value = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "PROCKIT_BIND: bad port '" + port + "'");
  }
  return {bind.substr(0, colon), value};
}

std::string etag_of(std::string_view body) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : body) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return "\"" + std::string(buf) + "\"";
}

struct ApiError {
  int status;
  std::string code;
  std::string message;
  Json detail;
};

[[noreturn]] void fail(int status, std::string code, std::string message, Json detail = nullptr) {
  throw ApiError{status, std::move(code), std::move(message), std::move(detail)};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownEntity:
    case ErrorCode::kUnknownDocument:
      return 404;
    case ErrorCode::kUsage:
    case ErrorCode::kEmptyQuery:
    case ErrorCode::kConfig:
    case ErrorCode::kValidation:
      return 400;
    case ErrorCode::kDegenerateInput:
    case ErrorCode::kInvalidGrid:
    case ErrorCode::kPoolTooSmall:
    case ErrorCode::kEmptyCorpus:
      return 422;
    default:
      return 500;
  }
}

HttpResponse json_response(int status, const Json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  r.headers["Content-Type"] = "application/json";
  return r;
}

HttpResponse error_response(const ApiError& e) {
  return json_response(e.status, Json{{"code", e.code}, {"message", e.message}, {"detail", e.detail}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const auto slash = path.find('/', pos);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > pos) out.emplace_back(path.substr(pos, end - pos));
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return out;
}

std::size_t parse_index(const std::string& text, const char* name, std::size_t max) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (text.empty() || text[0] == '-' || text[0] == '+') throw std::invalid_argument(text);
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || used == 0 || v > max)
    fail(400, "usage", std::string("'") + name + "' must be an integer in [0, " + std::to_string(max) + "]",
         Json{{"parameter", name}, {"value", text}});
  return static_cast<std::size_t>(v);
}

const std::string* query_param(const HttpRequest& req, const std::string& name) {
  const auto it = req.query.find(name);
  return it == req.query.end() ? nullptr : &it->second;
}

Json body_object(const HttpRequest& req) {
  if (text::trim(req.body).empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(400, "validation", "request body must be a JSON object");
  return j;
}

struct Session {
  std::mutex mu;
  std::vector<SessionFrame> stack;
  std::int64_t created = 0;  // unix seconds
  std::chrono::steady_clock::time_point last_used;
};

}  // namespace

ServiceConfig parse_service_config(std::string_view json, const std::filesystem::path& base_dir) {
  Json j = Json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::kConfig, "service config must be a JSON object");
  ServiceConfig c;
  bool have_corpus = false;
  bool have_index = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "corpus") {
      c.corpus = resolve(base_dir, as_string(v, "corpus"));
      have_corpus = true;
    } else if (key == "index_dir") {
      c.index_dir = resolve(base_dir, as_string(v, "index_dir"));
      have_index = true;
    } else if (key == "predictions") {
      if (!v.is_null()) c.predictions = resolve(base_dir, as_string(v, "predictions"));
    } else if (key == "states_dir") {
      if (!v.is_null()) c.states_dir = resolve(base_dir, as_string(v, "states_dir"));
    } else if (key == "host") {
      c.host = as_string(v, "host");
    } else if (key == "port") {
      if (!v.is_number_integer()) throw Error(ErrorCode::kConfig, "\"port\" must be an integer");
      c.port = v.get<int>();
    } else if (key == "seed") {
      c.seed = as_count(v, "seed");
    } else if (key == "link_threshold") {
      if (v.is_null()) continue;
      if (!v.is_number()) throw Error(ErrorCode::kConfig, "\"link_threshold\" must be a number");
      c.link_threshold = v.get<double>();
    } else if (key == "session_idle_seconds") {
      c.session_idle = std::chrono::seconds(as_count(v, "session_idle_seconds"));
    } else if (key == "threads") {
      c.threads = as_count(v, "threads");
    } else if (key == "suggestion") {
      parse_suggestion(v, c.suggestion, base_dir);
    } else {
      throw Error(ErrorCode::kConfig, "unknown config key \"" + key + "\"");
    }
  }
  if (!have_corpus) throw Error(ErrorCode::kConfig, "config needs \"corpus\"");
  if (!have_index) throw Error(ErrorCode::kConfig, "config needs \"index_dir\"");
  c.suggestion.seed = c.seed;
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  return with_path(path, [&] {
    return parse_service_config(persist::read_file(path), path.parent_path());
  });
}

void apply_env_overrides(ServiceConfig& config,
                         const std::function<std::optional<std::string>(const char*)>& getenv) {
  if (auto bind = getenv("PROCKIT_BIND"); bind && !bind->empty()) {
    auto [host, port] = parse_bind(*bind);
    if (!host.empty()) config.host = host;
    if (port) config.port = *port;
  }
  if (auto corpus = getenv("PROCKIT_CORPUS"); corpus && !corpus->empty()) config.corpus = *corpus;
}

void apply_env_overrides(ServiceConfig& config) {
  apply_env_overrides(config, [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  });
}

void validate_service_config(const ServiceConfig& config) {
  if (config.port < 0 || config.port > 65535)
    throw Error(ErrorCode::kConfig, "port " + std::to_string(config.port) + " is out of range");
  if (config.threads == 0) throw Error(ErrorCode::kConfig, "threads must be at least 1");
  if (config.link_threshold && (*config.link_threshold < 0.0 || *config.link_threshold > 1.0))
    throw Error(ErrorCode::kConfig, "link_threshold must be in [0, 1]");
  auto need = [](const std::filesystem::path& p, const char* what) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec))
      throw Error(ErrorCode::kIo, p.string() + ": " + what + " does not exist");
  };
  need(config.corpus, "corpus");
  need(config.index_dir, "index directory");
  if (config.predictions) need(*config.predictions, "predictions file");
  if (config.states_dir) need(*config.states_dir, "states directory");
  if (config.suggestion.score_file) need(*config.suggestion.score_file, "score file");
}

HttpRequest make_request(std::string method, std::string_view target, std::string body) {
  HttpRequest r;
  r.method = std::move(method);
  const auto q = target.find('?');
  r.path = httplib::detail::decode_url(std::string(target.substr(0, q)), false);
  if (q != std::string_view::npos) {
    httplib::Params params;
    httplib::detail::parse_query_text(std::string(target.substr(q + 1)), params);
    for (const auto& [k, v] : params) r.query.emplace(k, v);
  }
  r.body = std::move(body);
  return r;
}

Predictions apply_link_threshold(Predictions predictions, std::optional<double> threshold) {
  if (!threshold) return predictions;
  Predictions out;
  out.unlinkable = std::move(predictions.unlinkable);
  for (auto& l : predictions.links) {
    if (l.score >= *threshold) out.links.push_back(std::move(l));
    else out.unlinkable.push_back(l.step_id);
  }
  std::sort(out.unlinkable.begin(), out.unlinkable.end());
  return out;
}

ServiceData load_service_data(const ServiceConfig& config) {
  validate_service_config(config);
  ServiceData d;
  d.corpus = with_path(config.corpus, [&] { return load_corpus(config.corpus); });
  d.index = load_index_bundle(config.index_dir);
  with_path(config.index_dir, [&] {
    check_index_bundle(d.index, d.corpus);
    return 0;
  });
  Predictions predictions;
  if (config.predictions) {
    predictions = with_path(*config.predictions,
                            [&] { return parse_predictions(persist::read_file(*config.predictions)); });
  }
  d.hierarchy = build_hierarchy(d.corpus, apply_link_threshold(std::move(predictions), config.link_threshold));

  if (config.states_dir) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(*config.states_dir, ec))
      if (entry.is_regular_file()) files.push_back(entry.path());
    if (ec) throw Error(ErrorCode::kIo, config.states_dir->string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string id = f.stem().string();
      const auto ext = f.extension();
      if (ext != ".tsv" && ext != ".jsonl") continue;
      if (d.grids.count(id) || d.timelines.count(id))
        throw Error(ErrorCode::kConfig, f.string() + ": state id '" + id + "' is used twice");
      if (ext == ".tsv") d.grids.emplace(id, with_path(f, [&] { return load_grid(f); }));
      else d.timelines.emplace(id, with_path(f, [&] { return load_timeline(f); }));
    }
  }
  return d;
}

struct Service::Impl {
  ServiceData data;
  ServiceConfig config;

  std::mutex clock_mu;
  std::mutex store_mu;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 id_rng{std::random_device{}()};
  Clock clock = [] { return std::chrono::steady_clock::now(); };

  httplib::Server server;
  std::thread listener;

  std::chrono::steady_clock::time_point now() {
    std::lock_guard lock(clock_mu);
    return clock();
  }

  // ---- views

  Json link_json(const std::string& step_id) const {
    const RealizedBy* l = data.hierarchy.link_of(step_id);
    if (!l) return nullptr;
    const Article* target = data.corpus.find(l->article_id);
    Json j = {{"step_id", l->step_id},
              {"article_id", l->article_id},
              {"title", target ? target->title : ""},
              {"provenance", std::string(link_provenance_name(l->provenance))},
              {"score", nullptr}};
    if (l->score) j["score"] = *l->score;
    return j;
  }

  const Article& article_or_404(const std::string& id) const {
    const Article* a = data.corpus.find(id);
    if (!a) fail(404, "not_found", "no article '" + id + "'", Json{{"article_id", id}});
    return *a;
  }

  Json session_view(const std::string& id, const Session& s) const {
    Json stack = Json::array();
    for (const auto& f : s.stack) {
      const Article* a = data.corpus.find(f.article_id);
      stack.push_back({{"article_id", f.article_id},
                       {"title", a ? a->title : ""},
                       {"step_index", f.step_index}});
    }
    const SessionFrame& top = s.stack.back();
    const Article& a = article_or_404(top.article_id);
    Json steps = Json::array();
    const auto all = a.steps();
    for (std::size_t i = 0; i < all.size(); ++i)
      steps.push_back({{"index", i},
                       {"step_id", all[i]->id},
                       {"headline", all[i]->headline},
                       {"link", link_json(all[i]->id)}});
    return {{"session_id", id},
            {"created", s.created},
            {"stack", stack},
            {"article", {{"id", a.id}, {"title", a.title}, {"steps", steps}}},
            {"current", top.step_index}};
  }

  // ---- sessions

  std::string new_session_id() {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng()),
                  static_cast<unsigned long long>(id_rng()));
    return buf;
  }

  void sweep_locked(std::chrono::steady_clock::time_point t) {
    for (auto it = sessions.begin(); it != sessions.end();) {
      bool expired = false;
      {
        std::lock_guard slock(it->second->mu);
        expired = t - it->second->last_used > config.session_idle;
      }
      if (expired) it = sessions.erase(it);
      else ++it;
    }
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    const auto t = now();
    std::lock_guard lock(store_mu);
    sweep_locked(t);
    const auto it = sessions.find(id);
    if (it == sessions.end())
      fail(404, "not_found", "no session '" + id + "' (unknown or expired)", Json{{"session_id", id}});
    return it->second;
  }

  HttpResponse create_session(const HttpRequest& req) {
    const Json body = body_object(req);
    const auto it = body.find("article_id");
    if (it == body.end() || !it->is_string())
      fail(400, "usage", "body needs a string \"article_id\"");
    const Article& a = article_or_404(it->get<std::string>());
    auto s = std::make_shared<Session>();
    s->stack.push_back({a.id, 0});
    s->created = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
    std::string id;
    {
      const auto t = now();
      std::lock_guard lock(store_mu);
      sweep_locked(t);
      s->last_used = t;
      do id = new_session_id();
      while (sessions.count(id));
      sessions.emplace(id, s);
    }
    return json_response(201, session_view(id, *s));
  }

  HttpResponse session_action(const std::string& id, const std::string& action, const HttpRequest& req) {
    auto s = find_session(id);
    std::lock_guard slock(s->mu);
    s->last_used = now();
    SessionFrame& top = s->stack.back();
    const Article& a = article_or_404(top.article_id);
    const std::size_t n = a.step_count();
    if (action == "next") {
      if (top.step_index + 1 >= n)
        fail(409, "at_end", "already at the last step", Json{{"step_index", top.step_index}});
      ++top.step_index;
    } else if (action == "prev") {
      if (top.step_index == 0) fail(409, "at_start", "already at the first step", Json{{"step_index", 0}});
      --top.step_index;
    } else if (action == "up") {
      if (s->stack.size() == 1)
        fail(409, "at_root", "already at the top of the breadcrumb stack", nullptr);
      s->stack.pop_back();
    } else if (action == "drill") {
      const Json body = body_object(req);
      std::size_t index = top.step_index;
      if (const auto it = body.find("step_index"); it != body.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<long long>() < 0 ||
            it->get<unsigned long long>() >= n)
          fail(400, "usage", "step_index must be an integer in [0, " + std::to_string(n) + ")",
               Json{{"step_count", n}});
        index = it->get<std::size_t>();
      }
      const std::string step_id = a.steps()[index]->id;
      const RealizedBy* link = data.hierarchy.link_of(step_id);
      if (!link) fail(409, "unlinkable", "step has no linked article", unlinked_detail(step_id));
      s->stack.push_back({link->article_id, 0});
    } else {
      fail(404, "not_found", "unknown session action '" + action + "'", nullptr);
    }
    return json_response(200, session_view(id, *s));
  }

  Json unlinked_detail(const std::string& step_id) const {
    std::string reason = "no link";
    if (std::binary_search(data.hierarchy.unlinkable.begin(), data.hierarchy.unlinkable.end(), step_id))
      reason = "no confident link";
    for (const auto& sk : data.hierarchy.skipped)
      if (sk.step_id == step_id) reason = sk.reason;
    return {{"step_id", step_id}, {"reason", reason}};
  }

  // ---- read-only endpoints

  HttpResponse search(const HttpRequest& req) {
    const std::string* q = query_param(req, "q");
    if (!q) fail(400, "usage", "missing query parameter 'q'", Json{{"parameter", "q"}});
    std::size_t k = 10;
    if (const std::string* ks = query_param(req, "k")) k = parse_index(*ks, "k", 1000);
    if (k == 0) fail(400, "usage", "'k' must be at least 1", Json{{"parameter", "k"}});
    Json results = Json::array();
    for (const auto& hit : bm25_search(data.index.search, *q, k)) {
      const Article* a = data.corpus.find(hit.id);
      results.push_back({{"article_id", hit.id}, {"title", a ? a->title : ""}, {"score", hit.score}});
    }
    return json_response(200, {{"query", *q}, {"k", k}, {"results", results}});
  }

  HttpResponse suggest(const HttpRequest& req) {
    const Json body = body_object(req);
    const auto g = body.find("goal");
    if (g == body.end() || !g->is_string() || text::trim(g->get<std::string>()).empty())
      fail(400, "usage", "body needs a non-empty string \"goal\"");
    SuggestionConfig cfg = config.suggestion;
    if (const auto k = body.find("K"); k != body.end() && !k->is_null()) {
      if (!k->is_number_integer() || k->get<long long>() < 1 || k->get<long long>() > 1000)
        fail(400, "usage", "K must be an integer in [1, 1000]", Json{{"parameter", "K"}});
      cfg.k = k->get<std::size_t>();
      if (cfg.n_clusters && *cfg.n_clusters > cfg.k) cfg.n_clusters.reset();
    }
    const auto seq = suggest_steps(g->get<std::string>(), data.corpus, data.index.steps, cfg);
    HttpResponse r;
    r.body = suggested_sequence_to_json(seq);
    r.headers["Content-Type"] = "application/json";
    return r;
  }

  HttpResponse step_link(const std::string& step_id) {
    if (!data.corpus.find_step(step_id))
      fail(404, "not_found", "no step '" + step_id + "'", Json{{"step_id", step_id}});
    Json j = link_json(step_id);
    if (j.is_null()) fail(409, "unlinkable", "step has no linked article", unlinked_detail(step_id));
    return json_response(200, j);
  }

  HttpResponse hierarchy(const std::string& article_id, const HttpRequest& req) {
    std::size_t depth = 1;
    if (const std::string* d = query_param(req, "depth")) depth = parse_index(*d, "depth", 32);
    article_or_404(article_id);
    HttpResponse r;
    r.body = hierarchy_tree_json(data.hierarchy, data.corpus, article_id, depth);
    r.headers["Content-Type"] = "application/json";
    return r;
  }

  HttpResponse state(const std::string& id, const HttpRequest& req) {
    const std::string* entity = query_param(req, "entity");
    if (!entity) fail(400, "usage", "missing query parameter 'entity'", Json{{"parameter", "entity"}});
    const std::string* at = query_param(req, "at");
    if (!at) fail(400, "usage", "missing query parameter 'at'", Json{{"parameter", "at"}});
    const std::size_t index = parse_index(*at, "at", 1000000);
    const std::string* attr = query_param(req, "attribute");
    StateAnswer answer;
    std::string attribute;
    if (const auto g = data.grids.find(id); g != data.grids.end()) {
      attribute = attr ? *attr : "location";
      answer = query_state(g->second, *entity, attribute, index);
    } else if (const auto t = data.timelines.find(id); t != data.timelines.end()) {
      if (!attr) fail(400, "usage", "missing query parameter 'attribute'", Json{{"parameter", "attribute"}});
      attribute = *attr;
      answer = query_state(t->second, *entity, attribute, index);
    } else {
      fail(404, "not_found", "no state annotation '" + id + "'", Json{{"grid_id", id}});
    }
    return json_response(200, {{"grid_id", id},
                               {"entity", *entity},
                               {"attribute", attribute},
                               {"at", index},
                               {"answer", Json::parse(state_answer_to_json(answer))}});
  }

  HttpResponse route(const HttpRequest& req) {
    const auto seg = split_path(req.path);
    const std::string& m = req.method;
    const bool get = m == "GET" || m == "HEAD";
    if (seg.empty() || seg[0] != "v1") fail(404, "not_found", "no route for " + req.path, nullptr);
    auto method_not_allowed = [&]() -> HttpResponse {
      fail(405, "method_not_allowed", m + " is not supported on " + req.path, nullptr);
    };
    const std::size_t n = seg.size();
    if (n == 3 && seg[1] == "articles") {
      if (!get) return method_not_allowed();
      return json_response(200, article_to_json(article_or_404(seg[2])));
    }
    if (n == 2 && seg[1] == "search") {
      if (!get) return method_not_allowed();
      return search(req);
    }
    if (n == 2 && seg[1] == "suggest") {
      if (m != "POST") return method_not_allowed();
      return suggest(req);
    }
    if (n == 4 && seg[1] == "steps" && seg[3] == "link") {
      if (!get) return method_not_allowed();
      return step_link(seg[2]);
    }
    if (n == 3 && seg[1] == "hierarchy") {
      if (!get) return method_not_allowed();
      return hierarchy(seg[2], req);
    }
    if (n == 3 && seg[1] == "state") {
      if (!get) return method_not_allowed();
      return state(seg[2], req);
    }
    if (n == 2 && seg[1] == "sessions") {
      if (m != "POST") return method_not_allowed();
      return create_session(req);
    }
    if (n == 3 && seg[1] == "sessions") {
      if (!get) return method_not_allowed();
      auto s = find_session(seg[2]);
      std::lock_guard slock(s->mu);
      s->last_used = now();
      return json_response(200, session_view(seg[2], *s));
    }
    if (n == 4 && seg[1] == "sessions") {
      if (m != "POST") return method_not_allowed();
      return session_action(seg[2], seg[3], req);
    }
    fail(404, "not_found", "no route for " + req.path, nullptr);
  }

  HttpResponse handle(const HttpRequest& req) {
    HttpResponse r;
    if (req.method == "OPTIONS") {
      r.status = 204;
    } else {
      try {
        r = route(req);
      } catch (const ApiError& e) {
        r = error_response(e);
      } catch (const Error& e) {
        r = error_response({status_for(e.code()), std::string(error_code_name(e.code())), e.what(), nullptr});
      } catch (const std::exception& e) {
        r = error_response({500, "internal", e.what(), nullptr});
      }
      const bool get = req.method == "GET" || req.method == "HEAD";
      if (get && r.status == 200) {
        const std::string tag = etag_of(r.body);
        r.headers["ETag"] = tag;
        r.headers["Cache-Control"] = "no-cache";
        const auto inm = req.headers.find("if-none-match");
        if (inm != req.headers.end() && (inm->second == tag || inm->second == "*")) {
          r.status = 304;
          r.body.clear();
        }
      } else if (!get) {
        r.headers["Cache-Control"] = "no-store";
      }
    }
    r.headers["Access-Control-Allow-Origin"] = "*";
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type, If-None-Match";
    r.headers["Access-Control-Expose-Headers"] = "ETag";
    return r;
  }

  void install_routes() {
    server.new_task_queue = [n = config.threads] { return new httplib::ThreadPool(n); };
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    auto h = [this](const httplib::Request& hreq, httplib::Response& hres) {
      HttpRequest req;
      req.method = hreq.method;
      req.path = hreq.path;
      for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
      for (const auto& [k, v] : hreq.headers) {
        std::string lower = k;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        req.headers.emplace(lower, v);
      }
      req.body = hreq.body;
      HttpResponse r = handle(req);
      hres.status = r.status;
      std::string type = "application/json";
      for (const auto& [k, v] : r.headers) {
        if (k == "Content-Type") type = v;
        else hres.set_header(k, v);
      }
      if (!r.body.empty()) hres.set_content(r.body, type);
    };
    server.Get(".*", h);
    server.Post(".*", h);
    server.Options(".*", h);
    server.Put(".*", h);
    server.Delete(".*", h);
    server.Patch(".*", h);
  }

  int bind() {
    const std::string where = config.host + ":" + std::to_string(config.port);
    int port = config.port;
    if (port == 0) {
      port = server.bind_to_any_port(config.host);
      if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + where);
    } else if (!server.bind_to_port(config.host, port)) {
      throw Error(ErrorCode::kIo, "cannot bind " + where);
    }
    return port;
  }
};

Service::Service(ServiceData data, ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  if (config.port < 0 || config.port > 65535)
    throw Error(ErrorCode::kConfig, "port " + std::to_string(config.port) + " is out of range");
  if (config.threads == 0) throw Error(ErrorCode::kConfig, "threads must be at least 1");
  config.suggestion.seed = config.seed;
  config.suggestion.candidate_fields = data.index.steps.fields();
  impl_->data = std::move(data);
  impl_->config = std::move(config);
  impl_->install_routes();
}

Service::~Service() { stop(); }

const ServiceData& Service::data() const { return impl_->data; }
const ServiceConfig& Service::config() const { return impl_->config; }

HttpResponse Service::handle(const HttpRequest& request) { return impl_->handle(request); }

int Service::start() {
  const int port = impl_->bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

std::size_t Service::session_count() {
  const auto t = impl_->now();
  std::lock_guard lock(impl_->store_mu);
  impl_->sweep_locked(t);
  return impl_->sessions.size();
}

void Service::set_clock(Clock clock) {
  std::lock_guard lock(impl_->clock_mu);
  impl_->clock = std::move(clock);
}

}  // namespace prockit
