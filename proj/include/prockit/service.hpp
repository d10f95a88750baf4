#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prockit/bundle.hpp"
#include "prockit/corpus.hpp"
#include "prockit/hierarchy.hpp"
#include "prockit/statetrack.hpp"
#include "prockit/suggest.hpp"

namespace prockit {

struct ServiceConfig {
  std::filesystem::path corpus;
  std::filesystem::path index_dir;
  // Output of the `link` command; without it only corpus hyperlinks are used.
  std::optional<std::filesystem::path> predictions;
  // *.tsv grids and *.jsonl timelines, addressed by file stem.
  std::optional<std::filesystem::path> states_dir;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  SuggestionConfig suggestion;
  // Predicted links scoring below this are treated as unlinkable.
  std::optional<double> link_threshold;
  std::uint64_t seed = 0;
  std::chrono::seconds session_idle{1800};
  std::size_t threads = 8;
};

// JSON object; relative paths resolve against the file's directory. Throws
// Error{kConfig} for unknown keys or bad values, Error{kIo} when unreadable.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig parse_service_config(std::string_view json, const std::filesystem::path& base_dir = {});

// PROCKIT_BIND ("host", "host:port" or ":port") and PROCKIT_CORPUS.
void apply_env_overrides(ServiceConfig& config,
                         const std::function<std::optional<std::string>(const char*)>& getenv);
void apply_env_overrides(ServiceConfig& config);

// Throws Error{kConfig} for a port outside [0, 65535] and Error{kIo} naming
// any configured path that does not exist.
void validate_service_config(const ServiceConfig& config);

// Everything a service instance answers from; immutable once served.
struct ServiceData {
  Corpus corpus;
  IndexBundle index;
  HierarchyGraph hierarchy;
  std::map<std::string, StateGrid> grids;
  std::map<std::string, std::vector<StateChange>> timelines;
};

// Predicted links below `threshold` become unlinkable.
Predictions apply_link_threshold(Predictions predictions, std::optional<double> threshold);

// Loads the configured artifacts. Errors name the failing path.
ServiceData load_service_data(const ServiceConfig& config);

struct HttpRequest {
  std::string method;
  std::string path;  // decoded
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

// From a request target "path?query": both parts are percent-decoded.
HttpRequest make_request(std::string method, std::string_view target, std::string body = {});

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

// One breadcrumb: an article and the step currently shown in it.
struct SessionFrame {
  std::string article_id;
  std::size_t step_index = 0;  // over Article::steps()

  bool operator==(const SessionFrame&) const = default;
};

class Service {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  Service(ServiceData data, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceData& data() const;
  const ServiceConfig& config() const;

  // Routes one request. Safe to call from many threads.
  HttpResponse handle(const HttpRequest& request);

  // Binds and serves on a background thread; returns the bound port. Throws
  // Error{kIo} naming the address when it cannot bind.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  std::size_t session_count();
  void set_clock(Clock clock);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prockit
