#pragma once

// HTTP front end over an Analyzer.
//
//   POST /classify      JSON {"text", "token_budget", "linguistics_only",
//                       "embedding_source"}, a text/plain body (options in the
//                       query string) or a multipart form with a "file" part
//   GET  /health        200 when a model is loaded, 503 before
//   GET  /demo/{id}     stored excerpt as text/plain
//   GET  /schema        response JSON schema
//
// The analyzers are swapped in whole; handlers only read them.

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"
#include "keystage/analyzer.hpp"
#include "keystage/config.hpp"

namespace keystage::service {

inline const std::vector<std::string> kDemoIds = {"christmas-carol", "looking-glass", "iliad"};

/// The engine a request runs against. Built once, then read-only.
struct Engine {
  /// Analyzer per embedding source id. "none" has no embeddings; a loaded
  /// embedding file is registered under its file stem and is the default.
  std::map<std::string, std::shared_ptr<const analysis::Analyzer>> analyzers;
  std::string default_source = "none";
};

/// Engine from a loaded model, with the optional embedding set.
std::shared_ptr<const Engine> make_engine(fusion::Classifier model,
                                          std::shared_ptr<const analysis::Resources> resources,
                                          std::shared_ptr<const fusion::EmbeddingSet> embeddings,
                                          std::string embedding_source = {});

struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Parsed /classify input.
struct ClassifyRequest {
  std::string text;
  std::size_t token_budget = 0;  // 0: server default
  bool linguistics_only = false;
  std::string embedding_source;  // empty: server default
};

class Service {
 public:
  explicit Service(config::EngineConfig config,
                   std::shared_ptr<const analysis::Resources> resources = nullptr);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void set_engine(std::shared_ptr<const Engine> engine);
  /// Recorded for /health while no engine is set.
  void set_load_error(std::string message);
  std::shared_ptr<const Engine> engine() const;

  // Transport-independent handlers.
  Reply health() const;
  Reply demo(const std::string& id) const;
  Reply schema() const;
  Reply classify(const ClassifyRequest& request) const;
  /// 401 reply unless `authorization` carries the configured bearer token.
  std::optional<Reply> check_auth(const std::string& authorization) const;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws ResourceError when binding fails.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  const config::EngineConfig& config() const { return config_; }

 private:
  struct Http;
  void install_routes();

  config::EngineConfig config_;
  std::shared_ptr<const analysis::Resources> resources_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Engine> engine_;
  std::string load_error_;
  std::unique_ptr<Http> http_;
  std::thread thread_;
};

/// Error body used by every non-200 reply: {"error": message, "status": n}.
Reply error_reply(int status, const std::string& message);

/// True when `s` is well-formed UTF-8.
bool valid_utf8(std::string_view s);

/// Reads the JSON form of a /classify body. Throws ValidationError.
ClassifyRequest parse_classify_json(const std::string& body);

}  // namespace keystage::service
