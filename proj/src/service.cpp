#include "keystage/service.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

// Bursts of clients should queue rather than be dropped.
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#include "httplib.h"
#include "keystage/errors.hpp"
#include "keystage/lingfeat.hpp"

namespace keystage::service {

using nlohmann::json;

struct Service::Http {
  httplib::Server server;
};

namespace {

bool blank(std::string_view s) {
  for (unsigned char c : s) {
    if (!std::isspace(c)) return false;
  }
  return true;
}

bool parse_flag(const std::string& name, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0" || value.empty()) return false;
  throw ValidationError(name + " must be true or false");
}

std::size_t parse_budget(const std::string& value) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size() || v <= 0) throw ValidationError("token_budget must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::optional<std::string> read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

Reply error_reply(int status, const std::string& message) {
  return {status, "application/json", json{{"error", message}, {"status", status}}.dump()};
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      n = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      n = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      n = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + n >= s.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto d = static_cast<unsigned char>(s[i + k]);
      if ((d & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (d & 0x3F);
    }
    // Overlong forms, surrogates and values past U+10FFFF.
    if ((n == 1 && cp < 0x80) || (n == 2 && cp < 0x800) || (n == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += n + 1;
  }
  return true;
}

ClassifyRequest parse_classify_json(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  ClassifyRequest r;
  for (const auto& [key, value] : j.items()) {
    if (key == "text") {
      if (!value.is_string()) throw ValidationError("text must be a string");
      r.text = value.get<std::string>();
    } else if (key == "token_budget") {
      if (value.is_null()) continue;
      if (!value.is_number_integer() || value.get<long long>() <= 0) {
        throw ValidationError("token_budget must be a positive integer");
      }
      r.token_budget = value.get<std::size_t>();
    } else if (key == "linguistics_only") {
      if (!value.is_boolean()) throw ValidationError("linguistics_only must be a boolean");
      r.linguistics_only = value.get<bool>();
    } else if (key == "embedding_source") {
      if (value.is_null()) continue;
      if (!value.is_string()) throw ValidationError("embedding_source must be a string");
      r.embedding_source = value.get<std::string>();
    } else {
      throw ValidationError("unknown field '" + key + "'");
    }
  }
  if (!j.contains("text")) throw ValidationError("missing field 'text'");
  return r;
}

std::shared_ptr<const Engine> make_engine(fusion::Classifier model,
                                          std::shared_ptr<const analysis::Resources> resources,
                                          std::shared_ptr<const fusion::EmbeddingSet> embeddings,
                                          std::string embedding_source) {
  auto e = std::make_shared<Engine>();
  e->analyzers["none"] = std::make_shared<const analysis::Analyzer>(model, resources);
  if (embeddings) {
    if (embedding_source.empty() || embedding_source == "none") {
      throw ValidationError("embedding source needs a name other than 'none'");
    }
    e->analyzers[embedding_source] =
        std::make_shared<const analysis::Analyzer>(std::move(model), resources, embeddings);
    e->default_source = embedding_source;
  }
  return e;
}

Service::Service(config::EngineConfig config, std::shared_ptr<const analysis::Resources> resources)
    : config_(std::move(config)), resources_(std::move(resources)), http_(std::make_unique<Http>()) {
  config_.validate();
  install_routes();
}

Service::~Service() { stop(); }

void Service::set_engine(std::shared_ptr<const Engine> engine) {
  std::lock_guard lock(mutex_);
  engine_ = std::move(engine);
  load_error_.clear();
}

void Service::set_load_error(std::string message) {
  std::lock_guard lock(mutex_);
  load_error_ = std::move(message);
}

std::shared_ptr<const Engine> Service::engine() const {
  std::lock_guard lock(mutex_);
  return engine_;
}

Reply Service::health() const {
  std::shared_ptr<const Engine> e;
  std::string load_error;
  {
    std::lock_guard lock(mutex_);
    e = engine_;
    load_error = load_error_;
  }
  const bool ready = e != nullptr;
  json j = {{"status", ready ? "ready" : "not-ready"},
            {"model_loaded", ready},
            {"resources_loaded", resources_ != nullptr},
            {"engine", analysis::kEngineVersion},
            {"feature_schema", lingfeat::kSchemaVersion},
            {"report_schema", report::kReportSchemaVersion}};
  if (ready) {
    const auto& model = e->analyzers.at("none")->model();
    j["model"] = {{"multimodal", model.multimodal()}, {"input_dim", model.input_dim()}};
    json sources = json::array();
    for (const auto& [id, a] : e->analyzers) sources.push_back(id);
    j["embedding_sources"] = sources;
    j["default_embedding_source"] = e->default_source;
  }
  if (!load_error.empty()) j["error"] = load_error;
  return {ready ? 200 : 503, "application/json", j.dump()};
}

Reply Service::demo(const std::string& id) const {
  if (std::find(kDemoIds.begin(), kDemoIds.end(), id) == kDemoIds.end()) {
    return error_reply(404, "unknown demo '" + id + "'");
  }
  const std::filesystem::path dir =
      resources_ ? resources_->demos_dir : lexicons::ResourcePaths::under(lexicons::ResourcePaths::default_root()).demos_dir;
  const auto text = read_text_file(dir / (id + ".txt"));
  if (!text) return error_reply(500, "demo excerpt '" + id + "' is missing from " + dir.string());
  return {200, "text/plain; charset=utf-8", *text};
}

Reply Service::schema() const {
  return {200, "application/schema+json", analysis::response_schema().dump()};
}

std::optional<Reply> Service::check_auth(const std::string& authorization) const {
  if (config_.token.empty()) return std::nullopt;
  const std::string expected = "Bearer " + config_.token;
  // Length check first, then a comparison that does not stop early.
  bool same = authorization.size() == expected.size();
  unsigned char diff = 0;
  for (std::size_t i = 0; same && i < expected.size(); ++i) {
    diff |= static_cast<unsigned char>(authorization[i] ^ expected[i]);
  }
  if (same && diff == 0) return std::nullopt;
  Reply r = error_reply(401, authorization.empty() ? "missing bearer token" : "invalid bearer token");
  return r;
}

Reply Service::classify(const ClassifyRequest& request) const {
  const auto started = std::chrono::steady_clock::now();
  const auto e = engine();
  if (!e) return error_reply(503, "model not loaded");
  if (request.text.size() > config_.max_body_bytes) {
    return error_reply(413, "text exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
  }
  if (!valid_utf8(request.text)) return error_reply(422, "text is not valid UTF-8");
  if (blank(request.text)) return error_reply(422, "text is empty");

  const std::string source =
      request.embedding_source.empty() ? e->default_source : request.embedding_source;
  const auto it = e->analyzers.find(source);
  if (it == e->analyzers.end()) return error_reply(422, "unknown embedding source '" + source + "'");

  analysis::AnalyzeOptions options;
  options.token_budget = request.token_budget == 0 ? config_.token_budget : request.token_budget;
  options.linguistics_only = request.linguistics_only;
  options.allow_fallback = config_.allow_fallback;
  json j;
  try {
    j = it->second->response_json(it->second->analyze(request.text, options));
  } catch (const DegenerateInputError& ex) {
    return error_reply(422, ex.what());
  } catch (const ValidationError& ex) {
    return error_reply(422, ex.what());
  }
  j["embedding_source"] = source;
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  j["timing"] = {{"analysis_ms", ms}};
  return {200, "application/json", j.dump()};
}

void Service::install_routes() {
  auto& s = http_->server;
  s.set_payload_max_length(config_.max_body_bytes);
  s.set_read_timeout(config_.request_timeout_s, 0);
  s.set_write_timeout(config_.request_timeout_s, 0);
  const std::size_t threads = config_.threads;
  s.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* what = res.status == 413 ? "request body too large" : httplib::status_message(res.status);
    send(res, error_reply(res.status, what));
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, msg));
  });

  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  s.Get("/schema", [this](const httplib::Request&, httplib::Response& res) { send(res, schema()); });
  s.Get(R"(/demo/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, demo(req.matches[1]));
  });

  s.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto denied = check_auth(req.get_header_value("Authorization"))) {
      res.set_header("WWW-Authenticate", "Bearer");
      return send(res, *denied);
    }
    ClassifyRequest r;
    try {
      const std::string type = req.get_header_value("Content-Type");
      if (req.is_multipart_form_data()) {
        if (req.has_file("file")) {
          r.text = req.get_file_value("file").content;
        } else if (req.has_file("text")) {
          r.text = req.get_file_value("text").content;
        }
        if (req.has_file("token_budget")) {
          r.token_budget = parse_budget(req.get_file_value("token_budget").content);
        }
        if (req.has_file("linguistics_only")) {
          r.linguistics_only =
              parse_flag("linguistics_only", req.get_file_value("linguistics_only").content);
        }
        if (req.has_file("embedding_source")) {
          r.embedding_source = req.get_file_value("embedding_source").content;
        }
      } else if (type.rfind("application/json", 0) == 0) {
        r = parse_classify_json(req.body);
      } else {
        r.text = req.body;
        if (req.has_param("token_budget")) r.token_budget = parse_budget(req.get_param_value("token_budget"));
        if (req.has_param("linguistics_only")) {
          r.linguistics_only = parse_flag("linguistics_only", req.get_param_value("linguistics_only"));
        }
        if (req.has_param("embedding_source")) r.embedding_source = req.get_param_value("embedding_source");
      }
    } catch (const ValidationError& e) {
      return send(res, error_reply(422, e.what()));
    }
    send(res, classify(r));
  });
}

int Service::start(const std::string& host, int port) {
  auto& s = http_->server;
  int bound = port;
  if (port == 0) {
    bound = s.bind_to_any_port(host);
  } else if (!s.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw ResourceError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return bound;
}

void Service::run(const std::string& host, int port) {
  if (!http_->server.listen(host, port)) {
    throw ResourceError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Service::stop() {
  if (http_) http_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace keystage::service
