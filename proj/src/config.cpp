#include "keystage/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "keystage/errors.hpp"

namespace keystage::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("config: " + key + " must be an integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config: " + key + " must be true or false, got '" + value + "'");
}

std::size_t to_size(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < 0) throw ValidationError("config: " + key + " must not be negative");
  return static_cast<std::size_t>(v);
}

void apply(EngineConfig& c, const std::string& key, const std::string& value) {
  if (key == "model_path" || key == "model.path") {
    c.model_path = value;
  } else if (key == "resources_dir" || key == "resources.dir") {
    c.resources_dir = value;
  } else if (key == "embeddings_path" || key == "embeddings.path") {
    c.embeddings_path = value;
  } else if (key == "token" || key == "server.token") {
    c.token = value;
  } else if (key == "host" || key == "server.host") {
    c.host = value;
  } else if (key == "port" || key == "server.port") {
    c.port = static_cast<int>(to_integer(key, value));
  } else if (key == "max_body_bytes" || key == "server.max_body_bytes") {
    c.max_body_bytes = to_size(key, value);
  } else if (key == "token_budget" || key == "analysis.token_budget") {
    c.token_budget = to_size(key, value);
  } else if (key == "allow_fallback" || key == "analysis.allow_fallback") {
    c.allow_fallback = to_bool(key, value);
  } else if (key == "threads" || key == "server.threads") {
    c.threads = to_size(key, value);
  } else if (key == "request_timeout_s" || key == "server.request_timeout_s") {
    c.request_timeout_s = static_cast<int>(to_integer(key, value));
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

}  // namespace

void EngineConfig::validate() const {
  if (port < 0 || port > 65535) throw ValidationError("config: port out of range");
  if (max_body_bytes == 0) throw ValidationError("config: max_body_bytes must be positive");
  if (token_budget == 0) throw ValidationError("config: token_budget must be positive");
  if (threads == 0) throw ValidationError("config: threads must be positive");
  if (request_timeout_s <= 0) throw ValidationError("config: request_timeout_s must be positive");
}

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ValidationError(where + "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ValidationError(where + "empty key");
    std::string value = trim(body.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string::npos) throw ValidationError(where + "unterminated string");
      const std::string rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ValidationError(where + "text after string");
      value = value.substr(1, close - 1);
    } else if (const auto hash = value.find('#'); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

EngineConfig from_key_values(const std::map<std::string, std::string>& kv, const EnvLookup& env) {
  EngineConfig c;
  for (const auto& [k, v] : kv) apply(c, k, v);
  if (auto v = env("ENGINE_MODEL_PATH")) c.model_path = *v;
  if (auto v = env("ENGINE_TOKEN")) c.token = *v;
  if (auto v = env("ENGINE_PORT")) c.port = static_cast<int>(to_integer("ENGINE_PORT", *v));
  if (auto v = env("ENGINE_RESOURCES")) c.resources_dir = *v;
  if (auto v = env("ENGINE_EMBEDDINGS")) c.embeddings_path = *v;
  c.validate();
  return c;
}

EngineConfig load(const std::filesystem::path& path, const EnvLookup& env) {
  if (path.empty()) return from_key_values({}, env);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_key_values(parse_key_values(ss.str(), path.string()), env);
}

}  // namespace keystage::config
