#pragma once

// Engine settings from a key = value file ([section] headers prefix keys
// with "section.") with ENGINE_* environment overrides.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace keystage::config {

inline constexpr std::size_t kDefaultMaxBodyBytes = 1 << 20;

struct EngineConfig {
  std::filesystem::path model_path;
  std::filesystem::path resources_dir;  // empty: compiled-in default
  std::filesystem::path embeddings_path;
  std::string token;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_body_bytes = kDefaultMaxBodyBytes;
  std::size_t token_budget = 512;
  bool allow_fallback = true;
  std::size_t threads = 8;
  int request_timeout_s = 60;

  void validate() const;
};

/// Parses "key = value" lines. '#' starts a comment outside quotes; values
/// may be double-quoted. Throws ValidationError with the line number on
/// malformed lines.
std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& source = "<config>");

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Applies parsed keys (unknown keys are an error), then ENGINE_MODEL_PATH,
/// ENGINE_TOKEN, ENGINE_PORT, ENGINE_RESOURCES and ENGINE_EMBEDDINGS.
EngineConfig from_key_values(const std::map<std::string, std::string>& kv,
                             const EnvLookup& env = process_env);

/// `path` may be empty, meaning defaults plus environment.
EngineConfig load(const std::filesystem::path& path, const EnvLookup& env = process_env);

}  // namespace keystage::config
