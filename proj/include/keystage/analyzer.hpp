#pragma once

// Whole-text pipeline: chunk, extract features, predict per chunk, count
// curriculum features and aggregate into a report. An Analyzer is immutable
// once built and can be shared between threads.

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "keystage/curriculum.hpp"
#include "keystage/fusion.hpp"
#include "keystage/lexicons.hpp"
#include "keystage/report.hpp"
#include "keystage/textseg.hpp"

namespace keystage::analysis {

inline constexpr std::string_view kEngineVersion = "keystage 1.0.0";

struct Resources {
  lexicons::Lexicons lexicons;
  curriculum::Keywords keywords;
  std::filesystem::path demos_dir;

  static std::shared_ptr<const Resources> load(const std::filesystem::path& root);
};

struct AnalyzeOptions {
  std::size_t token_budget = textseg::kDefaultTokenBudget;
  /// Use the linguistic model for every chunk, ignoring embeddings.
  bool linguistics_only = false;
  /// Let a multimodal model answer chunks without an embedding from its
  /// linguistic branch (flagged per chunk) instead of failing.
  bool allow_fallback = false;
};

struct Analysis {
  std::vector<textseg::Chunk> chunks;  // chunks that carried words
  report::AnalysisReport report;
};

class Analyzer {
 public:
  /// Checks that the model was trained on this engine's feature schema.
  Analyzer(fusion::Classifier model, std::shared_ptr<const Resources> resources,
           std::shared_ptr<const fusion::EmbeddingSet> embeddings = nullptr);

  /// Throws DegenerateInputError when the text holds no words, and
  /// ValidationError when a multimodal model lacks an embedding and neither
  /// option permits the fallback.
  Analysis analyze(std::string_view text, const AnalyzeOptions& options) const;

  const fusion::Classifier& model() const { return model_; }
  const Resources& resources() const { return *resources_; }
  const fusion::EmbeddingSet* embeddings() const { return embeddings_.get(); }

  /// Report JSON plus engine and model metadata; no timing.
  nlohmann::json response_json(const Analysis& analysis) const;

 private:
  fusion::Classifier model_;
  std::shared_ptr<const Resources> resources_;
  std::shared_ptr<const fusion::EmbeddingSet> embeddings_;
};

/// Report schema extended with the engine, model and timing blocks that
/// response_json and the service add.
nlohmann::json response_schema();

/// One {"chunk_id", "index", "text"} object per chunk, the embedder's input.
std::vector<nlohmann::json> chunk_records(std::string_view text, std::size_t token_budget);

}  // namespace keystage::analysis
