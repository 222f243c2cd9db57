#include "keystage/analyzer.hpp"

#include "keystage/errors.hpp"
#include "keystage/lingfeat.hpp"

namespace keystage::analysis {

std::shared_ptr<const Resources> Resources::load(const std::filesystem::path& root) {
  const auto paths = lexicons::ResourcePaths::under(root);
  auto r = std::make_shared<Resources>();
  r->lexicons = lexicons::Lexicons::load(paths);
  r->keywords = curriculum::Keywords::load(paths.curriculum_dir);
  r->demos_dir = paths.demos_dir;
  return r;
}

Analyzer::Analyzer(fusion::Classifier model, std::shared_ptr<const Resources> resources,
                   std::shared_ptr<const fusion::EmbeddingSet> embeddings)
    : model_(std::move(model)), resources_(std::move(resources)), embeddings_(std::move(embeddings)) {
  if (!resources_) throw ValidationError("analyzer: resources are required");
  const auto names = lingfeat::feature_names();
  if (model_.input_dim() != names.size()) {
    throw DimensionError("model expects " + std::to_string(model_.input_dim()) +
                         " features but the extractor produces " + std::to_string(names.size()));
  }
  if (!model_.feature_names().empty() && model_.feature_names() != names) {
    throw ValidationError("model feature names differ from this engine's feature schema");
  }
  if (!model_.schema_version().empty() && model_.schema_version() != lingfeat::kSchemaVersion) {
    throw ValidationError("model was trained on feature schema '" + model_.schema_version() +
                          "', engine provides '" + std::string(lingfeat::kSchemaVersion) + "'");
  }
  if (embeddings_ && model_.multimodal() && embeddings_->dim != model_.embedding_dim()) {
    throw DimensionError("embeddings have dimension " + std::to_string(embeddings_->dim) +
                         " but the model expects " + std::to_string(model_.embedding_dim()));
  }
}

Analysis Analyzer::analyze(std::string_view text, const AnalyzeOptions& options) const {
  if (options.token_budget == 0) throw ValidationError("token budget must be positive");
  Analysis out;
  std::vector<std::string> warnings;
  std::size_t skipped = 0;
  for (auto& chunk : textseg::chunk_document(text, options.token_budget)) {
    if (chunk.segmented.word_count() == 0) {
      ++skipped;
      continue;
    }
    out.chunks.push_back(std::move(chunk));
  }
  if (out.chunks.empty()) throw DegenerateInputError("the text contains no words");
  if (skipped > 0) {
    warnings.push_back(std::to_string(skipped) + " chunk(s) without words were skipped");
  }

  const bool use_embeddings = model_.multimodal() && !options.linguistics_only;
  std::vector<ChunkPrediction> predictions;
  std::vector<const std::vector<fusion::AttentionWeight>*> attention;
  curriculum::Counts counts = curriculum::Counts::zero();
  std::size_t fallbacks = 0;
  for (const auto& chunk : out.chunks) {
    const std::string id = textseg::chunk_id(chunk);
    const auto features = lingfeat::extract_features(chunk.segmented, resources_->lexicons);
    const fusion::EmbeddingRecord* rec = embeddings_ ? embeddings_->find(id) : nullptr;
    ChunkPrediction p;
    if (!model_.multimodal()) {
      p = model_.predict(id, features.values, nullptr, false);
    } else if (options.linguistics_only) {
      p = model_.predict(id, features.values, nullptr, true);
    } else {
      p = model_.predict(id, features.values, rec, options.allow_fallback);
    }
    if (p.fallback) ++fallbacks;
    predictions.push_back(std::move(p));
    attention.push_back(rec != nullptr && rec->attention ? &*rec->attention : nullptr);
    counts += curriculum::count_features(chunk.segmented, resources_->keywords);
  }
  if (use_embeddings && fallbacks > 0) {
    warnings.push_back(std::to_string(fallbacks) + " of " + std::to_string(predictions.size()) +
                       " chunk(s) had no embedding and used the linguistic model only");
  }
  if (embeddings_) {
    for (const auto& w : embeddings_->warnings) warnings.push_back("embeddings: " + w);
  }

  report::ReportInput in;
  in.chunks = out.chunks;
  in.predictions = predictions;
  in.attention = attention;
  in.lexicons = &resources_->lexicons;
  in.curriculum = std::move(counts);
  in.warnings = std::move(warnings);
  in.document = text;
  out.report = report::build_report(in);
  return out;
}

nlohmann::json Analyzer::response_json(const Analysis& analysis) const {
  nlohmann::json j = analysis.report.to_json();
  j["engine"] = {{"version", kEngineVersion},
                 {"feature_schema", lingfeat::kSchemaVersion},
                 {"report_schema", report::kReportSchemaVersion}};
  j["model"] = {{"multimodal", model_.multimodal()},
                {"input_dim", model_.input_dim()},
                {"embedding_dim", model_.embedding_dim()},
                {"parameters", model_.parameter_count()}};
  return j;
}

nlohmann::json response_schema() {
  using nlohmann::json;
  json s = report::report_schema();
  const json str = {{"type", "string"}};
  const json count = {{"type", "integer"}, {"minimum", 0}};
  s["properties"]["engine"] = {
      {"type", "object"},
      {"properties", {{"version", str}, {"feature_schema", str}, {"report_schema", str}}},
      {"required", {"version", "feature_schema", "report_schema"}}};
  s["properties"]["model"] = {
      {"type", "object"},
      {"properties",
       {{"multimodal", {{"type", "boolean"}}},
        {"input_dim", count},
        {"embedding_dim", count},
        {"parameters", count}}},
      {"required", {"multimodal", "input_dim", "embedding_dim", "parameters"}}};
  s["properties"]["timing"] = {{"type", "object"},
                               {"additionalProperties", {{"type", "number"}, {"minimum", 0}}}};
  return s;
}

std::vector<nlohmann::json> chunk_records(std::string_view text, std::size_t token_budget) {
  std::vector<nlohmann::json> out;
  for (const auto& chunk : textseg::chunk_document(text, token_budget)) {
    out.push_back(
        {{"chunk_id", textseg::chunk_id(chunk)}, {"index", chunk.index}, {"text", chunk.text}});
  }
  return out;
}

}  // namespace keystage::analysis
