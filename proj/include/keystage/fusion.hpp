#pragma once

// Late fusion of frozen transformer chunk vectors with the linguistic
// network. The fused head is one affine layer over
// [embedding | last hidden activations]; the embedding enters through the
// side block of ann::Mlp, so it is never standardized or updated.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "keystage/ann.hpp"
#include "keystage/prediction.hpp"

namespace keystage::fusion {

struct AttentionWeight {
  std::string token;
  std::size_t start = 0;  // byte offsets into the chunk text
  std::size_t end = 0;
  double weight = 0.0;
};

struct EmbeddingRecord {
  std::string chunk_id;
  std::vector<double> vector;
  std::optional<std::vector<AttentionWeight>> attention;
  std::optional<std::array<double, kNumClasses>> logits;
  std::string model;
};

struct EmbeddingSet {
  std::map<std::string, EmbeddingRecord> records;
  std::size_t dim = 0;
  std::vector<std::string> warnings;

  const EmbeddingRecord* find(const std::string& chunk_id) const;
  std::size_t size() const { return records.size(); }
};

/// One JSON object per line (blank lines skipped). Rejects dimension
/// disagreement, duplicate ids, negative or non-finite attention weights,
/// non-finite vectors, logits not of length 4. Softer problems (mixed model
/// names, attention on some records only, offsets out of order) become
/// warnings.
EmbeddingSet parse_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingSet load_embeddings(const std::filesystem::path& path);

nlohmann::json record_json(const EmbeddingRecord& r);

struct FusedModel {
  ann::Mlp network;   // side_dim == embedding dim
  ann::Mlp fallback;  // the linguistic model alone
  std::string embedding_model;

  std::size_t embedding_dim() const { return network.topology().side_dim; }
  nlohmann::json to_json() const;
  static FusedModel from_json(const nlohmann::json& j);
};

/// Fused model whose branch and hidden block come from `unimodal` and whose
/// embedding block is zero, so it reproduces `unimodal` until trained.
FusedModel fuse_from_unimodal(const ann::Mlp& unimodal, std::size_t embedding_dim,
                              std::string embedding_model = {});

/// Fused model with fresh weights. Draws exactly the numbers
/// ann::Mlp(topology, seed) draws, so with all-zero embeddings fused training
/// follows the unimodal trajectory.
FusedModel fuse_fresh(const ann::Topology& branch, std::size_t embedding_dim,
                      std::uint64_t seed, std::string embedding_model = {});

struct LabeledFeatures {
  ann::Matrix x;  // rows = chunks
  std::vector<std::string> chunk_ids;
  std::vector<int> y;
};

/// Side matrix for `ids`, one embedding row each. Throws ValidationError
/// naming the first id with no record.
ann::Matrix gather_embeddings(const EmbeddingSet& embeddings, const std::vector<std::string>& ids);

struct FusedTrainResult {
  FusedModel model;
  ann::TrainResult run;
};

/// Trains the head and (unless config.freeze_hidden) the linguistic branch.
/// The fallback is left untouched.
FusedTrainResult train_fused(const FusedModel& init, const EmbeddingSet& embeddings,
                             const LabeledFeatures& train_set, const LabeledFeatures& val_set,
                             const ann::TrainConfig& config);

ann::Metrics evaluate_fused(const FusedModel& model, const EmbeddingSet& embeddings,
                            const LabeledFeatures& data);

void save_fused(const FusedModel& model, const std::filesystem::path& path);

/// A loaded model file: either a unimodal network or a fused model.
class Classifier {
 public:
  explicit Classifier(ann::Mlp unimodal);
  explicit Classifier(FusedModel fused);

  /// Accepts files written by ann::save_model or save_fused.
  static Classifier load(const std::filesystem::path& path);

  bool multimodal() const { return fused_.has_value(); }
  std::size_t input_dim() const;
  /// 0 for a unimodal model.
  std::size_t embedding_dim() const { return fused_ ? fused_->embedding_dim() : 0; }
  std::size_t parameter_count() const;
  const ann::Mlp& linguistic() const;
  const std::vector<std::string>& feature_names() const { return linguistic().feature_names; }
  const std::string& schema_version() const { return linguistic().schema_version; }

  /// Multimodal models need `embedding` unless `allow_fallback`, in which case
  /// a missing embedding is answered by the linguistic model and flagged.
  ChunkPrediction predict(std::string chunk_id, std::span<const double> features,
                          const EmbeddingRecord* embedding, bool allow_fallback) const;

 private:
  std::optional<ann::Mlp> unimodal_;
  std::optional<FusedModel> fused_;
};

}  // namespace keystage::fusion
