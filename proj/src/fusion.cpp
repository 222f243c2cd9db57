#include "keystage/fusion.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "keystage/errors.hpp"

namespace keystage::fusion {

namespace {

constexpr const char* kFusedFormat = "keystage-fused/1";

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

const EmbeddingRecord* EmbeddingSet::find(const std::string& chunk_id) const {
  const auto it = records.find(chunk_id);
  return it == records.end() ? nullptr : &it->second;
}

EmbeddingSet parse_embeddings(std::istream& in, const std::string& source) {
  EmbeddingSet set;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> models;
  std::size_t with_attention = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    EmbeddingRecord rec;
    try {
      const auto j = nlohmann::json::parse(line);
      rec.chunk_id = j.at("chunk_id").get<std::string>();
      rec.vector = j.at("vector").get<std::vector<double>>();
      rec.model = j.value("model", std::string());
      if (j.contains("dim") && !j["dim"].is_null() &&
          j["dim"].get<std::size_t>() != rec.vector.size()) {
        throw ValidationError(where + "dim field " + j["dim"].dump() + " but vector has " +
                              std::to_string(rec.vector.size()) + " values");
      }
      if (j.contains("attention") && !j["attention"].is_null()) {
        std::vector<AttentionWeight> att;
        std::size_t last_start = 0;
        bool ordered = true;
        for (const auto& a : j["attention"]) {
          AttentionWeight w;
          w.token = a.at("token").get<std::string>();
          w.start = a.at("start").get<std::size_t>();
          w.end = a.at("end").get<std::size_t>();
          w.weight = a.at("weight").get<double>();
          if (!std::isfinite(w.weight) || w.weight < 0.0) {
            throw ValidationError(where + "attention weight for '" + w.token +
                                  "' must be finite and non-negative");
          }
          if (w.end < w.start || w.start < last_start) ordered = false;
          last_start = w.start;
          att.push_back(std::move(w));
        }
        if (!ordered) {
          set.warnings.push_back(where + "attention offsets are not in increasing order");
        }
        rec.attention = std::move(att);
        ++with_attention;
      }
      if (j.contains("logits") && !j["logits"].is_null()) {
        const auto l = j["logits"].get<std::vector<double>>();
        if (l.size() != kNumClasses) throw ValidationError(where + "logits must have 4 values");
        rec.logits = std::array<double, kNumClasses>{l[0], l[1], l[2], l[3]};
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (rec.vector.empty()) throw ValidationError(where + "empty vector");
    if (!all_finite(rec.vector)) throw ValidationError(where + "vector has non-finite values");
    if (set.dim == 0) {
      set.dim = rec.vector.size();
    } else if (rec.vector.size() != set.dim) {
      throw ValidationError(where + "vector dimension " + std::to_string(rec.vector.size()) +
                            " differs from " + std::to_string(set.dim));
    }
    models.insert(rec.model);
    const std::string id = rec.chunk_id;
    if (!set.records.emplace(id, std::move(rec)).second) {
      throw ValidationError(where + "duplicate chunk_id '" + id + "'");
    }
  }
  if (models.size() > 1) set.warnings.push_back(source + ": records name more than one model");
  if (with_attention > 0 && with_attention < set.records.size()) {
    set.warnings.push_back(source + ": attention present on " + std::to_string(with_attention) +
                           " of " + std::to_string(set.records.size()) + " records");
  }
  return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open embeddings " + path.string());
  return parse_embeddings(in, path.string());
}

nlohmann::json record_json(const EmbeddingRecord& r) {
  nlohmann::json j;
  j["chunk_id"] = r.chunk_id;
  j["vector"] = r.vector;
  if (r.attention) {
    j["attention"] = nlohmann::json::array();
    for (const auto& a : *r.attention) {
      j["attention"].push_back(
          {{"token", a.token}, {"start", a.start}, {"end", a.end}, {"weight", a.weight}});
    }
  } else {
    j["attention"] = nullptr;
  }
  j["logits"] = r.logits ? nlohmann::json(*r.logits) : nlohmann::json(nullptr);
  j["model"] = r.model;
  j["dim"] = r.vector.size();
  return j;
}

nlohmann::json FusedModel::to_json() const {
  return {{"format", kFusedFormat},
          {"embedding_model", embedding_model},
          {"embedding_dim", embedding_dim()},
          {"network", network.to_json()},
          {"fallback", fallback.to_json()}};
}

FusedModel FusedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFusedFormat) {
      throw ValidationError("unsupported fused model format " + j.at("format").dump());
    }
    FusedModel m;
    m.embedding_model = j.value("embedding_model", std::string());
    m.network = ann::Mlp::from_json(j.at("network"));
    m.fallback = ann::Mlp::from_json(j.at("fallback"));
    if (m.embedding_dim() == 0 || m.embedding_dim() != j.at("embedding_dim").get<std::size_t>()) {
      throw ValidationError("fused model: embedding_dim disagrees with the network");
    }
    if (m.fallback.topology().side_dim != 0 ||
        m.fallback.topology().input_dim != m.network.topology().input_dim) {
      throw ValidationError("fused model: fallback does not match the linguistic branch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed fused model: ") + e.what());
  }
}

FusedModel fuse_from_unimodal(const ann::Mlp& unimodal, std::size_t embedding_dim,
                              std::string embedding_model) {
  if (embedding_dim == 0) throw ValidationError("embedding dimension must be positive");
  if (unimodal.topology().side_dim != 0) throw ValidationError("model is already fused");
  FusedModel m;
  m.network = unimodal.with_side_input(embedding_dim);
  m.fallback = unimodal;
  m.embedding_model = std::move(embedding_model);
  return m;
}

FusedModel fuse_fresh(const ann::Topology& branch, std::size_t embedding_dim,
                      std::uint64_t seed, std::string embedding_model) {
  ann::Topology t = branch;
  t.side_dim = 0;
  return fuse_from_unimodal(ann::Mlp(t, seed), embedding_dim, std::move(embedding_model));
}

ann::Matrix gather_embeddings(const EmbeddingSet& embeddings, const std::vector<std::string>& ids) {
  ann::Matrix side(static_cast<Eigen::Index>(ids.size()),
                   static_cast<Eigen::Index>(embeddings.dim));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const EmbeddingRecord* rec = embeddings.find(ids[i]);
    if (rec == nullptr) throw ValidationError("no embedding for chunk id '" + ids[i] + "'");
    for (std::size_t d = 0; d < embeddings.dim; ++d) {
      side(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rec->vector[d];
    }
  }
  return side;
}

namespace {

ann::Dataset fused_dataset(const FusedModel& model, const EmbeddingSet& embeddings,
                           const LabeledFeatures& data) {
  if (embeddings.dim != model.embedding_dim()) {
    throw DimensionError("embedding dimension " + std::to_string(embeddings.dim) +
                         " but the model expects " + std::to_string(model.embedding_dim()));
  }
  if (data.chunk_ids.size() != data.y.size()) {
    throw DimensionError("chunk ids and labels differ in count");
  }
  return {data.x, gather_embeddings(embeddings, data.chunk_ids), data.y};
}

}  // namespace

FusedTrainResult train_fused(const FusedModel& init, const EmbeddingSet& embeddings,
                             const LabeledFeatures& train_set, const LabeledFeatures& val_set,
                             const ann::TrainConfig& config) {
  FusedTrainResult out;
  out.run = ann::train(init.network, fused_dataset(init, embeddings, train_set),
                       fused_dataset(init, embeddings, val_set), config);
  out.model = init;
  out.model.network = out.run.model;
  return out;
}

ann::Metrics evaluate_fused(const FusedModel& model, const EmbeddingSet& embeddings,
                            const LabeledFeatures& data) {
  return ann::evaluate(model.network, fused_dataset(model, embeddings, data));
}

void save_fused(const FusedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << model.to_json().dump() << '\n';
}

Classifier::Classifier(ann::Mlp unimodal) : unimodal_(std::move(unimodal)) {
  if (unimodal_->topology().side_dim != 0) {
    throw ValidationError("a model with a side input needs its fallback; load it as fused");
  }
}

Classifier::Classifier(FusedModel fused) : fused_(std::move(fused)) {}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) == kFusedFormat) return Classifier(FusedModel::from_json(j));
  return Classifier(ann::Mlp::from_json(j));
}

const ann::Mlp& Classifier::linguistic() const {
  return fused_ ? fused_->fallback : *unimodal_;
}

std::size_t Classifier::input_dim() const { return linguistic().topology().input_dim; }

std::size_t Classifier::parameter_count() const {
  return fused_ ? fused_->network.topology().parameter_count()
                : unimodal_->topology().parameter_count();
}

ChunkPrediction Classifier::predict(std::string chunk_id, std::span<const double> features,
                                    const EmbeddingRecord* embedding, bool allow_fallback) const {
  if (!fused_) return make_prediction(std::move(chunk_id), unimodal_->forward(features));
  if (embedding == nullptr) {
    if (!allow_fallback) {
      throw ValidationError("no embedding for chunk id '" + chunk_id +
                            "' (use the linguistics-only fallback to continue)");
    }
    ChunkPrediction p = make_prediction(std::move(chunk_id), fused_->fallback.forward(features));
    p.fallback = true;
    return p;
  }
  return make_prediction(std::move(chunk_id), fused_->network.forward(features, embedding->vector));
}

}  // namespace keystage::fusion
