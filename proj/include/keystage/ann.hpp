#pragma once

// ReLU feedforward classifier over KS2..KS5 with softmax output, trained by
// mini-batch SGD on cross-entropy with early stopping on validation macro-F1.
//
// The output layer may take an optional "side" input that is concatenated
// with the last hidden activations. The unimodal classifier has side_dim 0;
// the late-fusion head uses it for the frozen transformer vector.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "keystage/key_stage.hpp"

namespace keystage::ann {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Probabilities = std::array<double, kNumClasses>;

struct Topology {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t side_dim = 0;
  std::size_t output = kNumClasses;

  std::size_t last_hidden() const { return hidden.empty() ? input_dim : hidden.back(); }
  /// Sum of n_in * n_out + n_out over all layers (side block included).
  std::size_t parameter_count() const;
  /// 1..5 hidden layers of width 16..256, positive input dim.
  void validate() const;
  bool operator==(const Topology&) const = default;
};

/// z-score statistics fitted on training rows; zero variance gets std 1.
struct Standardizer {
  Vector mean;
  Vector std;

  static Standardizer fit(const Matrix& x);
  static Standardizer identity(std::size_t dim);
  Matrix apply(const Matrix& x) const;
};

struct Layer {
  Matrix w;  // out x in
  Vector b;  // out
};

struct Activations {
  std::vector<Matrix> z;  // pre-activations per layer, rows = samples
  std::vector<Matrix> a;  // a[0] = standardized input, a[k+1] = relu(z[k]) for hidden layers
  Matrix logits;
  Matrix probs;
};

struct Gradients {
  std::vector<Layer> layers;
  Matrix side_w;
};

class Mlp {
 public:
  Mlp() = default;
  /// Glorot-uniform weights, zero biases, identity standardization. The side
  /// block starts at zero so a fresh side input does not perturb the output.
  Mlp(Topology topology, std::uint64_t seed);

  const Topology& topology() const { return topology_; }
  std::size_t parameter_count() const { return topology_.parameter_count(); }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  /// out x side_dim; empty when side_dim is 0.
  Matrix& side_weights() { return side_w_; }
  const Matrix& side_weights() const { return side_w_; }
  Standardizer& scaler() { return scaler_; }
  const Standardizer& scaler() const { return scaler_; }

  /// Copy with an output-layer side input of `side_dim` columns, all zero.
  Mlp with_side_input(std::size_t side_dim) const;
  /// Copy without the side block.
  Mlp without_side_input() const;

  /// Batch forward. `side` must have side_dim columns (or be empty when 0).
  Activations forward_batch(const Matrix& x, const Matrix& side = Matrix()) const;
  Matrix predict_proba(const Matrix& x, const Matrix& side = Matrix()) const;
  /// Last hidden-layer activations (input to the output layer, side excluded).
  Matrix hidden_batch(const Matrix& x) const;

  /// Single-item forward; throws DimensionError on length mismatch.
  Probabilities forward(std::span<const double> features,
                        std::span<const double> side = {}) const;

  /// Mean cross-entropy and its gradient for a batch.
  double loss_and_gradients(const Matrix& x, const Matrix& side, const std::vector<int>& y,
                            Gradients& grads) const;
  double loss(const Matrix& x, const Matrix& side, const std::vector<int>& y) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  std::vector<std::string> feature_names;
  std::string schema_version;

 private:
  void check_input(const Matrix& x, const Matrix& side) const;

  Topology topology_;
  std::vector<Layer> layers_;
  Matrix side_w_;
  Standardizer scaler_;
};

/// Row-wise argmax with ties going to the lower class index.
std::size_t argmax(std::span<const double> probs);
std::vector<int> argmax_rows(const Matrix& probs);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [true][pred]
  std::array<double, kNumClasses> per_class_f1{};
  double inference_time_s = 0.0;
  std::size_t parameter_count = 0;

  /// Rows divided by their supports; a class with no support is all zeros.
  std::array<std::array<double, kNumClasses>, kNumClasses> normalized_confusion() const;
};

/// Macro-averaged metrics; undefined per-class precision/recall count as 0.
Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted);

struct Dataset {
  Matrix x;
  Matrix side;  // empty unless the model takes a side input
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  void validate(const Topology& t) const;
};

Metrics evaluate(const Mlp& model, const Dataset& data);

struct TrainConfig {
  double learning_rate = 0.001;
  double momentum = 0.0;
  std::size_t patience = 15;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Fit the standardizer on the training rows before the first epoch.
  bool fit_scaler = true;
  /// Update only the output layer (and side block); hidden layers stay fixed.
  bool freeze_hidden = false;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainResult {
  Mlp model;  // best validation-F1 snapshot
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_f1 = -1.0;
  bool stopped_early = false;
};

/// Trains a copy of `init`. Batches come from a Fisher-Yates shuffle seeded
/// from config.seed, so the whole run is a function of its inputs.
TrainResult train(const Mlp& init, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config);

struct SearchSpace {
  std::size_t min_layers = 1;
  std::size_t max_layers = 5;
  std::size_t min_width = 16;
  std::size_t max_width = 256;

  void validate() const;
};

struct Trial {
  std::size_t index = 0;
  Topology topology;
  std::uint64_t seed = 0;
  std::optional<Metrics> metrics;  // empty when training failed
  std::size_t best_epoch = 0;
  std::string error;
};

struct SearchResult {
  std::vector<Trial> ranked;
  std::optional<Mlp> best_model;
};

/// Topologies drawn up front from `seed`; each trial trains with
/// derive_seed(seed, index), so results do not depend on `threads`.
SearchResult random_search(const SearchSpace& space, std::size_t n_trials,
                           const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& config, std::uint64_t seed,
                           std::size_t threads = 1);

/// F1 descending, then parameter count ascending, then trial index. Failed
/// trials go last.
void rank_trials(std::vector<Trial>& trials);

std::vector<Topology> sample_topologies(const SearchSpace& space, std::size_t input_dim,
                                        std::size_t n, std::uint64_t seed);

void save_model(const Mlp& model, const std::filesystem::path& path);
Mlp load_model(const std::filesystem::path& path);

nlohmann::json metrics_json(const Metrics& m);

}  // namespace keystage::ann
