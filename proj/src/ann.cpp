#include "keystage/ann.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "keystage/errors.hpp"
#include "keystage/rng.hpp"

namespace keystage::ann {

namespace {

constexpr const char* kModelFormat = "keystage-mlp/1";

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      p(r, c) = std::exp(logits(r, c) - m);
      sum += p(r, c);
    }
    p.row(r) /= sum;
  }
  return p;
}

Matrix affine(const Matrix& a, const Layer& layer) {
  Matrix z = a * layer.w.transpose();
  z.rowwise() += layer.b.transpose();
  return z;
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                   const std::string& what) {
  if (!j.is_array() || j.size() != rows) throw ValidationError(what + ": wrong row count");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ValidationError(what + ": wrong column count");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from(const nlohmann::json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) throw ValidationError(what + ": wrong length");
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

std::size_t Topology::parameter_count() const {
  std::size_t total = 0;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    total += in * h + h;
    in = h;
  }
  return total + (in + side_dim) * output + output;
}

void Topology::validate() const {
  if (input_dim == 0) throw ValidationError("topology: input dimension must be positive");
  if (hidden.empty() || hidden.size() > 5) {
    throw ValidationError("topology: between 1 and 5 hidden layers required, got " +
                          std::to_string(hidden.size()));
  }
  for (std::size_t h : hidden) {
    if (h < 16 || h > 256) {
      throw ValidationError("topology: hidden width " + std::to_string(h) +
                            " outside 16..256");
    }
  }
  if (output != kNumClasses) throw ValidationError("topology: output must have 4 classes");
}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw DegenerateInputError("cannot fit standardization on zero rows");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.std.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(x.rows());
    const double sd = std::sqrt(var);
    s.std(c) = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  Standardizer s;
  s.mean = Vector::Zero(static_cast<Eigen::Index>(dim));
  s.std = Vector::Ones(static_cast<Eigen::Index>(dim));
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= std.transpose().array();
  return out;
}

Mlp::Mlp(Topology topology, std::uint64_t seed) : topology_(std::move(topology)) {
  if (topology_.input_dim == 0) throw ValidationError("topology: input dimension must be positive");
  Rng rng(seed);
  std::size_t in = topology_.input_dim;
  std::vector<std::size_t> outs = topology_.hidden;
  outs.push_back(topology_.output);
  for (std::size_t out : outs) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer;
    layer.w.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = rng.uniform(-limit, limit);
    }
    layer.b = Vector::Zero(static_cast<Eigen::Index>(out));
    layers_.push_back(std::move(layer));
    in = out;
  }
  side_w_ = Matrix::Zero(static_cast<Eigen::Index>(topology_.output),
                         static_cast<Eigen::Index>(topology_.side_dim));
  scaler_ = Standardizer::identity(topology_.input_dim);
}

Mlp Mlp::with_side_input(std::size_t side_dim) const {
  Mlp out = *this;
  out.topology_.side_dim = side_dim;
  out.side_w_ = Matrix::Zero(static_cast<Eigen::Index>(topology_.output),
                             static_cast<Eigen::Index>(side_dim));
  return out;
}

Mlp Mlp::without_side_input() const { return with_side_input(0); }

void Mlp::check_input(const Matrix& x, const Matrix& side) const {
  if (static_cast<std::size_t>(x.cols()) != topology_.input_dim) {
    throw DimensionError("expected " + std::to_string(topology_.input_dim) +
                         " features, got " + std::to_string(x.cols()));
  }
  if (topology_.side_dim > 0) {
    if (static_cast<std::size_t>(side.cols()) != topology_.side_dim || side.rows() != x.rows()) {
      throw DimensionError("expected side input of dimension " +
                           std::to_string(topology_.side_dim) + ", got " +
                           std::to_string(side.cols()));
    }
  } else if (side.size() != 0) {
    throw DimensionError("model takes no side input");
  }
}

Activations Mlp::forward_batch(const Matrix& x, const Matrix& side) const {
  check_input(x, side);
  Activations act;
  act.a.push_back(scaler_.apply(x));
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) {
    act.z.push_back(affine(act.a.back(), layers_[k]));
    act.a.push_back(act.z.back().cwiseMax(0.0));
  }
  act.logits = affine(act.a.back(), layers_.back());
  if (topology_.side_dim > 0) act.logits += side * side_w_.transpose();
  act.probs = softmax_rows(act.logits);
  return act;
}

Matrix Mlp::predict_proba(const Matrix& x, const Matrix& side) const {
  return forward_batch(x, side).probs;
}

Matrix Mlp::hidden_batch(const Matrix& x) const {
  check_input(x, topology_.side_dim > 0 ? Matrix::Zero(x.rows(), static_cast<Eigen::Index>(
                                                                     topology_.side_dim))
                                        : Matrix());
  Matrix a = scaler_.apply(x);
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) a = affine(a, layers_[k]).cwiseMax(0.0);
  return a;
}

Probabilities Mlp::forward(std::span<const double> features, std::span<const double> side) const {
  if (features.size() != topology_.input_dim) {
    throw DimensionError("expected " + std::to_string(topology_.input_dim) +
                         " features, got " + std::to_string(features.size()));
  }
  if (side.size() != topology_.side_dim) {
    throw DimensionError("expected side input of dimension " +
                         std::to_string(topology_.side_dim) + ", got " +
                         std::to_string(side.size()));
  }
  Matrix x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = features[i];
  Matrix s;
  if (!side.empty()) {
    s.resize(1, static_cast<Eigen::Index>(side.size()));
    for (std::size_t i = 0; i < side.size(); ++i) s(0, static_cast<Eigen::Index>(i)) = side[i];
  }
  const Matrix p = predict_proba(x, s);
  Probabilities out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = p(0, static_cast<Eigen::Index>(c));
  return out;
}

double Mlp::loss_and_gradients(const Matrix& x, const Matrix& side, const std::vector<int>& y,
                               Gradients& grads) const {
  const Activations act = forward_batch(x, side);
  const auto n = static_cast<double>(x.rows());
  Matrix delta = act.probs;
  double loss = 0.0;
  for (Eigen::Index r = 0; r < delta.rows(); ++r) {
    const auto label = y[static_cast<std::size_t>(r)];
    loss -= std::log(std::max(act.probs(r, label), 1e-300));
    delta(r, label) -= 1.0;
  }
  delta /= n;

  grads.layers.resize(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Matrix& input = act.a[k];
    grads.layers[k].w = delta.transpose() * input;
    grads.layers[k].b = delta.colwise().sum().transpose();
    if (k == layers_.size() - 1) {
      grads.side_w = topology_.side_dim > 0 ? Matrix(delta.transpose() * side)
                                            : Matrix::Zero(side_w_.rows(), side_w_.cols());
    }
    if (k > 0) {
      Matrix upstream = delta * layers_[k].w;
      delta = upstream.cwiseProduct((act.z[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss / n;
}

double Mlp::loss(const Matrix& x, const Matrix& side, const std::vector<int>& y) const {
  const Matrix p = predict_proba(x, side);
  double total = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    total -= std::log(std::max(p(r, y[static_cast<std::size_t>(r)]), 1e-300));
  }
  return total / static_cast<double>(p.rows());
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["schema_version"] = schema_version;
  j["labels"] = nlohmann::json::array();
  for (KeyStage ks : kClassOrder) j["labels"].push_back(to_string(ks));
  j["topology"] = {{"input_dim", topology_.input_dim},
                   {"hidden", topology_.hidden},
                   {"side_dim", topology_.side_dim}};
  j["feature_names"] = feature_names;
  j["scaler"] = {{"mean", vector_json(scaler_.mean)}, {"std", vector_json(scaler_.std)}};
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers_) j["layers"].push_back({{"w", matrix_json(l.w)}, {"b", vector_json(l.b)}});
  j["side_w"] = matrix_json(side_w_);
  return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kModelFormat) {
      throw ValidationError("unsupported model format " + j.at("format").dump());
    }
    Topology t;
    t.input_dim = j.at("topology").at("input_dim").get<std::size_t>();
    t.hidden = j.at("topology").at("hidden").get<std::vector<std::size_t>>();
    t.side_dim = j.at("topology").value("side_dim", std::size_t{0});
    if (t.input_dim == 0) throw ValidationError("model: input dimension must be positive");
    Mlp m;
    m.topology_ = t;
    m.schema_version = j.value("schema_version", "");
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    if (!m.feature_names.empty() && m.feature_names.size() != t.input_dim) {
      throw ValidationError("model: feature_names length differs from input dimension");
    }
    m.scaler_.mean = vector_from(j.at("scaler").at("mean"), t.input_dim, "scaler.mean");
    m.scaler_.std = vector_from(j.at("scaler").at("std"), t.input_dim, "scaler.std");
    if ((m.scaler_.std.array() <= 0.0).any()) throw ValidationError("model: scaler std must be positive");
    const auto& layers = j.at("layers");
    if (layers.size() != t.hidden.size() + 1) throw ValidationError("model: wrong layer count");
    std::size_t in = t.input_dim;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const std::size_t out = k < t.hidden.size() ? t.hidden[k] : t.output;
      const std::string what = "layer " + std::to_string(k);
      m.layers_.push_back({matrix_from(layers[k].at("w"), out, in, what),
                           vector_from(layers[k].at("b"), out, what)});
      in = out;
    }
    m.side_w_ = t.side_dim > 0 ? matrix_from(j.at("side_w"), t.output, t.side_dim, "side_w")
                               : Matrix::Zero(static_cast<Eigen::Index>(t.output), 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model: ") + e.what());
  }
}

std::size_t argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

std::vector<int> argmax_rows(const Matrix& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  std::vector<double> row(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) row[static_cast<std::size_t>(c)] = probs(r, c);
    out[static_cast<std::size_t>(r)] = static_cast<int>(argmax(row));
  }
  return out;
}

std::array<std::array<double, kNumClasses>, kNumClasses> Metrics::normalized_confusion() const {
  std::array<std::array<double, kNumClasses>, kNumClasses> out{};
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    std::size_t support = 0;
    for (std::size_t p = 0; p < kNumClasses; ++p) support += confusion[t][p];
    if (support == 0) continue;
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      out[t][p] = static_cast<double>(confusion[t][p]) / static_cast<double>(support);
    }
  }
  return out;
}

Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw DimensionError("metrics: " + std::to_string(truth.size()) + " labels vs " +
                         std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw DegenerateInputError("metrics: empty evaluation set");
  Metrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= static_cast<int>(kNumClasses) || predicted[i] < 0 ||
        predicted[i] >= static_cast<int>(kNumClasses)) {
      throw ValidationError("metrics: label out of range at item " + std::to_string(i));
    }
    ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    if (truth[i] == predicted[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t support = 0, predicted_c = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      support += m.confusion[c][k];
      predicted_c += m.confusion[k][c];
    }
    const double tp = static_cast<double>(m.confusion[c][c]);
    const double p = predicted_c > 0 ? tp / static_cast<double>(predicted_c) : 0.0;
    const double r = support > 0 ? tp / static_cast<double>(support) : 0.0;
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    m.per_class_f1[c] = f;
    m.precision += p / kNumClasses;
    m.recall += r / kNumClasses;
    m.f1 += f / kNumClasses;
  }
  return m;
}

void Dataset::validate(const Topology& t) const {
  if (y.empty()) throw DegenerateInputError("dataset is empty");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DimensionError("dataset: feature rows and labels differ in count");
  }
  if (static_cast<std::size_t>(x.cols()) != t.input_dim) {
    throw DimensionError("dataset: expected " + std::to_string(t.input_dim) + " features, got " +
                         std::to_string(x.cols()));
  }
  if (t.side_dim > 0 && (static_cast<std::size_t>(side.cols()) != t.side_dim ||
                         static_cast<std::size_t>(side.rows()) != y.size())) {
    throw DimensionError("dataset: side input must be " + std::to_string(y.size()) + " x " +
                         std::to_string(t.side_dim));
  }
  for (int label : y) {
    if (label < 0 || label >= static_cast<int>(kNumClasses)) {
      throw ValidationError("dataset: label out of range");
    }
  }
}

Metrics evaluate(const Mlp& model, const Dataset& data) {
  data.validate(model.topology());
  const auto start = std::chrono::steady_clock::now();
  const Matrix probs = model.predict_proba(data.x, model.topology().side_dim > 0 ? data.side : Matrix());
  const auto stop = std::chrono::steady_clock::now();
  Metrics m = compute_metrics(data.y, argmax_rows(probs));
  m.inference_time_s =
      std::chrono::duration<double>(stop - start).count() / static_cast<double>(data.size());
  m.parameter_count = model.parameter_count();
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (patience < 1) throw ValidationError("patience must be at least 1");
  if (max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must lie in [0, 1)");
}

namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

double val_f1(const Mlp& model, const Dataset& val) {
  const Matrix p = model.predict_proba(val.x, model.topology().side_dim > 0 ? val.side : Matrix());
  return compute_metrics(val.y, argmax_rows(p)).f1;
}

}  // namespace

TrainResult train(const Mlp& init, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config) {
  config.validate();
  const Topology& topo = init.topology();
  train_set.validate(topo);
  val_set.validate(topo);
  std::array<bool, kNumClasses> seen{};
  for (int label : val_set.y) seen[static_cast<std::size_t>(label)] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ValidationError("validation set must contain all four classes");
  }

  TrainResult result;
  Mlp model = init;
  if (config.fit_scaler) model.scaler() = Standardizer::fit(train_set.x);
  const bool has_side = topo.side_dim > 0;

  Rng rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Gradients grads;
  Gradients velocity;
  if (config.momentum > 0.0) {
    for (const auto& l : model.layers()) {
      velocity.layers.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
    }
    velocity.side_w = Matrix::Zero(model.side_weights().rows(), model.side_weights().cols());
  }

  result.model = model;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = gather_rows(train_set.x, idx);
      const Matrix sb = has_side ? gather_rows(train_set.side, idx) : Matrix();
      std::vector<int> yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = train_set.y[idx[i]];

      loss_sum += model.loss_and_gradients(xb, sb, yb, grads);
      ++batches;
      const double lr = config.learning_rate;
      auto& layers = model.layers();
      const std::size_t first = config.freeze_hidden ? layers.size() - 1 : 0;
      if (config.momentum > 0.0) {
        for (std::size_t k = first; k < layers.size(); ++k) {
          velocity.layers[k].w = config.momentum * velocity.layers[k].w - lr * grads.layers[k].w;
          velocity.layers[k].b = config.momentum * velocity.layers[k].b - lr * grads.layers[k].b;
          layers[k].w += velocity.layers[k].w;
          layers[k].b += velocity.layers[k].b;
        }
        if (has_side) {
          velocity.side_w = config.momentum * velocity.side_w - lr * grads.side_w;
          model.side_weights() += velocity.side_w;
        }
      } else {
        for (std::size_t k = first; k < layers.size(); ++k) {
          layers[k].w -= lr * grads.layers[k].w;
          layers[k].b -= lr * grads.layers[k].b;
        }
        if (has_side) model.side_weights() -= lr * grads.side_w;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.val_f1 = val_f1(model, val_set);
    result.history.push_back(rec);
    if (rec.val_f1 > result.best_f1) {
      result.best_f1 = rec.val_f1;
      result.best_epoch = epoch;
      result.model = model;
    } else if (epoch - result.best_epoch >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

void SearchSpace::validate() const {
  if (min_layers < 1 || max_layers > 5 || min_layers > max_layers) {
    throw ValidationError("search space: layer count range must lie within 1..5");
  }
  if (min_width < 16 || max_width > 256 || min_width > max_width) {
    throw ValidationError("search space: width range must lie within 16..256");
  }
}

std::vector<Topology> sample_topologies(const SearchSpace& space, std::size_t input_dim,
                                        std::size_t n, std::uint64_t seed) {
  space.validate();
  Rng rng(seed);
  std::vector<Topology> out;
  for (std::size_t i = 0; i < n; ++i) {
    Topology t;
    t.input_dim = input_dim;
    const auto layers = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(space.min_layers), static_cast<std::int64_t>(space.max_layers)));
    for (std::size_t k = 0; k < layers; ++k) {
      t.hidden.push_back(static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(space.min_width), static_cast<std::int64_t>(space.max_width))));
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

bool ranks_before(const Trial& a, const Trial& b) {
  if (a.metrics.has_value() != b.metrics.has_value()) return a.metrics.has_value();
  if (a.metrics) {
    if (a.metrics->f1 != b.metrics->f1) return a.metrics->f1 > b.metrics->f1;
    if (a.metrics->parameter_count != b.metrics->parameter_count) {
      return a.metrics->parameter_count < b.metrics->parameter_count;
    }
  }
  return a.index < b.index;
}

}  // namespace

void rank_trials(std::vector<Trial>& trials) {
  std::sort(trials.begin(), trials.end(), ranks_before);
}

SearchResult random_search(const SearchSpace& space, std::size_t n_trials,
                           const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& config, std::uint64_t seed, std::size_t threads) {
  if (n_trials == 0) throw ValidationError("random search needs at least one trial");
  config.validate();
  const auto topologies =
      sample_topologies(space, static_cast<std::size_t>(train_set.x.cols()), n_trials, seed);

  std::vector<Trial> trials(n_trials);
  std::optional<Mlp> best_model;
  std::optional<Trial> best_trial;
  std::mutex best_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      Trial& trial = trials[i];
      trial.index = i;
      trial.topology = topologies[i];
      trial.seed = derive_seed(seed, i);
      try {
        TrainConfig c = config;
        c.seed = trial.seed;
        TrainResult r = train(Mlp(trial.topology, trial.seed), train_set, val_set, c);
        trial.metrics = evaluate(r.model, val_set);
        trial.best_epoch = r.best_epoch;
        std::lock_guard lock(best_mutex);
        if (!best_trial || ranks_before(trial, *best_trial)) {
          best_trial = trial;
          best_model = std::move(r.model);
        }
      } catch (const Error& e) {
        trial.error = e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, n_trials));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SearchResult out;
  out.ranked = std::move(trials);
  rank_trials(out.ranked);
  out.best_model = std::move(best_model);
  return out;
}

void save_model(const Mlp& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << model.to_json().dump() << '\n';
}

Mlp load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return Mlp::from_json(j);
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j = {{"accuracy", m.accuracy},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"per_class_f1", m.per_class_f1},
                      {"confusion", m.confusion},
                      {"normalized_confusion", m.normalized_confusion()},
                      {"parameter_count", m.parameter_count},
                      {"inference_time_s", m.inference_time_s}};
  return j;
}

}  // namespace keystage::ann
