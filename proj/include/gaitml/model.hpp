#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gaitml/features.hpp"

namespace gait {

/// Fully connected layer, weights stored row-major as (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t row, std::size_t col) { return weights[row * in + col]; }
  double w(std::size_t row, std::size_t col) const { return weights[row * in + col]; }

  bool operator==(const DenseLayer&) const = default;
};

/// Dense classifier: ReLU on hidden layers, softmax on the output layer.
struct MlpModel {
  std::vector<std::size_t> dims;  // [in, h1, h2, out]
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }
  std::size_t parameter_count() const;
  /// Shapes consistent with dims and every parameter finite.
  void validate() const;

  bool operator==(const MlpModel&) const = default;
};

inline const std::vector<std::size_t> kDefaultDims = {39, 20, 10, 4};

/// He-normal weights (variance 2 / fan_in), zero biases.
MlpModel init_mlp(std::span<const std::size_t> dims, std::uint64_t seed);
/// Same shape as init_mlp but every parameter zero.
MlpModel zero_mlp(std::span<const std::size_t> dims);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> forward_logits(const MlpModel& m, std::span<const double> x);
std::vector<double> forward(const MlpModel& m, std::span<const double> x);

/// -log(max(p[label], 1e-12)).
double loss_ce(std::span<const double> probs, std::size_t label);

struct LabeledSet {
  std::vector<FeatureVector> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

/// Gradient of the mean cross-entropy over a batch, laid out like the model.
struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};
using MlpGradients = std::vector<LayerGradient>;

MlpGradients gradients(const MlpModel& m, std::span<const FeatureVector> inputs,
                       std::span<const std::size_t> labels);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;
  bool shuffle = true;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

/// CSV `epoch,train_loss,train_acc,val_loss,val_acc`.
void write_history_csv(std::ostream& out, const TrainHistory& history);

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

/// Minibatch Adam. Loss/accuracy are measured on the full sets after each
/// epoch. Single-threaded and bit-reproducible for a given seed.
TrainResult train(const MlpModel& initial, const LabeledSet& train_set, const LabeledSet& val_set,
                  const TrainConfig& cfg);

struct Prediction {
  std::size_t class_index = 0;
  std::vector<double> probs;
};

/// First index of the maximum.
std::size_t argmax(std::span<const double> values);
Prediction predict_label(const MlpModel& m, std::span<const double> x);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};
LossAccuracy evaluate_loss_accuracy(const MlpModel& m, const LabeledSet& set);

}  // namespace gait
