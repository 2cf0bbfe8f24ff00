#include "gaitml/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gaitml/error.hpp"
#include "gaitml/rng.hpp"

namespace gait {

namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() != 4) {
    throw Error(ErrorCode::InvalidDims, fmt::format("expected 4 layer sizes, got {}", dims.size()));
  }
  for (std::size_t d : dims) {
    if (d == 0) throw Error(ErrorCode::InvalidDims, "layer sizes must be positive");
  }
}

void check_input(const MlpModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("input has {} values, model expects {}", x.size(), m.input_dim()));
  }
}

// Pre-activations and activations of every layer for one input.
struct Trace {
  std::vector<std::vector<double>> pre;   // z per layer
  std::vector<std::vector<double>> post;  // a per layer; post[0] is the input
};

Trace run(const MlpModel& m, std::span<const double> x) {
  check_input(m, x);
  Trace t;
  t.post.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const DenseLayer& layer = m.layers[l];
    const auto& a = t.post.back();
    std::vector<double> z(layer.out);
    for (std::size_t r = 0; r < layer.out; ++r) {
      double acc = layer.bias[r];
      const double* row = &layer.weights[r * layer.in];
      for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * a[c];
      z[r] = acc;
    }
    std::vector<double> act = z;
    if (l + 1 < m.layers.size()) {
      for (double& v : act) v = std::max(v, 0.0);
    } else {
      act = softmax(z);
    }
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(act));
  }
  return t;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void MlpModel::validate() const {
  if (dims.size() < 2 || layers.size() + 1 != dims.size()) {
    throw Error(ErrorCode::InvalidDims, "layers do not match dims");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.in != dims[l] || layer.out != dims[l + 1] ||
        layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw Error(ErrorCode::InvalidDims, fmt::format("layer {} shape inconsistent", l));
    }
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite weight");
    }
    for (double v : layer.bias) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "non-finite bias");
    }
  }
}

MlpModel zero_mlp(std::span<const std::size_t> dims) {
  check_dims(dims);
  MlpModel m;
  m.dims.assign(dims.begin(), dims.end());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    m.layers.push_back({dims[l], dims[l + 1], std::vector<double>(dims[l] * dims[l + 1], 0.0),
                        std::vector<double>(dims[l + 1], 0.0)});
  }
  return m;
}

MlpModel init_mlp(std::span<const std::size_t> dims, std::uint64_t seed) {
  MlpModel m = zero_mlp(dims);
  Rng rng(seed);
  for (auto& layer : m.layers) {
    const double sigma = std::sqrt(2.0 / static_cast<double>(layer.in));
    for (double& w : layer.weights) w = rng.normal(0.0, sigma);
  }
  return m;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> forward_logits(const MlpModel& m, std::span<const double> x) {
  return run(m, x).pre.back();
}

std::vector<double> forward(const MlpModel& m, std::span<const double> x) {
  return std::move(run(m, x).post.back());
}

double loss_ce(std::span<const double> probs, std::size_t label) {
  return -std::log(std::max(probs[label], 1e-12));
}

MlpGradients gradients(const MlpModel& m, std::span<const FeatureVector> inputs,
                       std::span<const std::size_t> labels) {
  if (inputs.empty()) throw Error(ErrorCode::EmptyDataset, "gradient of an empty batch");
  if (inputs.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inputs and labels differ in length");
  }
  MlpGradients grads;
  for (const auto& layer : m.layers) {
    grads.push_back({std::vector<double>(layer.weights.size(), 0.0),
                     std::vector<double>(layer.bias.size(), 0.0)});
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (labels[s] >= m.output_dim()) {
      throw Error(ErrorCode::DimensionMismatch, fmt::format("label {} out of range", labels[s]));
    }
    const Trace t = run(m, inputs[s]);
    // Softmax + cross-entropy: dL/dz = p - onehot.
    std::vector<double> delta = t.post.back();
    delta[labels[s]] -= 1.0;

    for (std::size_t l = m.layers.size(); l-- > 0;) {
      const DenseLayer& layer = m.layers[l];
      const auto& a_in = t.post[l];
      LayerGradient& g = grads[l];
      for (std::size_t r = 0; r < layer.out; ++r) {
        const double d = delta[r] * scale;
        g.bias[r] += d;
        double* grow = &g.weights[r * layer.in];
        for (std::size_t c = 0; c < layer.in; ++c) grow[c] += d * a_in[c];
      }
      if (l == 0) break;
      std::vector<double> prev(layer.in, 0.0);
      for (std::size_t r = 0; r < layer.out; ++r) {
        const double* row = &layer.weights[r * layer.in];
        for (std::size_t c = 0; c < layer.in; ++c) prev[c] += row[c] * delta[r];
      }
      const auto& z_prev = t.pre[l - 1];
      for (std::size_t c = 0; c < layer.in; ++c) {
        if (!(z_prev[c] > 0.0)) prev[c] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  return grads;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || !(learning_rate >= 0.0)) {
    throw Error(ErrorCode::InvalidTrainConfig,
                fmt::format("epochs {} batch {} lr {} invalid", epochs, batch_size, learning_rate));
  }
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

Prediction predict_label(const MlpModel& m, std::span<const double> x) {
  Prediction p;
  p.probs = forward(m, x);
  p.class_index = argmax(p.probs);
  return p;
}

LossAccuracy evaluate_loss_accuracy(const MlpModel& m, const LabeledSet& set) {
  if (set.empty()) throw Error(ErrorCode::EmptyDataset, "evaluation set is empty");
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Prediction p = predict_label(m, set.inputs[i]);
    loss += loss_ce(p.probs, set.labels[i]);
    correct += p.class_index == set.labels[i] ? 1 : 0;
  }
  const auto n = static_cast<double>(set.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainResult train(const MlpModel& initial, const LabeledSet& train_set, const LabeledSet& val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  initial.validate();
  if (train_set.empty() || val_set.empty()) {
    throw Error(ErrorCode::EmptyDataset, "training and validation sets must be non-empty");
  }
  if (train_set.inputs.size() != train_set.labels.size() ||
      val_set.inputs.size() != val_set.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inputs and labels differ in length");
  }

  TrainResult result{initial, {}};
  MlpModel& m = result.model;

  struct Moments {
    std::vector<double> m, v;
  };
  std::vector<Moments> w_mom, b_mom;
  for (const auto& layer : m.layers) {
    w_mom.push_back({std::vector<double>(layer.weights.size(), 0.0),
                     std::vector<double>(layer.weights.size(), 0.0)});
    b_mom.push_back({std::vector<double>(layer.bias.size(), 0.0),
                     std::vector<double>(layer.bias.size(), 0.0)});
  }
  std::uint64_t step = 0;
  auto adam = [&](std::vector<double>& params, const std::vector<double>& grad, Moments& mom) {
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * grad[i];
      mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double m_hat = mom.m[i] / c1;
      const double v_hat = mom.v[i] / c2;
      params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  };

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<FeatureVector> batch_x;
  std::vector<std::size_t> batch_y;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(train_set.inputs[order[i]]);
        batch_y.push_back(train_set.labels[order[i]]);
      }
      const MlpGradients g = gradients(m, batch_x, batch_y);
      ++step;
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        adam(m.layers[l].weights, g[l].weights, w_mom[l]);
        adam(m.layers[l].bias, g[l].bias, b_mom[l]);
      }
    }
    const LossAccuracy tr = evaluate_loss_accuracy(m, train_set);
    const LossAccuracy va = evaluate_loss_accuracy(m, val_set);
    result.history.epochs.push_back({epoch, tr.loss, tr.accuracy, va.loss, va.accuracy});
  }
  return result;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& e : history.epochs) {
    fmt::print(out, "{},{},{},{},{}\n", e.epoch, e.train_loss, e.train_accuracy, e.val_loss,
               e.val_accuracy);
  }
}

}  // namespace gait
