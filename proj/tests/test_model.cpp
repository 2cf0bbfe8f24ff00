#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gaitml/error.hpp"
#include "gaitml/model.hpp"

using namespace gait;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

// Four well separated Gaussian blobs in `dim` dimensions.
LabeledSet blobs(std::size_t per_class, std::size_t dim, std::uint32_t seed, double spread = 0.3) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, spread);
  LabeledSet set;
  for (std::size_t i = 0; i < per_class * 4; ++i) {
    const std::size_t c = i % 4;
    FeatureVector x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = nd(gen) + (d % 4 == c ? 2.0 : 0.0);
    set.inputs.push_back(std::move(x));
    set.labels.push_back(c);
  }
  return set;
}

double mean_loss(const MlpModel& m, const LabeledSet& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) total += loss_ce(forward(m, s.inputs[i]), s.labels[i]);
  return total / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("default network shape") {
  const MlpModel m = init_mlp(kDefaultDims, 1);
  CHECK(m.parameter_count() == 1054);
  REQUIRE(m.layers.size() == 3);
  CHECK(m.layers[0].weights.size() == 20 * 39);
  CHECK(m.layers[2].bias.size() == 4);
  for (const auto& l : m.layers)
    for (double b : l.bias) CHECK(b == 0.0);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("init is deterministic per seed") {
  CHECK(init_mlp(kDefaultDims, 9) == init_mlp(kDefaultDims, 9));
  CHECK_FALSE(init_mlp(kDefaultDims, 9) == init_mlp(kDefaultDims, 10));
}

TEST_CASE("He init spread") {
  // Pooled over 10 seeds so the 40-weight output layer has enough samples.
  for (std::size_t l = 0; l < 3; ++l) {
    double s = 0.0, s2 = 0.0, n = 0.0;
    std::size_t fan_in = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const MlpModel m = init_mlp(kDefaultDims, seed);
      fan_in = m.layers[l].in;
      for (double w : m.layers[l].weights) {
        s += w;
        s2 += w * w;
        n += 1.0;
      }
    }
    const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
    const double want = std::sqrt(2.0 / static_cast<double>(fan_in));
    CHECK(sd >= 0.8 * want);
    CHECK(sd <= 1.2 * want);
  }
}

TEST_CASE("init argument errors") {
  CHECK(code_of([] { init_mlp(std::vector<std::size_t>{39, 20, 4}, 1); }) == ErrorCode::InvalidDims);
  CHECK(code_of([] { init_mlp(std::vector<std::size_t>{39, 0, 10, 4}, 1); }) == ErrorCode::InvalidDims);
  const MlpModel m = init_mlp(kDefaultDims, 1);
  CHECK(code_of([&] { forward(m, std::vector<double>(38, 0.0)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("zero weights give a uniform output") {
  const MlpModel m = zero_mlp(kDefaultDims);
  const auto x = std::vector<double>(39, 3.0);
  for (double p : forward(m, x)) CHECK(p == doctest::Approx(0.25));
  CHECK(loss_ce(forward(m, x), 2) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("hand-computed 2-2-2-2 forward pass") {
  MlpModel m = zero_mlp(std::vector<std::size_t>{2, 2, 2, 2});
  m.layers[0].weights = {1, 0, 0, 1};
  m.layers[1].weights = {1, 1, 1, -1};
  m.layers[1].bias = {0.5, 0.0};
  m.layers[2].weights = {1, 0, 0, 1};
  m.layers[2].bias = {0.0, 1.0};
  // h1 = [1,2]; h2 = relu([3.5, -1]) = [3.5, 0]; logits = [3.5, 1].
  const std::vector<double> x = {1.0, 2.0};
  const auto logits = forward_logits(m, x);
  CHECK(logits[0] == doctest::Approx(3.5));
  CHECK(logits[1] == doctest::Approx(1.0));
  const auto p = forward(m, x);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.5))));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
}

TEST_CASE("softmax") {
  const std::vector<double> z = {1.0, -2.0, 0.5, 3.0};
  const auto p = softmax(z);
  double sum = 0.0;
  for (double v : p) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  for (double c : {-50.0, 7.0, 700.0}) {
    std::vector<double> shifted = z;
    for (double& v : shifted) v += c;
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < 4; ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
  const auto big = softmax(std::vector<double>{1000.0, 0.0, -1000.0, 999.0});
  for (double v : big) CHECK(std::isfinite(v));
  CHECK(big[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("loss clamps at 1e-12") {
  CHECK(loss_ce(std::vector<double>{1.0, 0.0}, 1) == doctest::Approx(-std::log(1e-12)));
  CHECK(loss_ce(std::vector<double>{1.0, 0.0}, 0) == 0.0);
}

TEST_CASE("argmax takes the first maximum") {
  CHECK(argmax(std::vector<double>{0.1, 0.4, 0.4, 0.1}) == 1);
  CHECK(argmax(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 0);
  CHECK(argmax(std::vector<double>{-3.0}) == 0);
}

TEST_CASE("output bias gradient is p minus one-hot") {
  const MlpModel m = init_mlp(kDefaultDims, 4);
  const std::vector<FeatureVector> xs = {FeatureVector(39, 0.3)};
  const std::vector<std::size_t> ys = {2};
  const auto g = gradients(m, xs, ys);
  const auto p = forward(m, xs[0]);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(g[2].bias[c] == doctest::Approx(p[c] - (c == 2 ? 1.0 : 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central differences") {
  constexpr double h = 1e-4;
  constexpr double floor = 1e-6;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MlpModel m = init_mlp(kDefaultDims, seed);
    const LabeledSet batch = blobs(2, 39, static_cast<std::uint32_t>(seed) + 100, 1.0);
    const auto g = gradients(m, batch.inputs, batch.labels);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
        const std::size_t n = which == 0 ? m.layers[l].weights.size() : m.layers[l].bias.size();
        for (std::size_t i = 0; i < n; ++i) {
          MlpModel plus = m, minus = m;
          auto& pp = which == 0 ? plus.layers[l].weights : plus.layers[l].bias;
          auto& mm = which == 0 ? minus.layers[l].weights : minus.layers[l].bias;
          pp[i] += h;
          mm[i] -= h;
          const double numeric = (mean_loss(plus, batch) - mean_loss(minus, batch)) / (2.0 * h);
          const double analytic = which == 0 ? g[l].weights[i] : g[l].bias[i];
          const double rel =
              std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
          worst = std::max(worst, rel);
        }
      }
    }
  }
  MESSAGE("worst relative gradient error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("dead hidden units get zero gradient without NaN") {
  MlpModel m = init_mlp(kDefaultDims, 3);
  for (double& b : m.layers[0].bias) b = -1e6;
  const LabeledSet batch = blobs(3, 39, 8);
  const auto g = gradients(m, batch.inputs, batch.labels);
  for (double v : g[0].weights) CHECK(v == 0.0);
  for (double v : g[1].weights) CHECK(v == 0.0);
  for (const auto& lg : g) {
    for (double v : lg.weights) CHECK(std::isfinite(v));
    for (double v : lg.bias) CHECK(std::isfinite(v));
  }
}

TEST_CASE("training reduces loss and separates blobs") {
  const LabeledSet tr = blobs(50, 39, 1);
  const LabeledSet va = blobs(20, 39, 2);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 0.01;
  const MlpModel init = init_mlp(kDefaultDims, 5);
  const double before = evaluate_loss_accuracy(init, tr).loss;
  const TrainResult r = train(init, tr, va, cfg);
  REQUIRE(r.history.epochs.size() == 20);
  CHECK(r.history.epochs.front().epoch == 1);
  CHECK(r.history.epochs.back().train_loss < 0.5 * before);
  CHECK(r.history.epochs.back().val_accuracy >= 0.95);
  const auto la = evaluate_loss_accuracy(r.model, tr);
  CHECK(la.loss == r.history.epochs.back().train_loss);
  CHECK(la.accuracy == r.history.epochs.back().train_accuracy);
}

TEST_CASE("training is bit-reproducible") {
  const LabeledSet tr = blobs(20, 39, 11);
  TrainConfig cfg;
  cfg.epochs = 5;
  const MlpModel init = init_mlp(kDefaultDims, 7);
  const TrainResult a = train(init, tr, tr, cfg);
  const TrainResult b = train(init, tr, tr, cfg);
  CHECK(a.model == b.model);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history);
  write_history_csv(hb, b.history);
  CHECK(ha.str() == hb.str());
  cfg.seed = 43;
  CHECK_FALSE(train(init, tr, tr, cfg).model == a.model);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const LabeledSet tr = blobs(10, 39, 12);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  const MlpModel init = init_mlp(kDefaultDims, 7);
  CHECK(train(init, tr, tr, cfg).model == init);
}

TEST_CASE("train argument errors") {
  const MlpModel init = init_mlp(kDefaultDims, 7);
  const LabeledSet tr = blobs(2, 39, 12);
  TrainConfig cfg;
  CHECK(code_of([&] { train(init, LabeledSet{}, tr, cfg); }) == ErrorCode::EmptyDataset);
  cfg.batch_size = 0;
  CHECK(code_of([&] { train(init, tr, tr, cfg); }) == ErrorCode::InvalidTrainConfig);
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  CHECK(code_of([&] { train(init, tr, tr, cfg); }) == ErrorCode::InvalidTrainConfig);
  const LabeledSet narrow = blobs(2, 12, 12);
  CHECK(code_of([&] { train(init, narrow, narrow, TrainConfig{}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("predict_label agrees with forward") {
  const MlpModel m = init_mlp(kDefaultDims, 21);
  std::mt19937 gen(99);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    FeatureVector x(39);
    for (double& v : x) v = nd(gen);
    const auto p = forward(m, x);
    const Prediction pred = predict_label(m, x);
    CHECK(pred.probs == p);
    CHECK(pred.class_index == argmax(p));
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("history CSV layout") {
  TrainHistory h;
  h.epochs.push_back({1, 1.25, 0.5, 1.5, 0.25});
  std::ostringstream out;
  write_history_csv(out, h);
  CHECK(out.str().rfind("epoch,train_loss,train_acc,val_loss,val_acc\n1,", 0) == 0);
}
