#include "gaitml/pipeline.hpp"

#include <fmt/format.h>

#include "gaitml/error.hpp"
#include "gaitml/rng.hpp"

namespace gait {

std::vector<LabeledFeatures> featurize(const Dataset& ds, const WindowConfig& window,
                                       const FeatureConfig& features) {
  std::vector<LabeledFeatures> rows;
  for (const Recording& rec : ds.recordings) {
    for (const Window& w : segment(rec, window)) {
      rows.push_back({rec.id, w.start_ms, rec.label, extract_features(w, features)});
    }
  }
  return rows;
}

LabeledSet to_labeled_set(const std::vector<LabeledFeatures>& rows, const Normalizer& norm) {
  LabeledSet set;
  set.inputs.reserve(rows.size());
  set.labels.reserve(rows.size());
  for (const auto& r : rows) {
    set.inputs.push_back(norm.apply(r.values));
    set.labels.push_back(class_index(r.label));
  }
  return set;
}

PipelineResult train_pipeline(const Dataset& train, const Dataset& test, const PipelineConfig& cfg) {
  if (train.recordings.empty() || test.recordings.empty()) {
    throw Error(ErrorCode::EmptyDataset, "train and test datasets must be non-empty");
  }
  const Recording& first = train.recordings.front();
  const auto train_rows = featurize(train, cfg.window, cfg.features);
  const auto test_rows = featurize(test, cfg.window, cfg.features);

  std::vector<FeatureVector> raw;
  raw.reserve(train_rows.size());
  for (const auto& r : train_rows) raw.push_back(r.values);
  Normalizer norm = fit_normalizer(raw, cfg.normalizer_epsilon);
  const LabeledSet train_set = to_labeled_set(train_rows, norm);
  const LabeledSet test_set = to_labeled_set(test_rows, norm);

  std::vector<std::size_t> dims = {cfg.features.dimension(first.axes)};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(kNumClasses);

  TrainConfig tc = cfg.train;
  tc.seed = mix_seed(cfg.seed, 2);
  TrainResult trained = gait::train(init_mlp(dims, mix_seed(cfg.seed, 1)), train_set, test_set, tc);

  KMeansConfig kc;
  kc.k = cfg.k_clusters;
  AnomalyModel anomaly = fit_kmeans_detailed(train_set.inputs, kc, mix_seed(cfg.seed, 3)).model;

  PipelineResult result;
  ModelBundle& b = result.bundle;
  if (cfg.quantize) b.classifier = quantize(trained.model);
  else b.classifier = std::move(trained.model);
  b.normalizer = std::move(norm);
  b.anomaly = std::move(anomaly);
  b.features = cfg.features;
  b.window = cfg.window;
  for (ActivityLabel l : kAllLabels) b.labels.emplace_back(display_name(l));
  b.rate_hz = first.rate_hz;
  b.axes = first.axes;
  b.validate();

  result.history = std::move(trained.history);
  result.test_report = evaluate_bundle(b, test);
  return result;
}

std::vector<InferenceResult> classify_recording(const ModelBundle& b, const Recording& rec) {
  if (rec.rate_hz != b.rate_hz || rec.axes != b.axes) {
    throw Error(ErrorCode::InconsistentBundle,
                fmt::format("{}: {} Hz / {} axes, bundle expects {} Hz / {} axes", rec.id,
                            rec.rate_hz, rec.axes, b.rate_hz, b.axes));
  }
  std::vector<InferenceResult> out;
  for (const Window& w : segment(rec, b.window)) out.push_back(infer_window(b, w));
  return out;
}

EvalReport evaluate_bundle(const ModelBundle& b, const Dataset& ds) {
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> labels;
  for (const Recording& rec : ds.recordings) {
    for (auto& r : classify_recording(b, rec)) {
      probs.push_back(std::move(r.probs));
      labels.push_back(class_index(rec.label));
    }
  }
  return evaluate(probs, labels);
}

}  // namespace gait
