#pragma once

#include <cstdint>
#include <vector>

#include "gaitml/deploy.hpp"
#include "gaitml/metrics.hpp"

namespace gait {

/// Segments and featurizes every recording (unnormalized features).
std::vector<LabeledFeatures> featurize(const Dataset& ds, const WindowConfig& window,
                                       const FeatureConfig& features);

LabeledSet to_labeled_set(const std::vector<LabeledFeatures>& rows, const Normalizer& norm);

struct PipelineConfig {
  WindowConfig window;
  FeatureConfig features;
  TrainConfig train;
  std::vector<std::size_t> hidden = {20, 10};
  std::size_t k_clusters = 8;
  double normalizer_epsilon = 1e-6;
  bool quantize = false;
  std::uint64_t seed = 42;
};

struct PipelineResult {
  ModelBundle bundle;
  TrainHistory history;
  EvalReport test_report;
};

/// Fits normalizer, classifier and anomaly model on `train`, validates on
/// `test`, and packages the result. Every random choice derives from cfg.seed.
PipelineResult train_pipeline(const Dataset& train, const Dataset& test, const PipelineConfig& cfg);

/// Raw inference outputs for every window of `rec`, in window order.
std::vector<InferenceResult> classify_recording(const ModelBundle& b, const Recording& rec);

EvalReport evaluate_bundle(const ModelBundle& b, const Dataset& ds);

}  // namespace gait
