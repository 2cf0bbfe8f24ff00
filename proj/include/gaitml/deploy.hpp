#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gaitml/anomaly.hpp"
#include "gaitml/features.hpp"
#include "gaitml/model.hpp"
#include "gaitml/windowing.hpp"

namespace gait {

// -- quantization ----------------------------------------------------------

/// Dense layer with int8 weights and one symmetric scale per output row
/// (zero point 0). Biases stay in double precision.
struct QuantLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<std::int8_t> weights;  // row-major (out x in), each in [-127, 127]
  std::vector<double> scales;        // one per row, > 0
  std::vector<double> bias;

  bool operator==(const QuantLayer&) const = default;
};

struct QuantModel {
  std::vector<std::size_t> dims;
  std::vector<QuantLayer> layers;

  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }
  std::size_t parameter_count() const;
  void validate() const;

  bool operator==(const QuantModel&) const = default;
};

inline constexpr double kMinQuantScale = 1e-12;

/// scale = max|row| / 127 (floored at kMinQuantScale), q = round(w / scale).
QuantModel quantize(const MlpModel& m);
MlpModel dequantize(const QuantModel& q);

std::vector<double> forward(const QuantModel& m, std::span<const double> x);

using Classifier = std::variant<MlpModel, QuantModel>;

std::vector<double> classify(const Classifier& c, std::span<const double> x);
std::size_t classifier_input_dim(const Classifier& c);
std::size_t classifier_output_dim(const Classifier& c);

// -- bundle ----------------------------------------------------------------

inline constexpr std::uint16_t kBundleVersion = 1;

/// Everything needed to go from raw samples to predictions.
struct ModelBundle {
  Classifier classifier;
  Normalizer normalizer;
  AnomalyModel anomaly;
  FeatureConfig features;
  WindowConfig window;
  std::vector<std::string> labels;
  double rate_hz = 100.0;
  int axes = 3;
  std::uint16_t version = kBundleVersion;

  bool quantized() const { return std::holds_alternative<QuantModel>(classifier); }
  /// Throws InconsistentBundle if dimensionalities disagree.
  void validate() const;

  bool operator==(const ModelBundle&) const = default;
};

/// Full file image: magic, version, CRC-32, payload length, payload.
std::vector<std::uint8_t> encode_bundle(const ModelBundle& b);
ModelBundle decode_bundle(std::span<const std::uint8_t> bytes);
/// CRC-32 of the encoded payload; the value stored in the file header.
std::uint32_t bundle_checksum(const ModelBundle& b);

void save_bundle(const ModelBundle& b, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

/// Self-contained C header with constants and arrays for firmware builds.
/// Throws NotQuantized for float bundles.
std::string export_c_header(const ModelBundle& b);

// -- inference -------------------------------------------------------------

struct StageTimings {
  double dsp_ms = 0.0;
  double classify_ms = 0.0;
  double anomaly_ms = 0.0;
};

struct InferenceResult {
  std::vector<double> probs;  // raw softmax
  double anomaly_score = 0.0;
  StageTimings timings;
};

/// featurize -> normalize -> classify -> anomaly score.
InferenceResult infer_window(const ModelBundle& b, const Window& w);

/// Nearest point on the 1/256 grid, as a count in [0, 256].
std::uint16_t quantize_probability(double p);

struct ClassificationEvent {
  std::vector<double> raw_probs;
  std::vector<std::uint16_t> prob_counts;  // probability = count / 256
  double anomaly_score = 0.0;
  std::int64_t window_end_ms = 0;
  StageTimings timings;

  double probability(std::size_t c) const { return prob_counts[c] / 256.0; }
};

ClassificationEvent make_event(const InferenceResult& r, std::int64_t window_end_ms);

/// Serial-monitor style block, e.g.
///   Predictions (DSP: 3 ms., Classification: 0 ms., Anomaly: 0 ms.):
///       Going Downstairs: 0.00000
///       ...
///       anomaly score: -0.069
std::string format_event(const ClassificationEvent& ev, std::span<const std::string> labels);
std::string format_event(const ClassificationEvent& ev);

/// Sample-at-a-time inference over a ring buffer holding one window. Emits an
/// event once the buffer is full and then every stride. Single consumer; the
/// engine owns a copy of its bundle so it can be moved across threads.
class StreamEngine {
 public:
  explicit StreamEngine(ModelBundle bundle);

  std::optional<ClassificationEvent> push(const Sample& s);
  void reset();

  std::uint64_t samples_seen() const { return seen_; }
  std::size_t buffered() const { return filled_; }
  const ModelBundle& bundle() const { return bundle_; }
  const WindowGeometry& geometry() const { return geo_; }

 private:
  ModelBundle bundle_;
  WindowGeometry geo_;
  std::vector<Sample> ring_;
  std::vector<Sample> scratch_;
  std::size_t head_ = 0;  // next write position
  std::size_t filled_ = 0;
  std::uint64_t seen_ = 0;
  std::optional<std::int64_t> last_t_ms_;
};

}  // namespace gait
