#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gait {

/// Activity classes. The numeric value is the class index used by the
/// classifier, metrics and reports; the order matches the alphabetical
/// display order of the serial-monitor output.
enum class ActivityLabel : std::uint8_t {
  GoingDownstairs = 0,
  GoingUpstairs = 1,
  Stationary = 2,
  Walking = 3,
};

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<ActivityLabel, kNumClasses> kAllLabels = {
    ActivityLabel::GoingDownstairs, ActivityLabel::GoingUpstairs,
    ActivityLabel::Stationary, ActivityLabel::Walking};

/// Canonical display string ("Going Upstairs", ...).
std::string_view display_name(ActivityLabel label);
/// Inverse of display_name; nullopt for unknown strings.
std::optional<ActivityLabel> label_from_display(std::string_view name);

inline constexpr std::size_t class_index(ActivityLabel label) {
  return static_cast<std::size_t>(label);
}
ActivityLabel label_from_index(std::size_t index);

struct Sample {
  std::int64_t t_ms = 0;
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
  std::optional<std::array<double, 3>> gyro;  // gx, gy, gz in deg/s

  /// Axis 0..2 are acceleration, 3..5 gyro (requires gyro present).
  double axis(std::size_t i) const;

  bool operator==(const Sample&) const = default;
};

struct Recording {
  std::string id;
  ActivityLabel label = ActivityLabel::Stationary;
  double rate_hz = 100.0;
  int axes = 3;
  std::vector<Sample> samples;

  double duration_s() const { return static_cast<double>(samples.size()) / rate_hz; }
  double duration_ms() const { return 1000.0 * duration_s(); }

  /// Throws gait::Error unless timestamps are strictly increasing with deltas
  /// within 10% of the nominal period (or half a millisecond, whichever is
  /// larger, since timestamps are integral), every value is finite, and the
  /// gyro fields agree with `axes`.
  void validate() const;

  bool operator==(const Recording&) const = default;
};

struct Dataset {
  std::vector<Recording> recordings;
  std::filesystem::path manifest_path;

  /// Unique ids, shared rate and axis count.
  void validate() const;
  std::size_t count(ActivityLabel label) const;
};

// -- CSV / manifest --------------------------------------------------------

/// Row parser for the recording CSV schema. Columns are located by name, so
/// `timestamp_ms,accX,accY,accZ[,gyrX,gyrY,gyrZ]` may appear in any order.
class SampleCsvParser {
 public:
  /// Throws MissingColumn if an accelerometer column is absent or the gyro
  /// columns are only partly present.
  explicit SampleCsvParser(std::string_view header_line);

  int axes() const { return axes_; }
  /// Throws MalformedRow on a wrong field count or unparsable number.
  Sample parse_row(std::string_view line, std::size_t line_no) const;

 private:
  std::array<int, 7> col_{};
  std::size_t n_fields_ = 0;
  int axes_ = 3;
};

Recording load_recording(const std::filesystem::path& path, double rate_hz,
                         ActivityLabel label);
Recording parse_recording_csv(std::string_view text, double rate_hz,
                              ActivityLabel label, std::string id);
std::string recording_to_csv(const Recording& rec);
void save_recording(const Recording& rec, const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;
  ActivityLabel label;
  std::string id;
};

struct Manifest {
  double rate_hz = 100.0;
  int axes = 3;
  std::vector<ManifestEntry> recordings;
};

Manifest parse_manifest(std::string_view json_text);
std::string manifest_to_json(const Manifest& manifest);

/// Loads every recording listed in the manifest; relative file paths resolve
/// against the manifest's directory.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// -- split -----------------------------------------------------------------

/// Per-class train count: round-half-up of n * fraction.
std::size_t stratified_train_count(std::size_t n_class, double train_fraction);

/// Stratified recording-level split. Windows never leak across partitions
/// because whole recordings are assigned.
std::pair<Dataset, Dataset> split_by_recording(const Dataset& ds, double train_fraction,
                                               std::uint64_t seed);

// -- synthetic generator ---------------------------------------------------

struct GaitTemplate {
  double freq_hz = 0.0;
  double vertical_amp_g = 0.0;
  double forward_amp_g = 0.0;
  double forward_phase_rad = 0.0;
  double vertical_bias_g = 0.0;
};

struct SynthConfig {
  double gravity_g = 1.0;
  double noise_sigma_g = 0.02;
  GaitTemplate walking{2.0, 0.4, 0.2, 1.5707963267948966, 0.0};
  GaitTemplate upstairs{1.4, 0.6, 0.2, 1.5707963267948966, 0.05};
  GaitTemplate downstairs{1.8, 0.5, 0.2, -1.5707963267948966, -0.05};
  /// Each recording starts at a seeded random point in the gait cycle.
  bool random_start_phase = true;
  /// 3 = accelerometer only, 6 = accelerometer + gyroscope.
  int axes = 3;
  double gyro_noise_dps = 1.0;
  double gyro_amp_dps_per_g = 40.0;
  /// Minimum duration accepted; defaults to one 2 s window.
  double min_duration_s = 2.0;

  const GaitTemplate* gait_for(ActivityLabel label) const;
};

Recording synthesize_recording(ActivityLabel label, double duration_s, double rate_hz,
                               std::uint64_t seed, const SynthConfig& cfg = {});

/// Violent shaking: sinusoid of the given frequency and amplitude on every
/// accelerometer axis on top of gravity. Used to probe the anomaly detector.
Recording synthesize_shaking(double duration_s, double rate_hz, std::uint64_t seed,
                             double freq_hz = 10.0, double amp_g = 3.0,
                             const SynthConfig& cfg = {});

struct SynthDatasetConfig {
  std::size_t recordings_per_class = 10;
  double duration_s = 10.0;
  double rate_hz = 100.0;
  SynthConfig signal;
};

/// Builds recordings_per_class recordings for every class with ids like
/// "walking_03"; seeds are derived from `seed`.
Dataset synthesize_dataset(const SynthDatasetConfig& cfg, std::uint64_t seed);

/// Writes one CSV per recording plus manifest.json into `dir`.
std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace gait
