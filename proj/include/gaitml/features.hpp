#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaitml/windowing.hpp"

namespace gait {

enum class Taper { Rectangular, Hann };

/// Half-open frequency interval [lo_hz, hi_hz). An infinite upper edge
/// means "up to Nyquist".
struct Band {
  double lo_hz = 0.0;
  double hi_hz = std::numeric_limits<double>::infinity();

  bool operator==(const Band&) const = default;
};

std::vector<Band> default_bands();

struct FeatureConfig {
  std::size_t n_fft = 256;
  std::size_t peaks_k = 2;
  std::vector<Band> bands = default_bands();
  Taper taper = Taper::Hann;

  /// Checks n_fft is a power of two and that bands ascend without overlap
  /// inside (0, Nyquist].
  void validate(double rate_hz) const;
  /// Values per axis: mean, std, rms, k x (peak freq, peak mag), band powers.
  std::size_t features_per_axis() const { return 3 + 2 * peaks_k + bands.size(); }
  std::size_t dimension(int axes) const { return features_per_axis() * static_cast<std::size_t>(axes); }

  bool operator==(const FeatureConfig&) const = default;
};

/// Flat feature vector. Per axis, in axis order (accX, accY, accZ[, gyrX..]):
///   [mean, std, rms, peak1_freq_hz, peak1_mag, peak2_freq_hz, peak2_mag,
///    band_power_1 .. band_power_6]
/// which gives 13 values per axis and 39 for the default 3-axis setup.
using FeatureVector = std::vector<double>;

// -- primitives ------------------------------------------------------------

double mean(std::span<const double> series);
/// Population standard deviation (divides by n).
double stddev(std::span<const double> series);
double rms(std::span<const double> series);

/// In-place radix-2 FFT. Size must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// One-sided magnitude spectrum of the mean-removed, tapered, zero-padded
/// series; n_fft/2 + 1 values.
std::vector<double> fft_magnitude(std::span<const double> series, const FeatureConfig& cfg);

struct SpectralPeak {
  double freq_hz = 0.0;
  double magnitude = 0.0;

  bool operator==(const SpectralPeak&) const = default;
};

/// The k strongest strict local maxima over bins 1 .. n/2-1, strongest
/// first, equal magnitudes ordered by lower frequency; padded with (0, 0).
std::vector<SpectralPeak> spectral_peaks(std::span<const double> spectrum, double rate_hz,
                                         std::size_t k);

/// Per band, sum of |X_k|^2 / n_fft over non-DC bins whose center frequency
/// falls in the band.
std::vector<double> band_power(std::span<const double> spectrum, double rate_hz,
                               std::span<const Band> bands);

FeatureVector extract_features(const Window& w, const FeatureConfig& cfg);

/// Feature names in layout order, e.g. "accX_mean", "accZ_band3".
std::vector<std::string> feature_names(const FeatureConfig& cfg, int axes);

// -- normalization ---------------------------------------------------------

class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> mean, std::vector<double> std, double epsilon);

  std::size_t dimension() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }
  double epsilon() const { return epsilon_; }

  FeatureVector apply(std::span<const double> v) const;
  void apply_inplace(std::vector<FeatureVector>& vs) const;

  bool operator==(const Normalizer&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
  double epsilon_ = 1e-6;
};

/// Per-feature z-score fit; stds are floored at epsilon.
Normalizer fit_normalizer(std::span<const FeatureVector> train, double epsilon = 1e-6);

// -- feature dump ----------------------------------------------------------

struct LabeledFeatures {
  std::string recording_id;
  std::int64_t start_ms = 0;
  ActivityLabel label = ActivityLabel::Stationary;
  FeatureVector values;
};

/// CSV with header recording_id,start_ms,label,f0..f{D-1}.
void write_feature_csv(std::ostream& out, std::span<const LabeledFeatures> rows);

}  // namespace gait
