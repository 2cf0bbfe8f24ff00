#include "gaitml/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gaitml/error.hpp"

namespace gait {

std::vector<Band> default_bands() {
  return {{0.5, 1.0}, {1.0, 2.0}, {2.0, 4.0}, {4.0, 8.0}, {8.0, 16.0},
          {16.0, std::numeric_limits<double>::infinity()}};
}

void FeatureConfig::validate(double rate_hz) const {
  if (n_fft < 2 || !std::has_single_bit(n_fft)) {
    throw Error(ErrorCode::InvalidFeatureConfig, fmt::format("n_fft {} is not a power of two", n_fft));
  }
  if (peaks_k < 1) throw Error(ErrorCode::InvalidFeatureConfig, "peaks_k must be >= 1");
  const double nyquist = rate_hz / 2.0;
  double prev_hi = 0.0;
  for (const Band& b : bands) {
    const double hi = std::min(b.hi_hz, nyquist);
    if (!(b.lo_hz > 0.0) || !(b.lo_hz < hi) || b.lo_hz < prev_hi) {
      throw Error(ErrorCode::InvalidFeatureConfig,
                  fmt::format("band [{}, {}) is empty, overlapping or outside (0, {}]", b.lo_hz,
                              b.hi_hz, nyquist));
    }
    if (std::isfinite(b.hi_hz) && b.hi_hz > nyquist) {
      throw Error(ErrorCode::InvalidFeatureConfig,
                  fmt::format("band upper edge {} Hz exceeds Nyquist {} Hz", b.hi_hz, nyquist));
    }
    prev_hi = hi;
  }
}

double mean(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "mean of empty series");
  double sum = 0.0;
  for (double x : series) sum += x;
  return sum / static_cast<double>(series.size());
}

double stddev(std::span<const double> series) {
  const double m = mean(series);
  double ss = 0.0;
  for (double x : series) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(series.size()));
}

double rms(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "rms of empty series");
  double ss = 0.0;
  for (double x : series) ss += x * x;
  return std::sqrt(ss / static_cast<double>(series.size()));
}

void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::InvalidFeatureConfig, fmt::format("FFT size {} is not a power of two", n));
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Direct twiddle per k; a running product drifts at large n.
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(angle), std::sin(angle));
      for (std::size_t start = 0; start < n; start += len) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> fft_magnitude(std::span<const double> series, const FeatureConfig& cfg) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "spectrum of empty series");
  if (cfg.n_fft < 2 || !std::has_single_bit(cfg.n_fft)) {
    throw Error(ErrorCode::InvalidFeatureConfig, fmt::format("n_fft {} is not a power of two", cfg.n_fft));
  }
  if (series.size() > cfg.n_fft) {
    throw Error(ErrorCode::SeriesTooLong,
                fmt::format("series of {} samples exceeds n_fft {}", series.size(), cfg.n_fft));
  }
  const std::size_t n = series.size();
  const double m = mean(series);
  std::vector<std::complex<double>> buf(cfg.n_fft);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (cfg.taper == Taper::Hann && n > 1) {
      w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n - 1)));
    }
    buf[i] = (series[i] - m) * w;
  }
  fft_inplace(buf);
  std::vector<double> mag(cfg.n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<SpectralPeak> spectral_peaks(std::span<const double> spectrum, double rate_hz,
                                         std::size_t k) {
  std::vector<SpectralPeak> peaks;
  if (spectrum.size() >= 3) {
    const double n_fft = 2.0 * static_cast<double>(spectrum.size() - 1);
    for (std::size_t i = 1; i + 1 < spectrum.size(); ++i) {
      if (spectrum[i] > spectrum[i - 1] && spectrum[i] > spectrum[i + 1]) {
        peaks.push_back({static_cast<double>(i) * rate_hz / n_fft, spectrum[i]});
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const SpectralPeak& a, const SpectralPeak& b) {
    return a.magnitude > b.magnitude;
  });
  peaks.resize(k, SpectralPeak{});
  return peaks;
}

std::vector<double> band_power(std::span<const double> spectrum, double rate_hz,
                               std::span<const Band> bands) {
  std::vector<double> out(bands.size(), 0.0);
  if (spectrum.size() < 2) return out;
  const double n_fft = 2.0 * static_cast<double>(spectrum.size() - 1);
  const double nyquist = rate_hz / 2.0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const double hi = std::min(bands[b].hi_hz, nyquist);
    double acc = 0.0;
    for (std::size_t i = 1; i < spectrum.size(); ++i) {
      const double f = static_cast<double>(i) * rate_hz / n_fft;
      if (f >= bands[b].lo_hz && f < hi) acc += spectrum[i] * spectrum[i];
    }
    out[b] = acc / n_fft;
  }
  return out;
}

FeatureVector extract_features(const Window& w, const FeatureConfig& cfg) {
  cfg.validate(w.rate_hz);
  if (w.samples.empty()) throw Error(ErrorCode::EmptySeries, w.recording_id + ": empty window");
  const auto axes = static_cast<std::size_t>(w.axes);
  FeatureVector out;
  out.reserve(cfg.dimension(w.axes));
  std::vector<double> series(w.samples.size());
  for (std::size_t a = 0; a < axes; ++a) {
    for (std::size_t i = 0; i < w.samples.size(); ++i) series[i] = w.samples[i].axis(a);
    out.push_back(mean(series));
    out.push_back(stddev(series));
    out.push_back(rms(series));
    const auto spectrum = fft_magnitude(series, cfg);
    for (const SpectralPeak& p : spectral_peaks(spectrum, w.rate_hz, cfg.peaks_k)) {
      out.push_back(p.freq_hz);
      out.push_back(p.magnitude);
    }
    for (double p : band_power(spectrum, w.rate_hz, cfg.bands)) out.push_back(p);
  }
  return out;
}

std::vector<std::string> feature_names(const FeatureConfig& cfg, int axes) {
  static constexpr std::array<const char*, 6> kAxis = {"accX", "accY", "accZ",
                                                       "gyrX", "gyrY", "gyrZ"};
  std::vector<std::string> names;
  for (int a = 0; a < axes; ++a) {
    const std::string ax = kAxis.at(static_cast<std::size_t>(a));
    names.push_back(ax + "_mean");
    names.push_back(ax + "_std");
    names.push_back(ax + "_rms");
    for (std::size_t p = 1; p <= cfg.peaks_k; ++p) {
      names.push_back(fmt::format("{}_peak{}_freq", ax, p));
      names.push_back(fmt::format("{}_peak{}_mag", ax, p));
    }
    for (std::size_t b = 1; b <= cfg.bands.size(); ++b) names.push_back(fmt::format("{}_band{}", ax, b));
  }
  return names;
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(std::vector<double> mean, std::vector<double> std, double epsilon)
    : mean_(std::move(mean)), std_(std::move(std)), epsilon_(epsilon) {
  if (mean_.size() != std_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "normalizer mean/std sizes differ");
  }
  if (!(epsilon_ > 0.0)) throw Error(ErrorCode::InvalidValue, "normalizer epsilon must be > 0");
  for (double& s : std_) s = std::max(s, epsilon_);
}

FeatureVector Normalizer::apply(std::span<const double> v) const {
  if (v.size() != mean_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("feature vector has {} values, normalizer expects {}", v.size(),
                            mean_.size()));
  }
  FeatureVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean_[i]) / std_[i];
  return out;
}

void Normalizer::apply_inplace(std::vector<FeatureVector>& vs) const {
  for (auto& v : vs) v = apply(v);
}

Normalizer fit_normalizer(std::span<const FeatureVector> train, double epsilon) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrainingSet, "cannot fit normalizer on no data");
  const std::size_t dim = train.front().size();
  // Welford: a constant column yields its value exactly as the mean.
  std::vector<double> mu(dim, 0.0), m2(dim, 0.0);
  double count = 0.0;
  for (const auto& v : train) {
    if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged training features");
    count += 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double delta = v[i] - mu[i];
      mu[i] += delta / count;
      m2[i] += delta * (v[i] - mu[i]);
    }
  }
  std::vector<double> sd(dim);
  for (std::size_t i = 0; i < dim; ++i) sd[i] = std::sqrt(m2[i] / count);
  return Normalizer(std::move(mu), std::move(sd), epsilon);
}

void write_feature_csv(std::ostream& out, std::span<const LabeledFeatures> rows) {
  out << "recording_id,start_ms,label";
  const std::size_t dim = rows.empty() ? 0 : rows.front().values.size();
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{}", r.recording_id, r.start_ms, display_name(r.label));
    for (double v : r.values) fmt::print(out, ",{}", v);
    out << '\n';
  }
}

}  // namespace gait
