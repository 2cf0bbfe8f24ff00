#include "gaitml/windowing.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gaitml/error.hpp"

namespace gait {

void WindowConfig::validate() const {
  if (window_ms <= 0 || stride_ms <= 0 || stride_ms > window_ms) {
    throw Error(ErrorCode::InvalidWindowConfig,
                fmt::format("window {} ms / stride {} ms violates 0 < stride <= window", window_ms,
                            stride_ms));
  }
}

namespace {

std::size_t whole_samples(std::int64_t ms, double rate_hz, const char* what) {
  const double exact = static_cast<double>(ms) * rate_hz / 1000.0;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1.0) {
    throw Error(ErrorCode::InvalidStrideForRate,
                fmt::format("{} of {} ms is {} samples at {} Hz, not a whole number", what, ms,
                            exact, rate_hz));
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

WindowGeometry window_geometry(const WindowConfig& cfg, double rate_hz) {
  cfg.validate();
  return {whole_samples(cfg.window_ms, rate_hz, "window"),
          whole_samples(cfg.stride_ms, rate_hz, "stride")};
}

std::size_t window_count(std::size_t n_samples, const WindowGeometry& geo) {
  if (n_samples < geo.window_samples) return 0;
  return (n_samples - geo.window_samples) / geo.stride_samples + 1;
}

std::vector<Window> segment(const Recording& rec, const WindowConfig& cfg) {
  const WindowGeometry geo = window_geometry(cfg, rec.rate_hz);
  const std::size_t n = window_count(rec.samples.size(), geo);
  if (n == 0) {
    throw Error(ErrorCode::RecordingTooShort,
                fmt::format("{}: {} samples, window needs {}", rec.id, rec.samples.size(),
                            geo.window_samples));
  }
  const std::span<const Sample> all(rec.samples);
  std::vector<Window> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({rec.id, rec.label, static_cast<std::int64_t>(i) * cfg.stride_ms, rec.rate_hz,
                   rec.axes, all.subspan(i * geo.stride_samples, geo.window_samples)});
  }
  return out;
}

}  // namespace gait
