#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaitml/dataset.hpp"

namespace gait {

struct WindowConfig {
  std::int64_t window_ms = 2000;
  std::int64_t stride_ms = 80;

  void validate() const;

  bool operator==(const WindowConfig&) const = default;
};

/// Window length and hop converted to sample counts at `rate_hz`. Both must
/// come out as whole numbers of samples.
struct WindowGeometry {
  std::size_t window_samples = 0;
  std::size_t stride_samples = 0;
};

WindowGeometry window_geometry(const WindowConfig& cfg, double rate_hz);

/// A view onto a slice of a Recording. The window does not own its samples;
/// it stays valid only as long as the source recording is alive and unmodified.
struct Window {
  std::string recording_id;
  ActivityLabel label = ActivityLabel::Stationary;
  std::int64_t start_ms = 0;
  double rate_hz = 100.0;
  int axes = 3;
  std::span<const Sample> samples;
};

/// Number of windows a recording of `n_samples` yields.
std::size_t window_count(std::size_t n_samples, const WindowGeometry& geo);

/// Incomplete trailing windows are dropped.
std::vector<Window> segment(const Recording& rec, const WindowConfig& cfg);

}  // namespace gait
