#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gaitml/error.hpp"
#include "gaitml/windowing.hpp"
#include "oracles.hpp"

using namespace gait;

namespace {

Recording ramp(std::size_t n, double rate_hz) {
  Recording r;
  r.id = "ramp";
  r.label = ActivityLabel::Walking;
  r.rate_hz = rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    r.samples.push_back({static_cast<std::int64_t>(std::llround(i * 1000.0 / rate_hz)),
                         static_cast<double>(i), -static_cast<double>(i), 1.0, std::nullopt});
  }
  return r;
}

}  // namespace

TEST_CASE("10 s at 100 Hz, 2 s window, 80 ms stride gives 101 windows") {
  const Recording rec = ramp(1000, 100.0);
  const auto windows = segment(rec, {2000, 80});
  REQUIRE(windows.size() == 101);
  CHECK(windows.front().start_ms == 0);
  CHECK(windows.back().start_ms == 8000);
  for (const auto& w : windows) {
    CHECK(w.samples.size() == 200);
    CHECK(w.label == ActivityLabel::Walking);
    CHECK(w.recording_id == "ramp");
    CHECK(w.start_ms % 80 == 0);
  }
}

TEST_CASE("duration equal to the window gives exactly one window") {
  const auto windows = segment(ramp(200, 100.0), {2000, 80});
  REQUIRE(windows.size() == 1);
  CHECK(windows[0].start_ms == 0);
}

TEST_CASE("9999 ms at 1 kHz gives 100 windows") {
  CHECK(oracle::brute_force_window_count(9999, 2000, 80) == 100);
  CHECK(segment(ramp(9999, 1000.0), {2000, 80}).size() == 100);
}

TEST_CASE("window count matches brute-force offset enumeration") {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::int64_t window = 1 + static_cast<std::int64_t>(gen() % 3000);
    const std::int64_t stride = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint32_t>(window));
    const std::int64_t duration = window + static_cast<std::int64_t>(gen() % 8000);
    // 1 kHz makes one sample per millisecond.
    const WindowGeometry geo = window_geometry({window, stride}, 1000.0);
    CHECK(window_count(static_cast<std::size_t>(duration), geo) ==
          oracle::brute_force_window_count(duration, window, stride));
  }
}

TEST_CASE("windows reproduce the source slice exactly") {
  const Recording rec = ramp(730, 100.0);
  const auto windows = segment(rec, {1500, 120});
  for (const auto& w : windows) {
    const std::size_t offset = static_cast<std::size_t>(w.start_ms / 10);
    REQUIRE(offset + w.samples.size() <= rec.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(w.samples[i] == rec.samples[offset + i]);
  }
}

TEST_CASE("segmentation errors") {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code([] { segment(ramp(199, 100.0), {2000, 80}); }) == ErrorCode::RecordingTooShort);
  CHECK(code([] { segment(ramp(1000, 100.0), {2000, 85}); }) == ErrorCode::InvalidStrideForRate);
  CHECK(code([] { segment(ramp(1000, 100.0), {2005, 80}); }) == ErrorCode::InvalidStrideForRate);
  CHECK(code([] { segment(ramp(1000, 100.0), {2000, 0}); }) == ErrorCode::InvalidWindowConfig);
  CHECK(code([] { segment(ramp(1000, 100.0), {1000, 2000}); }) == ErrorCode::InvalidWindowConfig);
  CHECK(code([] { segment(ramp(1000, 100.0), {-10, 10}); }) == ErrorCode::InvalidWindowConfig);
}

TEST_CASE("stride equal to window tiles without overlap") {
  const auto windows = segment(ramp(1000, 100.0), {2000, 2000});
  CHECK(windows.size() == 5);
  CHECK(windows[1].samples.front().ax == 200.0);
}
