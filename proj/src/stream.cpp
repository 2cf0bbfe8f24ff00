#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "gaitml/deploy.hpp"
#include "gaitml/error.hpp"

namespace gait {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

}  // namespace

InferenceResult infer_window(const ModelBundle& b, const Window& w) {
  InferenceResult r;
  const auto t0 = Clock::now();
  const FeatureVector normalized = b.normalizer.apply(extract_features(w, b.features));
  const auto t1 = Clock::now();
  r.probs = classify(b.classifier, normalized);
  const auto t2 = Clock::now();
  r.anomaly_score = anomaly_score(b.anomaly, normalized);
  const auto t3 = Clock::now();
  r.timings = {elapsed_ms(t0, t1), elapsed_ms(t1, t2), elapsed_ms(t2, t3)};
  return r;
}

std::uint16_t quantize_probability(double p) {
  const double c = std::round(std::clamp(p, 0.0, 1.0) * 256.0);
  return static_cast<std::uint16_t>(c);
}

ClassificationEvent make_event(const InferenceResult& r, std::int64_t window_end_ms) {
  ClassificationEvent ev;
  ev.raw_probs = r.probs;
  for (double p : r.probs) ev.prob_counts.push_back(quantize_probability(p));
  ev.anomaly_score = r.anomaly_score;
  ev.window_end_ms = window_end_ms;
  ev.timings = r.timings;
  return ev;
}

std::string format_event(const ClassificationEvent& ev, std::span<const std::string> labels) {
  if (labels.size() != ev.prob_counts.size()) {
    throw Error(ErrorCode::DimensionMismatch, "label count does not match event classes");
  }
  const auto ms = [](double v) { return static_cast<long long>(v); };
  std::string out = fmt::format("Predictions (DSP: {} ms., Classification: {} ms., Anomaly: {} ms.):\n",
                                ms(ev.timings.dsp_ms), ms(ev.timings.classify_ms),
                                ms(ev.timings.anomaly_ms));
  for (std::size_t c = 0; c < labels.size(); ++c) {
    out += fmt::format("    {}: {:.5f}\n", labels[c], ev.probability(c));
  }
  out += fmt::format("    anomaly score: {:.3f}\n", ev.anomaly_score);
  return out;
}

std::string format_event(const ClassificationEvent& ev) {
  std::vector<std::string> labels;
  for (ActivityLabel l : kAllLabels) labels.emplace_back(display_name(l));
  return format_event(ev, labels);
}

StreamEngine::StreamEngine(ModelBundle bundle) : bundle_(std::move(bundle)) {
  bundle_.validate();
  geo_ = window_geometry(bundle_.window, bundle_.rate_hz);
  ring_.resize(geo_.window_samples);
  scratch_.reserve(geo_.window_samples);
}

void StreamEngine::reset() {
  head_ = 0;
  filled_ = 0;
  seen_ = 0;
  last_t_ms_.reset();
}

std::optional<ClassificationEvent> StreamEngine::push(const Sample& s) {
  if (last_t_ms_ && s.t_ms <= *last_t_ms_) {
    throw Error(ErrorCode::OutOfOrderSample,
                fmt::format("sample at {} ms after {} ms", s.t_ms, *last_t_ms_));
  }
  if (s.gyro.has_value() != (bundle_.axes == 6)) {
    throw Error(ErrorCode::InvalidValue, "sample axes do not match the bundle");
  }
  last_t_ms_ = s.t_ms;
  ring_[head_] = s;
  head_ = (head_ + 1) % ring_.size();
  filled_ = std::min(filled_ + 1, ring_.size());
  ++seen_;

  if (filled_ < ring_.size()) return std::nullopt;
  if ((seen_ - ring_.size()) % geo_.stride_samples != 0) return std::nullopt;

  // Oldest sample sits at head_ once the ring is full.
  scratch_.clear();
  scratch_.insert(scratch_.end(), ring_.begin() + static_cast<std::ptrdiff_t>(head_), ring_.end());
  scratch_.insert(scratch_.end(), ring_.begin(), ring_.begin() + static_cast<std::ptrdiff_t>(head_));
  const std::int64_t start_ms =
      static_cast<std::int64_t>((seen_ - ring_.size()) / geo_.stride_samples) * bundle_.window.stride_ms;
  const Window w{"stream", ActivityLabel::Stationary, start_ms, bundle_.rate_hz, bundle_.axes, scratch_};
  return make_event(infer_window(bundle_, w), s.t_ms);
}

}  // namespace gait
