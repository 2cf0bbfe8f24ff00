#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gaitml/deploy.hpp"
#include "gaitml/error.hpp"

namespace gait {

std::size_t QuantModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void QuantModel::validate() const {
  if (dims.size() < 2 || layers.size() + 1 != dims.size()) {
    throw Error(ErrorCode::InvalidDims, "quantized layers do not match dims");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const QuantLayer& q = layers[l];
    if (q.in != dims[l] || q.out != dims[l + 1] || q.weights.size() != q.in * q.out ||
        q.scales.size() != q.out || q.bias.size() != q.out) {
      throw Error(ErrorCode::InvalidDims, fmt::format("quantized layer {} shape inconsistent", l));
    }
    for (std::int8_t w : q.weights) {
      if (w < -127) throw Error(ErrorCode::InvalidValue, "int8 weight -128 not allowed");
    }
    for (double s : q.scales) {
      if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidValue, "bad row scale");
    }
  }
}

QuantModel quantize(const MlpModel& m) {
  m.validate();
  QuantModel q;
  q.dims = m.dims;
  for (const DenseLayer& layer : m.layers) {
    QuantLayer ql{layer.in, layer.out, std::vector<std::int8_t>(layer.weights.size()),
                  std::vector<double>(layer.out), layer.bias};
    for (std::size_t r = 0; r < layer.out; ++r) {
      double max_abs = 0.0;
      for (std::size_t c = 0; c < layer.in; ++c) max_abs = std::max(max_abs, std::abs(layer.w(r, c)));
      const double scale = std::max(max_abs / 127.0, kMinQuantScale);
      ql.scales[r] = scale;
      for (std::size_t c = 0; c < layer.in; ++c) {
        const double v = std::clamp(std::round(layer.w(r, c) / scale), -127.0, 127.0);
        ql.weights[r * layer.in + c] = static_cast<std::int8_t>(v);
      }
    }
    q.layers.push_back(std::move(ql));
  }
  return q;
}

MlpModel dequantize(const QuantModel& q) {
  MlpModel m;
  m.dims = q.dims;
  for (const QuantLayer& ql : q.layers) {
    DenseLayer d{ql.in, ql.out, std::vector<double>(ql.weights.size()), ql.bias};
    for (std::size_t r = 0; r < ql.out; ++r) {
      for (std::size_t c = 0; c < ql.in; ++c) d.w(r, c) = ql.weights[r * ql.in + c] * ql.scales[r];
    }
    m.layers.push_back(std::move(d));
  }
  return m;
}

std::vector<double> forward(const QuantModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("input has {} values, model expects {}", x.size(), m.input_dim()));
  }
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const QuantLayer& ql = m.layers[l];
    std::vector<double> z(ql.out);
    for (std::size_t r = 0; r < ql.out; ++r) {
      double acc = ql.bias[r];
      const std::int8_t* row = &ql.weights[r * ql.in];
      for (std::size_t c = 0; c < ql.in; ++c) acc += (row[c] * ql.scales[r]) * a[c];
      z[r] = l + 1 < m.layers.size() ? std::max(acc, 0.0) : acc;
    }
    a = std::move(z);
  }
  return softmax(a);
}

std::vector<double> classify(const Classifier& c, std::span<const double> x) {
  return std::visit([&](const auto& m) { return forward(m, x); }, c);
}

std::size_t classifier_input_dim(const Classifier& c) {
  return std::visit([](const auto& m) { return m.input_dim(); }, c);
}

std::size_t classifier_output_dim(const Classifier& c) {
  return std::visit([](const auto& m) { return m.output_dim(); }, c);
}

}  // namespace gait
