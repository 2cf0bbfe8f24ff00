#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gaitml/deploy.hpp"
#include "gaitml/error.hpp"

namespace gait {

namespace {

template <typename T, typename Fmt>
void emit_array(std::string& out, std::string_view ctype, std::string_view name,
                std::span<const T> values, Fmt&& format_value) {
  fmt::format_to(std::back_inserter(out), "static const {} {}[{}] = {{", ctype, name, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += i % 10 == 0 ? "\n    " : " ";
    out += format_value(values[i]);
    if (i + 1 < values.size()) out += ",";
  }
  out += "\n};\n";
}

std::string c_float(double v) { return fmt::format("{:.9g}f", v); }

}  // namespace

std::string export_c_header(const ModelBundle& b) {
  if (!b.quantized()) throw Error(ErrorCode::NotQuantized, "C export needs an int8 bundle");
  b.validate();
  const QuantModel& q = std::get<QuantModel>(b.classifier);
  const auto& dims = q.dims;

  std::string out;
  auto it = std::back_inserter(out);
  out += "/* Generated by gaitml. Do not edit. */\n";
  fmt::format_to(it, "/* bundle crc32: 0x{:08x} */\n", bundle_checksum(b));
  out += "#ifndef GAIT_MODEL_H\n#define GAIT_MODEL_H\n\n#include <stdint.h>\n\n";

  fmt::format_to(it, "#define GAIT_BUNDLE_VERSION {}\n", b.version);
  fmt::format_to(it, "#define GAIT_RATE_HZ {}\n", b.rate_hz);
  fmt::format_to(it, "#define GAIT_AXES {}\n", b.axes);
  fmt::format_to(it, "#define GAIT_WINDOW_MS {}\n", b.window.window_ms);
  fmt::format_to(it, "#define GAIT_STRIDE_MS {}\n", b.window.stride_ms);
  fmt::format_to(it, "#define GAIT_N_FFT {}\n", b.features.n_fft);
  fmt::format_to(it, "#define GAIT_PEAKS_K {}\n", b.features.peaks_k);
  fmt::format_to(it, "#define GAIT_HANN_TAPER {}\n", b.features.taper == Taper::Hann ? 1 : 0);
  fmt::format_to(it, "#define GAIT_NUM_BANDS {}\n", b.features.bands.size());
  fmt::format_to(it, "#define GAIT_NUM_LAYERS {}\n", q.layers.size());
  for (std::size_t l = 0; l < dims.size(); ++l) fmt::format_to(it, "#define GAIT_DIM{} {}\n", l, dims[l]);
  fmt::format_to(it, "#define GAIT_NUM_CLASSES {}\n", q.output_dim());
  fmt::format_to(it, "#define GAIT_NUM_PARAMS {}\n", q.parameter_count());
  fmt::format_to(it, "#define GAIT_ANOMALY_K {}\n\n", b.anomaly.k());

  const double nyquist = b.rate_hz / 2.0;
  std::vector<double> edges;
  for (const Band& band : b.features.bands) {
    edges.push_back(band.lo_hz);
    edges.push_back(std::min(band.hi_hz, nyquist));
  }
  emit_array<double>(out, "float", "gait_band_edges_hz", edges, c_float);

  for (std::size_t l = 0; l < q.layers.size(); ++l) {
    const QuantLayer& ql = q.layers[l];
    out += "\n";
    emit_array<std::int8_t>(out, "int8_t", fmt::format("gait_layer{}_weights", l), ql.weights,
                            [](std::int8_t v) { return fmt::format("{}", static_cast<int>(v)); });
    emit_array<double>(out, "float", fmt::format("gait_layer{}_scales", l), ql.scales, c_float);
    emit_array<double>(out, "float", fmt::format("gait_layer{}_bias", l), ql.bias, c_float);
  }

  out += "\n";
  emit_array<double>(out, "float", "gait_norm_mean", b.normalizer.mean(), c_float);
  emit_array<double>(out, "float", "gait_norm_std", b.normalizer.std(), c_float);

  std::vector<double> centroids;
  for (const auto& c : b.anomaly.centroids) centroids.insert(centroids.end(), c.begin(), c.end());
  out += "\n";
  emit_array<double>(out, "float", "gait_anomaly_centroids", centroids, c_float);
  emit_array<double>(out, "float", "gait_anomaly_radii", b.anomaly.radii, c_float);

  out += "\n";
  emit_array<std::string>(out, "char* const", "gait_labels", b.labels,
                          [](const std::string& s) { return fmt::format("\"{}\"", s); });
  out += "\n#endif /* GAIT_MODEL_H */\n";
  return out;
}

}  // namespace gait
