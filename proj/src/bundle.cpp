#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "gaitml/binary_io.hpp"
#include "gaitml/deploy.hpp"
#include "gaitml/error.hpp"

namespace gait {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'G', 'A', 'I', 'T'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4;

enum class Section : std::uint8_t {
  Dims = 1,
  Weights = 2,
  Scales = 3,
  Biases = 4,
  Normalizer = 5,
  Centroids = 6,
  Radii = 7,
  Configs = 8,
  Labels = 9,
};

enum class ClassifierKind : std::uint8_t { Float64 = 0, Int8 = 1 };

template <typename Fn>
void write_section(ByteWriter& w, Section tag, Fn&& body) {
  w.u8(static_cast<std::uint8_t>(tag));
  const std::size_t len_at = w.size();
  w.u32(0);
  const std::size_t start = w.size();
  body();
  w.patch_u32(len_at, static_cast<std::uint32_t>(w.size() - start));
}

template <typename Fn>
void read_section(ByteReader& r, Section tag, Fn&& body) {
  const std::uint8_t got = r.u8();
  if (got != static_cast<std::uint8_t>(tag)) {
    throw Error(ErrorCode::InconsistentBundle,
                fmt::format("expected section {}, found {}", static_cast<int>(tag), got));
  }
  const std::uint32_t len = r.u32();
  const std::size_t start = r.position();
  ByteReader sub(r.bytes(len));
  body(sub);
  if (sub.remaining() != 0) {
    throw Error(ErrorCode::InconsistentBundle,
                fmt::format("section {} has {} unread bytes at offset {}", static_cast<int>(tag),
                            sub.remaining(), start));
  }
}

std::vector<std::uint8_t> encode_payload(const ModelBundle& b) {
  b.validate();
  ByteWriter w;
  const bool quant = b.quantized();
  const std::vector<std::size_t>& dims =
      std::visit([](const auto& m) -> const std::vector<std::size_t>& { return m.dims; }, b.classifier);

  write_section(w, Section::Dims, [&] {
    w.u8(static_cast<std::uint8_t>(quant ? ClassifierKind::Int8 : ClassifierKind::Float64));
    w.u32(static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
  });
  write_section(w, Section::Weights, [&] {
    if (quant) {
      for (const auto& l : std::get<QuantModel>(b.classifier).layers) {
        for (std::int8_t v : l.weights) w.i8(v);
      }
    } else {
      for (const auto& l : std::get<MlpModel>(b.classifier).layers) w.f64s(l.weights);
    }
  });
  write_section(w, Section::Scales, [&] {
    if (quant) {
      for (const auto& l : std::get<QuantModel>(b.classifier).layers) w.f64s(l.scales);
    }
  });
  write_section(w, Section::Biases, [&] {
    std::visit([&](const auto& m) {
      for (const auto& l : m.layers) w.f64s(l.bias);
    }, b.classifier);
  });
  write_section(w, Section::Normalizer, [&] {
    w.f64(b.normalizer.epsilon());
    w.u32(static_cast<std::uint32_t>(b.normalizer.dimension()));
    w.f64s(b.normalizer.mean());
    w.f64s(b.normalizer.std());
  });
  write_section(w, Section::Centroids, [&] {
    w.u32(static_cast<std::uint32_t>(b.anomaly.k()));
    w.u32(static_cast<std::uint32_t>(b.anomaly.dimension()));
    for (const auto& c : b.anomaly.centroids) w.f64s(c);
  });
  write_section(w, Section::Radii, [&] {
    w.u32(static_cast<std::uint32_t>(b.anomaly.radii.size()));
    w.f64s(b.anomaly.radii);
  });
  write_section(w, Section::Configs, [&] {
    w.f64(b.rate_hz);
    w.u8(static_cast<std::uint8_t>(b.axes));
    w.i64(b.window.window_ms);
    w.i64(b.window.stride_ms);
    w.u32(static_cast<std::uint32_t>(b.features.n_fft));
    w.u32(static_cast<std::uint32_t>(b.features.peaks_k));
    w.u8(b.features.taper == Taper::Hann ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(b.features.bands.size()));
    for (const Band& band : b.features.bands) {
      w.f64(band.lo_hz);
      w.f64(band.hi_hz);
    }
  });
  write_section(w, Section::Labels, [&] {
    w.u32(static_cast<std::uint32_t>(b.labels.size()));
    for (const auto& s : b.labels) w.str(s);
  });
  return w.take();
}

ModelBundle decode_payload(std::span<const std::uint8_t> payload, std::uint16_t version) {
  ByteReader r(payload);
  ModelBundle b;
  b.version = version;
  ClassifierKind kind = ClassifierKind::Float64;
  std::vector<std::size_t> dims;

  read_section(r, Section::Dims, [&](ByteReader& s) {
    const std::uint8_t k = s.u8();
    if (k > 1) throw Error(ErrorCode::InconsistentBundle, "unknown classifier kind");
    kind = static_cast<ClassifierKind>(k);
    const std::uint32_t n = s.u32();
    if (n < 2 || n > 16) throw Error(ErrorCode::InconsistentBundle, "implausible layer count");
    for (std::uint32_t i = 0; i < n; ++i) dims.push_back(s.u32());
  });

  MlpModel fm;
  QuantModel qm;
  fm.dims = qm.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    fm.layers.push_back({dims[l], dims[l + 1], {}, {}});
    qm.layers.push_back({dims[l], dims[l + 1], {}, {}, {}});
  }

  read_section(r, Section::Weights, [&](ByteReader& s) {
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const std::size_t n = dims[l] * dims[l + 1];
      if (kind == ClassifierKind::Int8) {
        const auto raw = s.bytes(n);
        qm.layers[l].weights.assign(reinterpret_cast<const std::int8_t*>(raw.data()),
                                    reinterpret_cast<const std::int8_t*>(raw.data()) + n);
      } else {
        fm.layers[l].weights = s.f64s(n);
      }
    }
  });
  read_section(r, Section::Scales, [&](ByteReader& s) {
    if (kind != ClassifierKind::Int8) return;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) qm.layers[l].scales = s.f64s(dims[l + 1]);
  });
  read_section(r, Section::Biases, [&](ByteReader& s) {
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      auto bias = s.f64s(dims[l + 1]);
      if (kind == ClassifierKind::Int8) qm.layers[l].bias = std::move(bias);
      else fm.layers[l].bias = std::move(bias);
    }
  });
  if (kind == ClassifierKind::Int8) b.classifier = std::move(qm);
  else b.classifier = std::move(fm);

  read_section(r, Section::Normalizer, [&](ByteReader& s) {
    const double eps = s.f64();
    const std::uint32_t dim = s.u32();
    auto mu = s.f64s(dim);
    auto sd = s.f64s(dim);
    b.normalizer = Normalizer(std::move(mu), std::move(sd), eps);
  });
  read_section(r, Section::Centroids, [&](ByteReader& s) {
    const std::uint32_t k = s.u32();
    const std::uint32_t dim = s.u32();
    for (std::uint32_t j = 0; j < k; ++j) b.anomaly.centroids.push_back(s.f64s(dim));
  });
  read_section(r, Section::Radii, [&](ByteReader& s) {
    const std::uint32_t k = s.u32();
    b.anomaly.radii = s.f64s(k);
  });
  read_section(r, Section::Configs, [&](ByteReader& s) {
    b.rate_hz = s.f64();
    b.axes = s.u8();
    b.window.window_ms = s.i64();
    b.window.stride_ms = s.i64();
    b.features.n_fft = s.u32();
    b.features.peaks_k = s.u32();
    b.features.taper = s.u8() == 1 ? Taper::Hann : Taper::Rectangular;
    const std::uint32_t nb = s.u32();
    b.features.bands.clear();
    for (std::uint32_t i = 0; i < nb; ++i) {
      const double lo = s.f64();
      const double hi = s.f64();
      b.features.bands.push_back({lo, hi});
    }
  });
  read_section(r, Section::Labels, [&](ByteReader& s) {
    const std::uint32_t n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) b.labels.push_back(s.str());
  });
  if (r.remaining() != 0) {
    throw Error(ErrorCode::InconsistentBundle, fmt::format("{} trailing payload bytes", r.remaining()));
  }
  b.validate();
  return b;
}

}  // namespace

void ModelBundle::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InconsistentBundle, what); };
  try {
    std::visit([](const auto& m) { m.validate(); }, classifier);
    anomaly.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  const std::size_t dim = features.dimension(axes);
  if (classifier_input_dim(classifier) != dim) {
    fail(fmt::format("classifier input {} != feature dimension {}", classifier_input_dim(classifier), dim));
  }
  if (normalizer.dimension() != dim) fail("normalizer dimension mismatch");
  if (anomaly.dimension() != dim) fail("anomaly model dimension mismatch");
  if (labels.size() != classifier_output_dim(classifier)) fail("label count != classifier outputs");
  if (version != kBundleVersion) {
    throw Error(ErrorCode::UnsupportedVersion, fmt::format("bundle version {}", version));
  }
  try {
    window.validate();
    features.validate(rate_hz);
    window_geometry(window, rate_hz);
  } catch (const Error& e) {
    fail(e.what());
  }
}

std::uint32_t bundle_checksum(const ModelBundle& b) { return crc32(encode_payload(b)); }

std::vector<std::uint8_t> encode_bundle(const ModelBundle& b) {
  const auto payload = encode_payload(b);
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(b.version);
  w.u32(crc32(payload));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.bytes(payload);
  return w.take();
}

ModelBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size()) throw Error(ErrorCode::TruncatedFile, "file shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::BadMagic, "not a GAIT bundle");
  }
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::TruncatedFile, "incomplete header");
  ByteReader r(bytes.subspan(kMagic.size()));
  const std::uint16_t version = r.u16();
  if (version != kBundleVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                fmt::format("bundle version {} (supported: {})", version, kBundleVersion));
  }
  const std::uint32_t stored_crc = r.u32();
  const std::uint32_t len = r.u32();
  if (r.remaining() < len) {
    throw Error(ErrorCode::TruncatedFile,
                fmt::format("payload declares {} bytes, file has {}", len, r.remaining()));
  }
  if (r.remaining() > len) {
    throw Error(ErrorCode::InconsistentBundle, fmt::format("{} bytes after payload", r.remaining() - len));
  }
  const auto payload = r.bytes(len);
  const std::uint32_t crc = crc32(payload);
  if (crc != stored_crc) {
    throw Error(ErrorCode::ChecksumMismatch,
                fmt::format("stored crc {:08x}, computed {:08x}", stored_crc, crc));
  }
  return decode_payload(payload, version);
}

void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
  const auto bytes = encode_bundle(b);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_bundle(bytes);
}

}  // namespace gait
