#include "gaitml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "gaitml/error.hpp"
#include "gaitml/rng.hpp"

namespace gait {

namespace {

constexpr std::array<std::string_view, kNumClasses> kDisplayNames = {
    "Going Downstairs", "Going Upstairs", "Stationary", "Walking"};

constexpr std::array<std::string_view, kNumClasses> kSlugs = {
    "going_downstairs", "going_upstairs", "stationary", "walking"};

constexpr std::array<std::string_view, 7> kColumns = {
    "timestamp_ms", "accX", "accY", "accZ", "gyrX", "gyrY", "gyrZ"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw Error(ErrorCode::MalformedRow,
                fmt::format("line {}: cannot parse '{}'", line_no, field));
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

std::string_view display_name(ActivityLabel label) {
  return kDisplayNames.at(class_index(label));
}

std::optional<ActivityLabel> label_from_display(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kDisplayNames[i] == name) return label_from_index(i);
  }
  return std::nullopt;
}

ActivityLabel label_from_index(std::size_t index) {
  if (index >= kNumClasses) {
    throw Error(ErrorCode::InvalidValue, fmt::format("class index {} out of range", index));
  }
  return static_cast<ActivityLabel>(index);
}

double Sample::axis(std::size_t i) const {
  switch (i) {
    case 0: return ax;
    case 1: return ay;
    case 2: return az;
    default:
      if (i < 6 && gyro) return (*gyro)[i - 3];
      throw Error(ErrorCode::InvalidValue, fmt::format("axis {} not available", i));
  }
}

void Recording::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw Error(ErrorCode::InvalidValue, fmt::format("{}: invalid rate {}", id, rate_hz));
  }
  if (axes != 3 && axes != 6) {
    throw Error(ErrorCode::InvalidValue, fmt::format("{}: axes must be 3 or 6", id));
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyFile, id + ": no samples");

  const double period = 1000.0 / rate_hz;
  const double tolerance = std::max(0.1 * period, 0.5) + 1e-9;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.t_ms < 0) {
      throw Error(ErrorCode::InvalidValue, fmt::format("{}: negative timestamp", id));
    }
    if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az)) {
      throw Error(ErrorCode::InvalidValue, fmt::format("{}: non-finite value at {}", id, i));
    }
    if (s.gyro.has_value() != (axes == 6)) {
      throw Error(ErrorCode::InvalidValue,
                  fmt::format("{}: gyro presence does not match axes at {}", id, i));
    }
    if (s.gyro) {
      for (double g : *s.gyro) {
        if (!std::isfinite(g)) {
          throw Error(ErrorCode::InvalidValue, fmt::format("{}: non-finite gyro at {}", id, i));
        }
      }
    }
    if (i == 0) continue;
    const std::int64_t delta = s.t_ms - samples[i - 1].t_ms;
    if (delta <= 0) {
      throw Error(ErrorCode::NonMonotonicTimestamps,
                  fmt::format("{}: timestamp {} follows {}", id, s.t_ms, samples[i - 1].t_ms));
    }
    if (std::abs(static_cast<double>(delta) - period) > tolerance) {
      throw Error(ErrorCode::RateMismatch,
                  fmt::format("{}: delta {} ms at sample {} vs nominal {:.3f} ms", id, delta, i,
                              period));
    }
  }
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const Recording& r : recordings) {
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::InvalidManifest, "duplicate recording id " + r.id);
    }
    if (r.rate_hz != recordings.front().rate_hz || r.axes != recordings.front().axes) {
      throw Error(ErrorCode::InvalidManifest, r.id + ": rate or axes differ from dataset");
    }
  }
}

std::size_t Dataset::count(ActivityLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      recordings.begin(), recordings.end(), [&](const Recording& r) { return r.label == label; }));
}

// ---------------------------------------------------------------------------

SampleCsvParser::SampleCsvParser(std::string_view header_line) {
  const auto header = split_fields(trim(header_line));
  n_fields_ = header.size();
  col_.fill(-1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
      if (header[c] == kColumns[k]) col_[k] = static_cast<int>(c);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (col_[k] < 0) throw Error(ErrorCode::MissingColumn, fmt::format("missing column {}", kColumns[k]));
  }
  const int gyro_present = (col_[4] >= 0) + (col_[5] >= 0) + (col_[6] >= 0);
  if (gyro_present != 0 && gyro_present != 3) {
    throw Error(ErrorCode::MissingColumn, "gyro columns must be all present or all absent");
  }
  axes_ = gyro_present == 3 ? 6 : 3;
}

Sample SampleCsvParser::parse_row(std::string_view line, std::size_t line_no) const {
  const auto fields = split_fields(trim(line));
  if (fields.size() != n_fields_) {
    throw Error(ErrorCode::MalformedRow, fmt::format("line {} has {} fields, expected {}", line_no,
                                                     fields.size(), n_fields_));
  }
  const auto field = [&](std::size_t k) { return fields[static_cast<std::size_t>(col_[k])]; };
  Sample s;
  s.t_ms = parse_number<std::int64_t>(field(0), line_no);
  s.ax = parse_number<double>(field(1), line_no);
  s.ay = parse_number<double>(field(2), line_no);
  s.az = parse_number<double>(field(3), line_no);
  if (axes_ == 6) {
    s.gyro = std::array<double, 3>{parse_number<double>(field(4), line_no),
                                   parse_number<double>(field(5), line_no),
                                   parse_number<double>(field(6), line_no)};
  }
  return s;
}

Recording parse_recording_csv(std::string_view text, double rate_hz, ActivityLabel label,
                              std::string id) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = trim(text.substr(start, nl - start));
      if (!line.empty()) lines.push_back(line);
      start = nl + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, id + ": file is empty");

  std::optional<SampleCsvParser> parser;
  try {
    parser.emplace(lines.front());
  } catch (const Error& e) {
    throw Error(e.code(), id + ": " + e.what());
  }
  if (lines.size() == 1) throw Error(ErrorCode::EmptyFile, id + ": header only");

  Recording rec;
  rec.id = std::move(id);
  rec.label = label;
  rec.rate_hz = rate_hz;
  rec.axes = parser->axes();
  rec.samples.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    rec.samples.push_back(parser->parse_row(lines[li], li + 1));
  }
  rec.validate();
  return rec;
}

Recording load_recording(const std::filesystem::path& path, double rate_hz, ActivityLabel label) {
  return parse_recording_csv(read_file(path), rate_hz, label, path.stem().string());
}

std::string recording_to_csv(const Recording& rec) {
  std::string out = rec.axes == 6 ? "timestamp_ms,accX,accY,accZ,gyrX,gyrY,gyrZ\n"
                                  : "timestamp_ms,accX,accY,accZ\n";
  auto it = std::back_inserter(out);
  for (const Sample& s : rec.samples) {
    fmt::format_to(it, "{},{:.6f},{:.6f},{:.6f}", s.t_ms, s.ax, s.ay, s.az);
    if (rec.axes == 6 && s.gyro) {
      fmt::format_to(it, ",{:.6f},{:.6f},{:.6f}", (*s.gyro)[0], (*s.gyro)[1], (*s.gyro)[2]);
    }
    out.push_back('\n');
  }
  return out;
}

void save_recording(const Recording& rec, const std::filesystem::path& path) {
  write_file(path, recording_to_csv(rec));
}

Manifest parse_manifest(std::string_view json_text) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(json_text);
    m.rate_hz = j.at("rate_hz").get<double>();
    m.axes = j.at("axes").get<int>();
    for (const auto& e : j.at("recordings")) {
      const auto label_str = e.at("label").get<std::string>();
      const auto label = label_from_display(label_str);
      if (!label) throw Error(ErrorCode::InvalidManifest, "unknown label '" + label_str + "'");
      m.recordings.push_back({e.at("file").get<std::string>(), *label, e.at("id").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, e.what());
  }
  if (!(m.rate_hz > 0.0)) throw Error(ErrorCode::InvalidManifest, "rate_hz must be positive");
  if (m.axes != 3 && m.axes != 6) throw Error(ErrorCode::InvalidManifest, "axes must be 3 or 6");
  std::set<std::string> ids;
  for (const auto& e : m.recordings) {
    if (!ids.insert(e.id).second) throw Error(ErrorCode::InvalidManifest, "duplicate id " + e.id);
  }
  return m;
}

std::string manifest_to_json(const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["rate_hz"] = manifest.rate_hz;
  j["axes"] = manifest.axes;
  j["recordings"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest.recordings) {
    j["recordings"].push_back(
        {{"file", e.file}, {"label", std::string(display_name(e.label))}, {"id", e.id}});
  }
  return j.dump(2) + "\n";
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const Manifest m = parse_manifest(read_file(manifest_path));
  const auto base = manifest_path.parent_path();
  Dataset ds;
  ds.manifest_path = manifest_path;
  for (const auto& e : m.recordings) {
    std::filesystem::path file = e.file;
    if (file.is_relative()) file = base / file;
    Recording rec = parse_recording_csv(read_file(file), m.rate_hz, e.label, e.id);
    if (rec.axes != m.axes) {
      throw Error(ErrorCode::InvalidManifest,
                  fmt::format("{}: has {} axes, manifest says {}", e.id, rec.axes, m.axes));
    }
    ds.recordings.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------

std::size_t stratified_train_count(std::size_t n_class, double train_fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n_class) * train_fraction + 0.5));
}

std::pair<Dataset, Dataset> split_by_recording(const Dataset& ds, double train_fraction,
                                               std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidValue, fmt::format("train fraction {} not in (0,1)", train_fraction));
  }
  Rng rng(seed);
  std::vector<bool> to_train(ds.recordings.size(), false);
  for (ActivityLabel label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
      if (ds.recordings[i].label == label) members.push_back(i);
    }
    if (members.empty()) continue;
    const std::size_t n_train = stratified_train_count(members.size(), train_fraction);
    if (members.size() < 2 || n_train == 0 || n_train >= members.size()) {
      throw Error(ErrorCode::InsufficientRecordings,
                  fmt::format("class '{}' has {} recording(s); {} would go to train",
                              display_name(label), members.size(), n_train));
    }
    rng.shuffle(std::span(members));
    for (std::size_t j = 0; j < n_train; ++j) to_train[members[j]] = true;
  }

  Dataset train, test;
  train.manifest_path = test.manifest_path = ds.manifest_path;
  for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
    (to_train[i] ? train : test).recordings.push_back(ds.recordings[i]);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------

const GaitTemplate* SynthConfig::gait_for(ActivityLabel label) const {
  switch (label) {
    case ActivityLabel::Walking: return &walking;
    case ActivityLabel::GoingUpstairs: return &upstairs;
    case ActivityLabel::GoingDownstairs: return &downstairs;
    case ActivityLabel::Stationary: return nullptr;
  }
  return nullptr;
}

namespace {

void check_synth_args(double duration_s, double rate_hz, const SynthConfig& cfg) {
  if (!(rate_hz >= 25.0 && rate_hz <= 400.0)) {
    throw Error(ErrorCode::InvalidValue, fmt::format("rate {} Hz outside [25, 400]", rate_hz));
  }
  if (!(duration_s >= cfg.min_duration_s)) {
    throw Error(ErrorCode::DurationTooShort,
                fmt::format("duration {} s shorter than {} s", duration_s, cfg.min_duration_s));
  }
  if (cfg.axes != 3 && cfg.axes != 6) throw Error(ErrorCode::InvalidValue, "axes must be 3 or 6");
}

std::size_t sample_count(double duration_s, double rate_hz) {
  return static_cast<std::size_t>(std::llround(duration_s * rate_hz));
}

std::int64_t timestamp_ms(std::size_t i, double rate_hz) {
  return std::llround(static_cast<double>(i) * 1000.0 / rate_hz);
}

}  // namespace

Recording synthesize_recording(ActivityLabel label, double duration_s, double rate_hz,
                               std::uint64_t seed, const SynthConfig& cfg) {
  check_synth_args(duration_s, rate_hz, cfg);
  Rng rng(seed);
  const double phase0 = cfg.random_start_phase ? 2.0 * std::numbers::pi * rng.uniform() : 0.0;
  const GaitTemplate* gait = cfg.gait_for(label);

  Recording rec;
  rec.label = label;
  rec.rate_hz = rate_hz;
  rec.axes = cfg.axes;
  const std::size_t n = sample_count(duration_s, rate_hz);
  rec.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    Sample s;
    s.t_ms = timestamp_ms(i, rate_hz);
    s.ax = rng.normal(0.0, cfg.noise_sigma_g);
    s.ay = rng.normal(0.0, cfg.noise_sigma_g);
    s.az = cfg.gravity_g + rng.normal(0.0, cfg.noise_sigma_g);
    double vertical_rate = 0.0;
    if (gait) {
      const double arg = 2.0 * std::numbers::pi * gait->freq_hz * t + phase0;
      s.az += gait->vertical_bias_g + gait->vertical_amp_g * std::sin(arg);
      s.ax += gait->forward_amp_g * std::sin(arg + gait->forward_phase_rad);
      vertical_rate = gait->vertical_amp_g * std::cos(arg);
    }
    if (cfg.axes == 6) {
      s.gyro = std::array<double, 3>{
          rng.normal(0.0, cfg.gyro_noise_dps),
          cfg.gyro_amp_dps_per_g * vertical_rate + rng.normal(0.0, cfg.gyro_noise_dps),
          rng.normal(0.0, cfg.gyro_noise_dps)};
    }
    rec.samples.push_back(s);
  }
  return rec;
}

Recording synthesize_shaking(double duration_s, double rate_hz, std::uint64_t seed,
                             double freq_hz, double amp_g, const SynthConfig& cfg) {
  check_synth_args(duration_s, rate_hz, cfg);
  Rng rng(seed);
  const double phase0 = 2.0 * std::numbers::pi * rng.uniform();
  constexpr double kThird = 2.0 * std::numbers::pi / 3.0;

  Recording rec;
  rec.id = "shaking";
  rec.label = ActivityLabel::Stationary;
  rec.rate_hz = rate_hz;
  rec.axes = cfg.axes;
  const std::size_t n = sample_count(duration_s, rate_hz);
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate_hz + phase0;
    Sample s;
    s.t_ms = timestamp_ms(i, rate_hz);
    s.ax = amp_g * std::sin(arg) + rng.normal(0.0, cfg.noise_sigma_g);
    s.ay = amp_g * std::sin(arg + kThird) + rng.normal(0.0, cfg.noise_sigma_g);
    s.az = cfg.gravity_g + amp_g * std::sin(arg + 2.0 * kThird) + rng.normal(0.0, cfg.noise_sigma_g);
    if (cfg.axes == 6) {
      s.gyro = std::array<double, 3>{cfg.gyro_amp_dps_per_g * amp_g * std::cos(arg),
                                     cfg.gyro_amp_dps_per_g * amp_g * std::cos(arg + kThird),
                                     cfg.gyro_amp_dps_per_g * amp_g * std::cos(arg + 2.0 * kThird)};
    }
    rec.samples.push_back(s);
  }
  return rec;
}

Dataset synthesize_dataset(const SynthDatasetConfig& cfg, std::uint64_t seed) {
  Dataset ds;
  for (ActivityLabel label : kAllLabels) {
    for (std::size_t i = 0; i < cfg.recordings_per_class; ++i) {
      const std::uint64_t salt = class_index(label) * 100000 + i;
      Recording rec =
          synthesize_recording(label, cfg.duration_s, cfg.rate_hz, mix_seed(seed, salt), cfg.signal);
      rec.id = fmt::format("{}_{:02}", kSlugs[class_index(label)], i);
      ds.recordings.push_back(std::move(rec));
    }
  }
  return ds;
}

std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Manifest m;
  if (!ds.recordings.empty()) {
    m.rate_hz = ds.recordings.front().rate_hz;
    m.axes = ds.recordings.front().axes;
  }
  for (const Recording& rec : ds.recordings) {
    const std::string file = rec.id + ".csv";
    save_recording(rec, dir / file);
    m.recordings.push_back({file, rec.label, rec.id});
  }
  const auto manifest_path = dir / "manifest.json";
  write_file(manifest_path, manifest_to_json(m));
  return manifest_path;
}

}  // namespace gait
