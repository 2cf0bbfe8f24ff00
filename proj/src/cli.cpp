#include "gaitml/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gaitml/error.hpp"
#include "gaitml/pipeline.hpp"

namespace gait {

namespace {

namespace fs = std::filesystem;

struct CliConfig {
  std::string manifest;
  std::string out;
  std::string bundle;
  std::string csv = "-";
  std::string history;
  std::string report;
  std::string features_out;
  std::string subset = "all";
  std::uint64_t seed = 42;
  std::int64_t window_ms = 2000;
  std::int64_t stride_ms = 80;
  double rate_hz = 100.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.001;
  std::size_t k_clusters = 8;
  bool quantize = false;
  double train_fraction = 0.8;
  std::size_t recordings_per_class = 10;
  double duration_s = 10.0;
  int axes = 3;
  int verbosity = 0;
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

Dataset select_subset(const Dataset& ds, const CliConfig& c) {
  if (c.subset == "all") return ds;
  auto [train, test] = split_by_recording(ds, c.train_fraction, c.seed);
  return c.subset == "train" ? train : test;
}

int cmd_synth(const CliConfig& c, std::ostream& out) {
  SynthDatasetConfig sc;
  sc.recordings_per_class = c.recordings_per_class;
  sc.duration_s = c.duration_s;
  sc.rate_hz = c.rate_hz;
  sc.signal.axes = c.axes;
  const Dataset ds = synthesize_dataset(sc, c.seed);
  const fs::path manifest = write_dataset(ds, c.out);
  if (c.verbosity >= 0) {
    fmt::print(out, "wrote {} recordings and {}\n", ds.recordings.size(), manifest.string());
  }
  return kExitOk;
}

int cmd_train(const CliConfig& c, std::ostream& out) {
  const Dataset ds = load_dataset(c.manifest);
  const auto [train_ds, test_ds] = split_by_recording(ds, c.train_fraction, c.seed);

  PipelineConfig pc;
  pc.window = {c.window_ms, c.stride_ms};
  pc.train.epochs = c.epochs;
  pc.train.batch_size = c.batch_size;
  pc.train.learning_rate = c.lr;
  pc.k_clusters = c.k_clusters;
  pc.quantize = c.quantize;
  pc.seed = c.seed;
  const PipelineResult result = train_pipeline(train_ds, test_ds, pc);

  save_bundle(result.bundle, c.out);
  const std::string history_path = c.history.empty() ? c.out + ".history.csv" : c.history;
  {
    std::ofstream h(history_path, std::ios::binary);
    if (!h) throw Error(ErrorCode::Io, "cannot write " + history_path);
    write_history_csv(h, result.history);
  }
  const std::string report_path = c.report.empty() ? c.out + ".eval.json" : c.report;
  write_text(report_path, report_to_json(result.test_report), out);

  if (!c.features_out.empty()) {
    std::ofstream f(c.features_out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + c.features_out);
    const auto rows = featurize(ds, pc.window, pc.features);
    write_feature_csv(f, rows);
  }

  if (c.verbosity >= 0) {
    const auto& last = result.history.epochs.back();
    fmt::print(out, "train: {} recordings, test: {} recordings\n", train_ds.recordings.size(),
               test_ds.recordings.size());
    fmt::print(out, "epoch {}: train loss {:.4f} acc {:.2f}%, val loss {:.4f} acc {:.2f}%\n",
               last.epoch, last.train_loss, 100.0 * last.train_accuracy, last.val_loss,
               100.0 * last.val_accuracy);
    out << format_report(result.test_report);
    fmt::print(out, "bundle: {} ({})\n", c.out, result.bundle.quantized() ? "int8" : "float");
  }
  return kExitOk;
}

int cmd_eval(const CliConfig& c, std::ostream& out) {
  const ModelBundle bundle = load_bundle(c.bundle);
  const Dataset ds = select_subset(load_dataset(c.manifest), c);
  const EvalReport report = evaluate_bundle(bundle, ds);
  write_text(c.out, report_to_json(report), out);
  if (c.verbosity > 0) out << format_report(report);
  return kExitOk;
}

int cmd_export(const CliConfig& c, std::ostream& out) {
  ModelBundle bundle = load_bundle(c.bundle);
  if (c.quantize && !bundle.quantized()) {
    bundle.classifier = quantize(std::get<MlpModel>(bundle.classifier));
  }
  write_text(c.out, export_c_header(bundle), out);
  return kExitOk;
}

int cmd_stream(const CliConfig& c, std::istream& in, std::ostream& out) {
  StreamEngine engine(load_bundle(c.bundle));
  std::ifstream file;
  std::istream* src = &in;
  if (c.csv != "-") {
    file.open(c.csv, std::ios::binary);
    if (!file) throw Error(ErrorCode::Io, "cannot open " + c.csv);
    src = &file;
  }
  std::string line;
  std::optional<SampleCsvParser> parser;
  std::size_t line_no = 0;
  std::size_t events = 0;
  while (std::getline(*src, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parser) {
      parser.emplace(line);
      if (parser->axes() != engine.bundle().axes) {
        throw Error(ErrorCode::InconsistentBundle,
                    fmt::format("input has {} axes, bundle expects {}", parser->axes(),
                                engine.bundle().axes));
      }
      continue;
    }
    if (auto ev = engine.push(parser->parse_row(line, line_no))) {
      out << format_event(*ev, engine.bundle().labels);
      out.flush();
      ++events;
    }
  }
  if (!parser) throw Error(ErrorCode::EmptyFile, "no CSV header on input");
  if (c.verbosity > 0) fmt::print(out, "{} events from {} samples\n", events, engine.samples_seen());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CliConfig c;
  CLI::App app{"Gait recognition pipeline: synthesize, train, evaluate, export and stream"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_flag("-v,--verbose", c.verbosity, "More output")->multi_option_policy(CLI::MultiOptionPolicy::Sum);
  app.add_flag_callback("-q,--quiet", [&c] { c.verbosity = -1; }, "Suppress summaries");

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  };
  auto add_split = [&](CLI::App* sub) {
    sub->add_option("--train-fraction", c.train_fraction, "Per-class share of recordings used for training")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and manifest");
  synth->add_option("--out", c.out, "Output directory")->required();
  add_seed(synth);
  synth->add_option("--rate-hz", c.rate_hz, "Sampling rate")->capture_default_str();
  synth->add_option("--recordings-per-class", c.recordings_per_class)->capture_default_str();
  synth->add_option("--duration-s", c.duration_s)->capture_default_str();
  synth->add_option("--axes", c.axes)->check(CLI::IsMember({3, 6}))->capture_default_str();

  auto* train = app.add_subcommand("train", "Train a model bundle from a manifest");
  train->add_option("--manifest", c.manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", c.out, "Bundle output path")->required();
  train->add_option("--history", c.history, "History CSV (default <out>.history.csv)");
  train->add_option("--report", c.report, "Test-split report JSON (default <out>.eval.json)");
  train->add_option("--features-out", c.features_out, "Optional dump of raw features");
  add_seed(train);
  add_split(train);
  train->add_option("--window-ms", c.window_ms)->capture_default_str();
  train->add_option("--stride-ms", c.stride_ms)->capture_default_str();
  train->add_option("--epochs", c.epochs)->capture_default_str();
  train->add_option("--batch-size", c.batch_size)->capture_default_str();
  train->add_option("--lr", c.lr)->capture_default_str();
  train->add_option("--k-clusters", c.k_clusters)->capture_default_str();
  train->add_flag("--quantize", c.quantize, "Store an int8 classifier");

  auto* eval = app.add_subcommand("eval", "Evaluate a bundle on a manifest");
  eval->add_option("--bundle", c.bundle)->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", c.manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", c.out, "Report JSON path (default stdout)");
  eval->add_option("--subset", c.subset, "Recordings to evaluate")
      ->check(CLI::IsMember({"all", "train", "test"}))
      ->capture_default_str();
  add_seed(eval);
  add_split(eval);

  auto* exp = app.add_subcommand("export", "Write a C header for firmware");
  exp->add_option("--bundle", c.bundle)->required()->check(CLI::ExistingFile);
  exp->add_option("--out", c.out, "Header path (default stdout)");
  exp->add_flag("--quantize", c.quantize, "Quantize a float bundle before export");

  auto* stream = app.add_subcommand("stream", "Replay CSV samples through the streaming engine");
  stream->add_option("--bundle", c.bundle)->required()->check(CLI::ExistingFile);
  stream->add_option("--csv", c.csv, "Recording CSV, '-' for stdin")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(c, out);
    if (*train) return cmd_train(c, out);
    if (*eval) return cmd_eval(c, out);
    if (*exp) return cmd_export(c, out);
    if (*stream) return cmd_stream(c, in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace gait
