// themis: command-line front end for the anomaly-detection pipeline.
//
//   themis score     --series s.csv (--embeddings z.them | --reference-embedder) [...]
//   themis detect    ... --labels y.csv
//   themis sweep     ... --grid-k 2,5,10,15,20 --grid-batch 1,4,16
//   themis plot-data --from run_dir --series s.csv [--labels y.csv]
//   themis embed-ref --series s.csv --out z.them
//   themis synth     --out dir [--seed 0]
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "themis/error.hpp"
#include "themis/kernels.hpp"
#include "themis/pipeline.hpp"
#include "themis/report_io.hpp"
#include "themis/synthetic.hpp"

namespace fs = std::filesystem;
using themis::Error;
using themis::ErrorCode;
using themis::report::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Flags {
  std::string series;
  std::string labels;
  std::string embeddings;
  std::string calibration;
  bool reference_embedder = false;
  std::size_t channel = 0;
  std::string format = "csv";
  std::size_t ref_context = 32;
  std::size_t ref_dim = 64;
  std::uint64_t seed = 0;
  std::size_t window = 512;
  std::size_t stride = 0;
  std::string tail = "pad_repeat_last";
  std::size_t batch_windows = 16;
  std::string adapter = "spectral";
  std::size_t k = 15;
  std::size_t knn = 10;
  double alpha = 0.05;
  std::size_t topk = 0;
  std::string eigensolver = "full";
  std::string normalize_scope = "batch";
  double spot_q = 1e-3;
  double spot_init = 0.98;
  std::string out;
  std::size_t jobs = 1;
  bool dump_wasm = false;
  std::string config;

  std::vector<std::size_t> grid_k;
  std::vector<std::size_t> grid_knn;
  std::vector<std::size_t> grid_batch;
  std::vector<double> grid_alpha;
  std::vector<std::size_t> grid_topk;

  std::string from;
  themis::synth::LevelShiftSpec synth;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void add_input_options(CLI::App* app, Flags& f) {
  app->add_option("--series", f.series, "Series CSV (header row required)");
  app->add_option("--labels", f.labels, "Label CSV, one 0/1 per row");
  app->add_option("--channel", f.channel, "Column index of the series CSV")->capture_default_str();
  app->add_option("--format", f.format, "Series file format")
      ->check(CLI::IsMember({"csv", "nab"}))
      ->capture_default_str();
}

void add_plan_options(CLI::App* app, Flags& f) {
  app->add_option("--window", f.window, "Window length L")->capture_default_str();
  app->add_option("--stride", f.stride, "Window stride (default: L)");
  app->add_option("--tail", f.tail, "Final-window policy")
      ->check(CLI::IsMember({"pad_repeat_last", "pad", "truncate"}))
      ->capture_default_str();
  app->add_option("--ref-context", f.ref_context, "Reference embedder context length w")->capture_default_str();
  app->add_option("--ref-dim", f.ref_dim, "Reference embedder dimension d")->capture_default_str();
  app->add_option("--seed", f.seed, "Reference embedder projection seed")->capture_default_str();
}

void add_run_options(CLI::App* app, Flags& f) {
  add_input_options(app, f);
  add_plan_options(app, f);
  app->add_option("--embeddings", f.embeddings, "THEM embedding file");
  app->add_flag("--reference-embedder", f.reference_embedder, "Embed with the built-in reference embedder");
  app->add_option("--adapter", f.adapter, "Scoring adapter")
      ->check(CLI::IsMember({"spectral", "lof", "mean", "trimmed", "trimmed_topk"}))
      ->capture_default_str();
  app->add_option("--k", f.k, "Spectral: eigenvectors retained")->capture_default_str();
  app->add_option("--knn", f.knn, "LOF: neighbours")->capture_default_str();
  app->add_option("--alpha", f.alpha, "Trimmed: fraction dropped from each end")->capture_default_str();
  app->add_option("--topk", f.topk, "Trimmed: similarities averaged (default: ceil(0.1 (m-1)))");
  app->add_option("--eigensolver", f.eigensolver, "Spectral eigensolver")
      ->check(CLI::IsMember({"full", "iterative"}))
      ->capture_default_str();
  app->add_option("--batch-windows", f.batch_windows, "Windows per similarity batch B")->capture_default_str();
  app->add_option("--normalize-scope", f.normalize_scope, "Min-max normalisation scope")
      ->check(CLI::IsMember({"batch", "global"}))
      ->capture_default_str();
  app->add_option("--spot-q", f.spot_q, "SPOT risk level q")->capture_default_str();
  app->add_option("--spot-init", f.spot_init, "SPOT initial quantile level")->capture_default_str();
  app->add_option("--calibration-file", f.calibration, "Score CSV to fit SPOT on instead of the scored series");
  app->add_option("--out", f.out, "Output directory (default: $THEMIS_OUT_DIR or ./themis_out)");
  app->add_option("--jobs", f.jobs, "Worker threads")->capture_default_str();
  app->add_flag("--dump-wasm", f.dump_wasm, "Write each batch matrix as wasm_batch_<i>.them");
  app->add_option("--config", f.config, "key=value file or manifest.json; flags given on the command line win");
}

std::string json_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Settings from a flat key=value file or a run manifest.
std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open config '" + path.string() + "'");
  std::vector<std::pair<std::string, std::string>> items;
  const auto first = in.peek();
  if (first == '{') {
    auto j = themis::report::read_json(path);
    if (j.contains("config")) j = j["config"];
    for (const auto& [key, value] : j.items()) {
      if (value.is_array()) {
        std::string joined;
        for (const auto& e : value) joined += (joined.empty() ? "" : ",") + json_scalar(e);
        items.emplace_back(key, joined);
      } else if (!value.is_null()) {
        items.emplace_back(key, json_scalar(value));
      }
    }
    return items;
  }
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(row) + " is not key=value");
    }
    auto key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    items.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return items;
}

void apply_config_file(CLI::App* app, const std::string& config) {
  if (config.empty()) return;
  for (const auto& [key, value] : read_config_file(config)) {
    auto* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw Error(ErrorCode::InvalidParameter, "unknown config key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // the command line wins
    opt->add_result(value);
    opt->run_callback();
  }
}

fs::path output_dir(const Flags& f) {
  fs::path dir;
  if (!f.out.empty()) {
    dir = f.out;
  } else if (const char* env = std::getenv("THEMIS_OUT_DIR"); env != nullptr && *env != '\0') {
    dir = env;
  } else {
    dir = "themis_out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

themis::pipeline::RunConfig to_run_config(const Flags& f, const CLI::App* app) {
  namespace tp = themis::pipeline;
  if (f.series.empty()) throw Error(ErrorCode::InvalidParameter, "--series is required");
  tp::RunConfig c;
  c.series = f.series;
  if (!f.labels.empty()) c.labels = f.labels;
  if (!f.embeddings.empty()) c.embeddings = f.embeddings;
  if (!f.calibration.empty()) c.calibration = f.calibration;
  c.reference_embedder = f.reference_embedder;
  c.channel = f.channel;
  c.format = themis::io::parse_series_format(f.format);
  c.ref_context = f.ref_context;
  c.ref_dim = f.ref_dim;
  c.seed = f.seed;
  c.window = f.window;
  c.stride = f.stride;
  c.tail = themis::io::parse_tail_policy(f.tail);
  c.batch_windows = f.batch_windows;
  c.adapter.adapter = themis::adapt::parse_adapter(f.adapter);
  c.adapter.spectral.k = f.k;
  c.adapter.lof.neighbors = f.knn;
  c.adapter.trimmed.alpha = f.alpha;
  if (app->get_option("--topk")->count() > 0) c.adapter.trimmed.top_k = f.topk;
  c.adapter.solver = themis::adapt::parse_eigen_solver(f.eigensolver);
  c.normalize_scope = tp::parse_normalize_scope(f.normalize_scope);
  c.spot_q = f.spot_q;
  c.spot_init = f.spot_init;
  c.jobs = f.jobs;
  c.dump_wasm = f.dump_wasm;
  c.validate();
  return c;
}

json base_manifest(const std::string& command, const themis::pipeline::RunConfig& c) {
  json m;
  m["tool"] = "themis";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = themis::report::config_json(c);
  m["simd"] = std::string(themis::simd::to_string(themis::simd::active().isa));
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["eigensolver_backend"] = themis::adapt::dense_backend();
  return m;
}

void describe_input(json& m, const themis::pipeline::PreparedInput& in) {
  m["series_length"] = in.series.size();
  m["windows"] = in.plan.window_count();
  m["embedding_rows"] = in.embeddings.rows();
  m["embedding_dim"] = in.embeddings.dim();
  m["embedding_source"] = in.embeddings.source_tag();
}

void describe_batches(json& m, const themis::pipeline::ScoreResult& r) {
  json batches = json::array();
  for (std::size_t b = 0; b < r.batches.size(); ++b) {
    batches.push_back({{"index", b},
                       {"rows", r.batches[b].rows},
                       {"zero_rows", r.batches[b].zero_rows},
                       {"degenerate", r.batches[b].degenerate}});
  }
  m["batches"] = std::move(batches);
}

int run_score_or_detect(const std::string& command, const Flags& f, const CLI::App* app) {
  namespace tp = themis::pipeline;
  namespace rp = themis::report;
  const auto config = to_run_config(f, app);
  const auto dir = output_dir(f);
  auto manifest = base_manifest(command, config);
  json timings;
  std::vector<std::string> outputs;

  auto t0 = Clock::now();
  const auto input = tp::prepare(config);
  timings["prepare_ms"] = ms_since(t0);
  describe_input(manifest, input);
  const std::optional<fs::path> dump = config.dump_wasm ? std::optional<fs::path>(dir) : std::nullopt;

  t0 = Clock::now();
  if (command == "score") {
    const auto r = tp::score(input, config, dump);
    timings["score_ms"] = ms_since(t0);
    describe_batches(manifest, r);
    rp::write_scores_csv(r.scores.scores, dir / "scores.csv");
    rp::write_scores_them(r.scores.scores, "scores:" + themis::adapt::to_string(config.adapter.adapter),
                          dir / "scores.them");
    outputs = {"scores.csv", "scores.them"};
  } else {
    const auto r = tp::detect(input, config, dump);
    timings["detect_ms"] = ms_since(t0);
    describe_batches(manifest, r.scored);
    rp::write_scores_csv(r.scored.scores.scores, dir / "scores.csv");
    rp::write_scores_them(r.scored.scores.scores, "scores:" + themis::adapt::to_string(config.adapter.adapter),
                          dir / "scores.them");
    rp::write_predictions_csv(r.predictions, dir / "predictions.csv");
    rp::write_json(rp::threshold_json(r.threshold), dir / "threshold.json");
    outputs = {"scores.csv", "scores.them", "predictions.csv", "threshold.json"};
    if (r.report) {
      rp::write_json(rp::affiliation_json(*r.report, r.anomaly_ratio), dir / "report.json");
      outputs.push_back("report.json");
      if (r.report->empty_truth) {
        std::cerr << "themis: note: labels hold no anomaly; recall and F1 are undefined\n";
      } else {
        std::cout << "precision=" << rp::format_double(r.report->precision)
                  << " recall=" << rp::format_double(r.report->recall)
                  << " f1=" << rp::format_double(r.report->f1) << '\n';
      }
    }
    std::cout << "delta=" << rp::format_double(r.threshold.delta) << '\n';
  }
  if (config.dump_wasm) {
    for (std::size_t b = 0; b < manifest["batches"].size(); ++b) outputs.push_back("wasm_batch_" + std::to_string(b) + ".them");
  }
  manifest["timings"] = timings;
  manifest["outputs"] = outputs;
  rp::write_json(manifest, dir / "manifest.json");
  return 0;
}

int run_sweep(const Flags& f, const CLI::App* app) {
  namespace tp = themis::pipeline;
  namespace rp = themis::report;
  const auto config = to_run_config(f, app);
  tp::SweepGrid grid;
  grid.k = f.grid_k;
  grid.knn = f.grid_knn;
  grid.batch_windows = f.grid_batch;
  grid.alpha = f.grid_alpha;
  grid.topk = f.grid_topk;
  const auto dir = output_dir(f);

  auto manifest = base_manifest("sweep", config);
  manifest["grid"] = {{"batch-windows", grid.batch_windows},
                      {"k", grid.k},
                      {"knn", grid.knn},
                      {"alpha", grid.alpha},
                      {"topk", grid.topk}};
  auto t0 = Clock::now();
  const auto input = tp::prepare(config);
  describe_input(manifest, input);
  const auto points = tp::expand_grid(config, grid);
  const auto rows = tp::sweep(input, points, config.jobs);
  manifest["timings"] = {{"sweep_ms", ms_since(t0)}};
  rp::write_sweep_csv(rows, dir / "sweep.csv");
  manifest["outputs"] = {"sweep.csv"};
  rp::write_json(manifest, dir / "manifest.json");

  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  std::cout << rows.size() << " grid points, " << failed << " failed\n";
  return 0;
}

int run_plot_data(const Flags& f) {
  namespace rp = themis::report;
  const fs::path from = f.from.empty() ? output_dir(f) : fs::path(f.from);
  const auto dir = output_dir(f);
  const auto scores_path = from / "scores.csv";
  if (!fs::exists(scores_path)) {
    throw Error(ErrorCode::MissingArtifacts, "'" + scores_path.string() + "' not found; run score or detect first");
  }
  const auto scores = rp::read_scores_csv(scores_path);
  std::optional<double> delta;
  if (fs::exists(from / "threshold.json")) delta = rp::read_json(from / "threshold.json").at("delta").get<double>();

  if (!f.series.empty()) {
    const auto series =
        themis::io::load_series(f.series, f.channel, themis::io::parse_series_format(f.format));
    std::optional<themis::io::LabelSeries> labels;
    if (!f.labels.empty()) labels = themis::io::load_labels(f.labels);
    std::optional<themis::io::LabelSeries> preds;
    if (fs::exists(from / "predictions.csv")) {
      themis::io::LabelSeries p;
      for (double v : themis::io::load_series(from / "predictions.csv", 1).values) p.labels.push_back(v != 0.0);
      preds = std::move(p);
    }
    for (const auto* l : {labels ? &*labels : nullptr, preds ? &*preds : nullptr}) {
      if (l && l->size() != series.size()) {
        throw Error(ErrorCode::LengthMismatch, "labels or predictions do not match the series length");
      }
    }
    rp::write_series_with_labels(series, labels ? &*labels : nullptr, preds ? &*preds : nullptr,
                                 dir / "series_with_labels.csv");
  }
  rp::write_scores_with_threshold(scores, delta, dir / "scores_with_threshold.csv");

  const std::regex dump_name(R"(wasm_batch_(\d+)\.them)");
  for (const auto& entry : fs::directory_iterator(from)) {
    std::smatch match;
    const auto name = entry.path().filename().string();
    if (std::regex_match(name, match, dump_name)) {
      rp::write_wasm_csv(entry.path(), dir / ("wasm_batch_" + match[1].str() + ".csv"));
    }
  }
  return 0;
}

int run_embed_ref(const Flags& f) {
  if (f.series.empty()) throw Error(ErrorCode::InvalidParameter, "--series is required");
  const auto series = themis::io::load_series(f.series, f.channel, themis::io::parse_series_format(f.format));
  const auto plan = themis::io::plan_windows(series.size(), f.window, f.stride == 0 ? f.window : f.stride,
                                             themis::io::parse_tail_policy(f.tail));
  const auto seq = themis::embed::reference_embed(series, plan, f.ref_context, f.ref_dim, f.seed);
  fs::path target;
  if (!f.out.empty() && fs::path(f.out).extension() == ".them") {
    target = f.out;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
  } else {
    target = output_dir(f) / "embeddings.them";
  }
  themis::embed::write_embeddings(seq, target);
  std::cout << target.string() << ": n=" << seq.rows() << " d=" << seq.dim() << '\n';
  return 0;
}

int run_synth(const Flags& f) {
  const auto data = themis::synth::level_shift_series(f.synth);
  const auto dir = output_dir(f);
  themis::io::write_series_csv(data.series, dir / "series.csv");
  themis::io::write_labels_csv(data.labels, dir / "labels.csv");
  for (const auto& e : data.segments.events) std::cout << "segment [" << e.start << ", " << e.end << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"THEMIS anomaly detection on windowed embedding similarity"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;

  auto* score = app.add_subcommand("score", "Score every timestep");
  add_run_options(score, f);
  auto* detect = app.add_subcommand("detect", "Score, threshold with SPOT and evaluate");
  add_run_options(detect, f);
  auto* sweep = app.add_subcommand("sweep", "Run detect over a parameter grid");
  add_run_options(sweep, f);
  sweep->add_option("--grid-k", f.grid_k, "Spectral k values")->delimiter(',');
  sweep->add_option("--grid-knn", f.grid_knn, "LOF k_nn values")->delimiter(',');
  sweep->add_option("--grid-batch", f.grid_batch, "Batch sizes B")->delimiter(',');
  sweep->add_option("--grid-alpha", f.grid_alpha, "Trim fractions")->delimiter(',');
  sweep->add_option("--grid-topk", f.grid_topk, "Trimmed top_k values")->delimiter(',');
  auto* plot = app.add_subcommand("plot-data", "Emit CSV bundles for figures");
  add_input_options(plot, f);
  plot->add_option("--from", f.from, "Run directory holding scores.csv (default: output directory)");
  plot->add_option("--out", f.out, "Output directory (default: $THEMIS_OUT_DIR or ./themis_out)");
  auto* embed = app.add_subcommand("embed-ref", "Write reference embeddings as a THEM file");
  add_input_options(embed, f);
  add_plan_options(embed, f);
  embed->add_option("--out", f.out, "Target .them file or output directory");
  auto* synth = app.add_subcommand("synth", "Write a seeded level-shift series and its labels");
  synth->add_option("--out", f.out, "Output directory (default: $THEMIS_OUT_DIR or ./themis_out)");
  synth->add_option("--seed", f.synth.seed, "Generator seed")->capture_default_str();
  synth->add_option("--length", f.synth.length, "Series length")->capture_default_str();
  synth->add_option("--segments", f.synth.segments, "Number of shifted segments")->capture_default_str();
  synth->add_option("--shift-sigmas", f.synth.shift_sigmas, "Shift size in noise standard deviations")
      ->capture_default_str();
  synth->add_option("--sine-amplitude", f.synth.sine_amplitude, "Base sine amplitude")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto* sub : {score, detect, sweep}) {
      if (sub->parsed()) apply_config_file(sub, f.config);
    }
    if (score->parsed()) return run_score_or_detect("score", f, score);
    if (detect->parsed()) return run_score_or_detect("detect", f, detect);
    if (sweep->parsed()) return run_sweep(f, sweep);
    if (plot->parsed()) return run_plot_data(f);
    if (embed->parsed()) return run_embed_ref(f);
    if (synth->parsed()) return run_synth(f);
  } catch (const Error& e) {
    std::cerr << "themis: " << themis::module_of(e.code()) << ": " << e.what() << '\n';
    return e.category() == themis::ErrorCategory::Numerical ? 2 : 1;
  } catch (const CLI::Error& e) {
    std::cerr << "themis: config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "themis: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
