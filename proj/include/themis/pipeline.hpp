#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "themis/adapters.hpp"
#include "themis/dataset_io.hpp"
#include "themis/embedding_store.hpp"
#include "themis/evaluation.hpp"
#include "themis/similarity.hpp"
#include "themis/thresholding.hpp"

namespace themis::pipeline {

enum class NormalizeScope { Batch, Global };

std::string to_string(NormalizeScope scope);
NormalizeScope parse_normalize_scope(const std::string& text);

struct RunConfig {
  std::filesystem::path series;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> embeddings;
  /// Score CSV used to fit SPOT instead of the scored series itself.
  std::optional<std::filesystem::path> calibration;
  bool reference_embedder = false;
  std::size_t channel = 0;
  io::SeriesFormat format = io::SeriesFormat::Csv;

  std::size_t ref_context = 32;
  std::size_t ref_dim = 64;
  std::uint64_t seed = 0;

  std::size_t window = 512;
  std::size_t stride = 0;  // 0 means stride = window
  io::TailPolicy tail = io::TailPolicy::PadRepeatLast;
  std::size_t batch_windows = 16;

  adapt::AdapterConfig adapter;
  NormalizeScope normalize_scope = NormalizeScope::Batch;

  double spot_q = 1e-3;
  double spot_init = 0.98;

  std::filesystem::path out;
  std::size_t jobs = 1;
  bool dump_wasm = false;

  std::size_t effective_stride() const noexcept { return stride == 0 ? window : stride; }
  /// Throws InvalidParameter for inconsistent settings.
  void validate() const;
};

/// Inputs shared by every grid point of a run: series, labels, plan, embeddings.
struct PreparedInput {
  io::TimeSeries series;
  std::optional<io::LabelSeries> labels;
  io::WindowPlan plan;
  embed::EmbeddingSequence embeddings;
};

PreparedInput prepare(const RunConfig& config);

struct BatchOutcome {
  std::size_t rows = 0;
  std::size_t zero_rows = 0;
  bool degenerate = false;
};

struct ScoreResult {
  adapt::ScoreSeries scores;
  sim::BatchPartition partition;
  std::vector<BatchOutcome> batches;
};

/// WASM -> adapter -> normalisation -> assembly. Batches run on up to
/// config.jobs threads; the result does not depend on the schedule. When
/// `dump_dir` is set, each batch matrix is written there as wasm_batch_<i>.them.
ScoreResult score(const PreparedInput& input, const RunConfig& config,
                  const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

struct DetectResult {
  ScoreResult scored;
  thresh::ThresholdDecision threshold;
  io::LabelSeries predictions;
  std::optional<eval::AffiliationReport> report;
  std::optional<double> anomaly_ratio;
};

DetectResult detect(const PreparedInput& input, const RunConfig& config,
                    const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

/// Axes left empty keep the base configuration's value.
struct SweepGrid {
  std::vector<std::size_t> batch_windows;
  std::vector<std::size_t> k;
  std::vector<std::size_t> knn;
  std::vector<double> alpha;
  std::vector<std::size_t> topk;

  bool empty() const noexcept {
    return batch_windows.empty() && k.empty() && knn.empty() && alpha.empty() && topk.empty();
  }
};

/// Cartesian product in grid order: B outermost, then k, k_nn, alpha, top_k.
std::vector<RunConfig> expand_grid(const RunConfig& base, const SweepGrid& grid);

struct SweepRow {
  RunConfig config;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> delta;
  std::size_t predicted_points = 0;
  std::string error;  // empty on success
};

/// Runs every grid point (up to `jobs` concurrently). Per-point failures are
/// recorded in the row; rows come back in grid order.
std::vector<SweepRow> sweep(const PreparedInput& input, const std::vector<RunConfig>& points, std::size_t jobs);

}  // namespace themis::pipeline
