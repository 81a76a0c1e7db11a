#include "themis/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "themis/error.hpp"
#include "themis/report_io.hpp"

namespace themis::pipeline {

namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads. The first exception
// (lowest index) is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::exception_ptr first_error;
  std::size_t first_index = n;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::string to_string(NormalizeScope scope) { return scope == NormalizeScope::Batch ? "batch" : "global"; }

NormalizeScope parse_normalize_scope(const std::string& text) {
  if (text == "batch") return NormalizeScope::Batch;
  if (text == "global") return NormalizeScope::Global;
  throw Error(ErrorCode::InvalidParameter, "unknown normalize scope '" + text + "'");
}

void RunConfig::validate() const {
  if (window == 0) throw Error(ErrorCode::InvalidParameter, "window length must be >= 1");
  if (batch_windows == 0) throw Error(ErrorCode::InvalidParameter, "batch size must be >= 1");
  if (embeddings && reference_embedder) {
    throw Error(ErrorCode::InvalidParameter, "give either an embedding file or the reference embedder, not both");
  }
  if (!embeddings && !reference_embedder) {
    throw Error(ErrorCode::InvalidParameter, "no embedding source: pass --embeddings or --reference-embedder");
  }
  if (reference_embedder && (ref_context == 0 || ref_dim == 0)) {
    throw Error(ErrorCode::InvalidParameter, "reference embedder context and dim must be >= 1");
  }
  if (!(spot_q > 0.0 && spot_q < 1.0)) throw Error(ErrorCode::InvalidParameter, "--spot-q must lie in (0, 1)");
  if (!(spot_init > 0.0 && spot_init < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "--spot-init must lie in (0, 1)");
  }
  if (jobs == 0) throw Error(ErrorCode::InvalidParameter, "--jobs must be >= 1");
}

PreparedInput prepare(const RunConfig& config) {
  config.validate();
  PreparedInput in;
  in.series = io::load_series(config.series, config.channel, config.format);
  if (config.labels) {
    in.labels = io::load_labels(*config.labels);
    if (in.labels->size() != in.series.size()) {
      throw Error(ErrorCode::LengthMismatch, std::to_string(in.labels->size()) + " labels for " +
                                                 std::to_string(in.series.size()) + " observations");
    }
  }
  in.plan = io::plan_windows(in.series.size(), config.window, config.effective_stride(), config.tail);
  if (config.embeddings) {
    in.embeddings = embed::read_embeddings(*config.embeddings);
    if (in.embeddings.rows() != in.plan.total_rows()) {
      throw Error(ErrorCode::PartitionMismatch, "embedding file holds " + std::to_string(in.embeddings.rows()) +
                                                    " rows but the window plan needs " +
                                                    std::to_string(in.plan.total_rows()));
    }
  } else {
    in.embeddings = embed::reference_embed(in.series, in.plan, config.ref_context, config.ref_dim, config.seed);
  }
  return in;
}

ScoreResult score(const PreparedInput& input, const RunConfig& config,
                  const std::optional<std::filesystem::path>& dump_dir) {
  ScoreResult out;
  out.partition = sim::partition_batches(input.plan, config.batch_windows);
  const auto nb = out.partition.batches.size();
  std::vector<std::vector<double>> scores(nb);
  out.batches.resize(nb);

  parallel_for(nb, config.jobs, [&](std::size_t b) {
    const auto s = sim::build_batch_wasm(input.embeddings, input.plan, out.partition, b);
    if (dump_dir) sim::dump_wasm(s, *dump_dir / ("wasm_batch_" + std::to_string(b) + ".them"));
    const auto raw = adapt::score_batch(s, config.adapter);
    out.batches[b] = {s.size(), s.zero_row_count(), raw.degenerate};
    scores[b] = config.normalize_scope == NormalizeScope::Batch ? adapt::normalize_batch(raw.scores, s.row_to_timestep)
                                                                : raw.scores;
  });

  out.scores = adapt::assemble_series_scores(scores, out.partition, input.plan, config.adapter);
  if (config.normalize_scope == NormalizeScope::Global) out.scores.scores = adapt::normalize_scores(out.scores.scores);
  return out;
}

DetectResult detect(const PreparedInput& input, const RunConfig& config,
                    const std::optional<std::filesystem::path>& dump_dir) {
  DetectResult out;
  out.scored = score(input, config, dump_dir);
  const auto& s = out.scored.scores.scores;
  if (config.calibration) {
    const auto calib = report::read_scores_csv(*config.calibration);
    out.threshold = thresh::spot_threshold(calib, config.spot_q, config.spot_init);
  } else {
    out.threshold = thresh::spot_threshold(s, config.spot_q, config.spot_init);
  }
  out.predictions = thresh::apply_threshold(s, out.threshold.delta);
  if (input.labels) {
    out.report = eval::affiliation_metrics(eval::to_events(out.predictions), eval::to_events(*input.labels),
                                           input.series.size());
    out.anomaly_ratio = eval::summarize(*input.labels);
  }
  return out;
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const SweepGrid& grid) {
  const auto or_base = [](const auto& axis, auto value) {
    using T = decltype(value);
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto bs = or_base(grid.batch_windows, base.batch_windows);
  const auto ks = or_base(grid.k, base.adapter.spectral.k);
  const auto knns = or_base(grid.knn, base.adapter.lof.neighbors);
  const auto alphas = or_base(grid.alpha, base.adapter.trimmed.alpha);
  std::vector<std::optional<std::size_t>> topks;
  if (grid.topk.empty()) {
    topks.push_back(base.adapter.trimmed.top_k);
  } else {
    for (auto t : grid.topk) topks.emplace_back(t);
  }

  std::vector<RunConfig> points;
  for (auto b : bs) {
    for (auto k : ks) {
      for (auto knn : knns) {
        for (auto alpha : alphas) {
          for (const auto& topk : topks) {
            RunConfig c = base;
            c.batch_windows = b;
            c.adapter.spectral.k = k;
            c.adapter.lof.neighbors = knn;
            c.adapter.trimmed.alpha = alpha;
            c.adapter.trimmed.top_k = topk;
            points.push_back(std::move(c));
          }
        }
      }
    }
  }
  return points;
}

std::vector<SweepRow> sweep(const PreparedInput& input, const std::vector<RunConfig>& points, std::size_t jobs) {
  if (points.empty()) throw Error(ErrorCode::InvalidParameter, "sweep grid is empty");
  std::vector<SweepRow> rows(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    auto& row = rows[i];
    row.config = points[i];
    row.config.jobs = 1;
    try {
      const auto r = detect(input, row.config);
      row.delta = r.threshold.delta;
      for (auto p : r.predictions.labels) row.predicted_points += p;
      if (r.report && !r.report->empty_truth) {
        row.precision = r.report->precision;
        row.recall = r.report->recall;
        row.f1 = r.report->f1;
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace themis::pipeline
