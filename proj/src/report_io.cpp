#include "themis/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "themis/embedding_store.hpp"
#include "themis/error.hpp"

namespace themis::report {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_scores_csv(std::span<const double> scores, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "timestep,score\n";
  for (std::size_t t = 0; t < scores.size(); ++t) out << t << ',' << format_double(scores[t]) << '\n';
  finish(out, path);
}

std::vector<double> read_scores_csv(const std::filesystem::path& path) {
  // Either `timestep,score` or a single `score` column.
  const auto series = io::load_series(path, 0, io::SeriesFormat::Csv);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  if (header.find(',') == std::string::npos) return series.values;
  return io::load_series(path, 1, io::SeriesFormat::Csv).values;
}

void write_scores_them(std::span<const double> scores, const std::string& tag, const std::filesystem::path& path) {
  std::vector<float> values(scores.begin(), scores.end());
  embed::write_embeddings({scores.size(), 1, std::move(values), tag}, path);
}

void write_predictions_csv(const io::LabelSeries& predictions, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "timestep,prediction\n";
  for (std::size_t t = 0; t < predictions.size(); ++t) out << t << ',' << static_cast<int>(predictions.labels[t]) << '\n';
  finish(out, path);
}

json threshold_json(const thresh::ThresholdDecision& d) {
  json j;
  j["delta"] = d.delta;
  j["q"] = d.q;
  j["init_level"] = d.init_level;
  j["gamma"] = d.fit.gamma;
  j["sigma"] = d.fit.sigma;
  j["n"] = d.n;
  j["peak_count"] = d.fit.peak_count;
  j["t0"] = d.fit.t0;
  j["method"] = thresh::to_string(d.method);
  j["exponential_fit"] = d.fit.exponential;
  j["no_peaks"] = d.no_peaks;
  j["few_peaks"] = d.few_peaks;
  j["clamped"] = d.clamped;
  return j;
}

json affiliation_json(const eval::AffiliationReport& r, std::optional<double> anomaly_ratio) {
  json j;
  if (r.empty_truth) {
    j["precision"] = nullptr;
    j["recall"] = nullptr;
    j["f1"] = nullptr;
  } else {
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
  }
  j["anomaly_ratio"] = optional_number(anomaly_ratio);
  j["empty_truth"] = r.empty_truth;
  j["no_predictions"] = r.no_predictions;
  json zones = json::array();
  for (const auto& z : r.per_zone) {
    zones.push_back({{"zone", {z.zone.start, z.zone.end}},
                     {"event", {z.truth.start, z.truth.end}},
                     {"precision", optional_number(z.precision)},
                     {"recall", z.recall},
                     {"precision_distance", optional_number(z.precision_distance)},
                     {"recall_distance", optional_number(z.recall_distance)}});
  }
  j["per_zone"] = std::move(zones);
  return j;
}

json config_json(const pipeline::RunConfig& c) {
  json j;
  j["series"] = c.series.string();
  if (c.labels) j["labels"] = c.labels->string();
  if (c.embeddings) j["embeddings"] = c.embeddings->string();
  if (c.calibration) j["calibration-file"] = c.calibration->string();
  j["reference-embedder"] = c.reference_embedder;
  j["channel"] = c.channel;
  j["format"] = c.format == io::SeriesFormat::Csv ? "csv" : "nab";
  j["ref-context"] = c.ref_context;
  j["ref-dim"] = c.ref_dim;
  j["seed"] = c.seed;
  j["window"] = c.window;
  j["stride"] = c.effective_stride();
  j["tail"] = io::to_string(c.tail);
  j["batch-windows"] = c.batch_windows;
  j["adapter"] = adapt::to_string(c.adapter.adapter);
  j["k"] = c.adapter.spectral.k;
  j["knn"] = c.adapter.lof.neighbors;
  j["alpha"] = c.adapter.trimmed.alpha;
  if (c.adapter.trimmed.top_k) j["topk"] = *c.adapter.trimmed.top_k;
  j["eigensolver"] = adapt::to_string(c.adapter.solver);
  j["normalize-scope"] = pipeline::to_string(c.normalize_scope);
  j["spot-q"] = c.spot_q;
  j["spot-init"] = c.spot_init;
  j["dump-wasm"] = c.dump_wasm;
  return j;
}

void write_json(const json& value, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  finish(out, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path.string() + "': " + e.what());
  }
}

void write_sweep_csv(const std::vector<pipeline::SweepRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "adapter,batch_windows,k,knn,alpha,topk,precision,recall,f1,delta,predicted_points,error\n";
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    const auto& a = r.config.adapter;
    std::string err = r.error;
    for (auto& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    out << adapt::to_string(a.adapter) << ',' << r.config.batch_windows << ',' << a.spectral.k << ','
        << a.lof.neighbors << ',' << format_double(a.trimmed.alpha) << ','
        << (a.trimmed.top_k ? std::to_string(*a.trimmed.top_k) : std::string("auto")) << ',' << opt(r.precision)
        << ',' << opt(r.recall) << ',' << opt(r.f1) << ',' << opt(r.delta) << ',' << r.predicted_points << ','
        << err << '\n';
  }
  finish(out, path);
}

void write_series_with_labels(const io::TimeSeries& series, const io::LabelSeries* labels,
                              const io::LabelSeries* predictions, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "timestep,value";
  if (labels) out << ",label";
  if (predictions) out << ",prediction";
  out << '\n';
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << t << ',' << format_double(series.values[t]);
    if (labels) out << ',' << static_cast<int>(labels->labels.at(t));
    if (predictions) out << ',' << static_cast<int>(predictions->labels.at(t));
    out << '\n';
  }
  finish(out, path);
}

void write_scores_with_threshold(std::span<const double> scores, std::optional<double> delta,
                                 const std::filesystem::path& path) {
  auto out = open_out(path);
  out << (delta ? "timestep,score,threshold,flag\n" : "timestep,score\n");
  const std::string d = delta ? format_double(*delta) : std::string();
  for (std::size_t t = 0; t < scores.size(); ++t) {
    out << t << ',' << format_double(scores[t]);
    if (delta) out << ',' << d << ',' << (scores[t] > *delta ? 1 : 0);
    out << '\n';
  }
  finish(out, path);
}

void write_wasm_csv(const std::filesystem::path& them_dump, const std::filesystem::path& path) {
  const auto dump = embed::read_embeddings(them_dump);
  const auto cells = dump.rows() * dump.dim();
  std::size_t m = 0;
  while ((m + 1) * (m + 1) <= cells) ++m;
  if (m * m != cells) throw Error(ErrorCode::InvalidParameter, "'" + them_dump.string() + "' is not a square matrix");
  auto out = open_out(path);
  out << "i,j,value\n";
  const auto v = dump.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out << i << ',' << j << ',' << format_double(v[i * m + j]) << '\n';
  }
  finish(out, path);
}

}  // namespace themis::report
