#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "themis/dataset_io.hpp"
#include "themis/evaluation.hpp"
#include "themis/pipeline.hpp"
#include "themis/thresholding.hpp"

namespace themis::report {

using nlohmann::json;

/// `timestep,score` with round-trip precision.
void write_scores_csv(std::span<const double> scores, const std::filesystem::path& path);
std::vector<double> read_scores_csv(const std::filesystem::path& path);

/// Scores as a THEM file with d = 1.
void write_scores_them(std::span<const double> scores, const std::string& tag, const std::filesystem::path& path);

/// `timestep,prediction`.
void write_predictions_csv(const io::LabelSeries& predictions, const std::filesystem::path& path);

json threshold_json(const thresh::ThresholdDecision& decision);
/// Recall and F1 are null when the truth holds no event.
json affiliation_json(const eval::AffiliationReport& report, std::optional<double> anomaly_ratio);

/// Flag-named echo of every setting; feeding it back through --config
/// reproduces the run.
json config_json(const pipeline::RunConfig& config);

void write_json(const json& value, const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

void write_sweep_csv(const std::vector<pipeline::SweepRow>& rows, const std::filesystem::path& path);

/// timestep,value,label,prediction (label / prediction columns only when given).
void write_series_with_labels(const io::TimeSeries& series, const io::LabelSeries* labels,
                              const io::LabelSeries* predictions, const std::filesystem::path& path);
/// timestep,score,threshold,flag (threshold / flag only when delta is given).
void write_scores_with_threshold(std::span<const double> scores, std::optional<double> delta,
                                 const std::filesystem::path& path);
/// Coordinate form `i,j,value` of an m x m matrix dump.
void write_wasm_csv(const std::filesystem::path& them_dump, const std::filesystem::path& path);

/// printf("%.17g").
std::string format_double(double value);

}  // namespace themis::report
