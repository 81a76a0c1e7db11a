#include "themis/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string_view>

#include "themis/error.hpp"

namespace themis::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(begin)));
      break;
    }
    fields.push_back(trim(line.substr(begin, comma - begin)));
    begin = comma + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

WindowPlan::WindowPlan(std::size_t series_length, std::size_t window_length, std::size_t stride,
                       TailPolicy policy, std::vector<std::size_t> starts)
    : series_length_(series_length),
      window_length_(window_length),
      stride_(stride),
      policy_(policy),
      starts_(std::move(starts)) {}

std::size_t WindowPlan::valid_length(std::size_t i) const {
  const auto start = starts_.at(i);
  return std::min(window_length_, series_length_ - start);
}

std::size_t WindowPlan::rows_in_window(std::size_t i) const {
  return policy_ == TailPolicy::PadRepeatLast ? window_length_ : valid_length(i);
}

std::size_t WindowPlan::first_row(std::size_t i) const {
  if (i > starts_.size()) throw Error(ErrorCode::InvalidParameter, "window index out of range");
  if (policy_ == TailPolicy::PadRepeatLast) return i * window_length_;
  std::size_t row = 0;
  for (std::size_t w = 0; w < i; ++w) row += rows_in_window(w);
  return row;
}

std::size_t WindowPlan::total_rows() const { return first_row(starts_.size()); }

std::vector<RowRef> WindowPlan::row_refs(std::size_t first, std::size_t count) const {
  if (first + count > starts_.size()) {
    throw Error(ErrorCode::InvalidParameter, "window range out of plan bounds");
  }
  std::vector<RowRef> refs;
  for (std::size_t w = first; w < first + count; ++w) {
    const auto rows = rows_in_window(w);
    for (std::size_t offset = 0; offset < rows; ++offset) {
      const auto t = starts_[w] + offset;
      refs.push_back({t, t >= series_length_});
    }
  }
  return refs;
}

WindowPlan plan_windows(std::size_t series_length, std::size_t window_length, std::size_t stride,
                        TailPolicy policy) {
  if (series_length == 0 || window_length == 0 || stride == 0) {
    throw Error(ErrorCode::InvalidParameter, "series length, window length and stride must be >= 1");
  }
  if (stride > window_length) {
    throw Error(ErrorCode::InvalidParameter, "stride larger than the window leaves timesteps uncovered");
  }
  std::vector<std::size_t> starts{0};
  while (starts.back() + window_length < series_length) {
    starts.push_back(starts.back() + stride);
  }
  return {series_length, window_length, stride, policy, std::move(starts)};
}

double value_at(const TimeSeries& series, std::ptrdiff_t index) {
  const auto n = static_cast<std::ptrdiff_t>(series.values.size());
  return series.values[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(index, 0, n - 1))];
}

TimeSeries load_series(const std::filesystem::path& path, std::size_t channel, SeriesFormat format) {
  auto in = open_or_throw(path);
  std::string line;
  std::optional<std::vector<std::string_view>> header;
  std::string header_line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    header_line = line;
    header = split_fields(header_line);
    break;
  }
  if (!header) throw Error(ErrorCode::BadHeader, "'" + path.string() + "' is empty");
  if (std::all_of(header->begin(), header->end(),
                  [](std::string_view f) { return parse_double(f).has_value(); })) {
    throw Error(ErrorCode::BadHeader, "'" + path.string() + "' has no header row");
  }

  std::size_t column = channel;
  if (format == SeriesFormat::NabCsv) {
    if (header->size() < 2) throw Error(ErrorCode::BadHeader, "NAB file needs timestamp,value columns");
    const auto it = std::find(header->begin(), header->end(), std::string_view("value"));
    column = it == header->end() ? 1 : static_cast<std::size_t>(it - header->begin());
  } else if (channel >= header->size()) {
    throw Error(ErrorCode::ChannelOutOfRange, "channel " + std::to_string(channel) + " but file has " +
                                                  std::to_string(header->size()) + " columns");
  }

  TimeSeries series;
  series.name = path.stem().string();
  if (format == SeriesFormat::Csv) series.name += ":" + std::to_string(channel);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header->size()) {
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields",
                  row);
    }
    const auto value = parse_double(fields[column]);
    if (!value) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": cannot parse '" +
                                             std::string(fields[column]) + "'", row);
    }
    if (!std::isfinite(*value)) {
      throw Error(ErrorCode::NonFiniteValue, "row " + std::to_string(row), row);
    }
    series.values.push_back(*value);
    ++row;
  }
  if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "'" + path.string() + "' has no rows");
  return series;
}

LabelSeries load_labels(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  LabelSeries out;
  std::string line;
  bool first = true;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto field = trim(line);
    if (field.empty()) continue;
    if (first) {
      first = false;
      if (field == "label") continue;
    }
    const auto value = parse_double(field);
    if (!value || (*value != 0.0 && *value != 1.0)) {
      throw Error(ErrorCode::NonBinaryLabel,
                  "row " + std::to_string(row) + ": '" + std::string(field) + "'", row);
    }
    out.labels.push_back(*value == 1.0 ? 1 : 0);
    ++row;
  }
  return out;
}

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << "value\n";
  char buf[64];
  for (double v : series.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

void write_labels_csv(const LabelSeries& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << "label\n";
  for (auto l : labels.labels) out << static_cast<int>(l) << '\n';
}

SeriesFormat parse_series_format(const std::string& text) {
  if (text == "csv") return SeriesFormat::Csv;
  if (text == "nab" || text == "nab_csv") return SeriesFormat::NabCsv;
  throw Error(ErrorCode::InvalidParameter, "unknown series format '" + text + "'");
}

TailPolicy parse_tail_policy(const std::string& text) {
  if (text == "pad" || text == "pad_repeat_last") return TailPolicy::PadRepeatLast;
  if (text == "truncate") return TailPolicy::Truncate;
  throw Error(ErrorCode::InvalidParameter, "unknown tail policy '" + text + "'");
}

std::string to_string(TailPolicy policy) {
  return policy == TailPolicy::PadRepeatLast ? "pad_repeat_last" : "truncate";
}

}  // namespace themis::io
