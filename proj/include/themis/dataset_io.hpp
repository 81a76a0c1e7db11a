#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace themis::io {

/// Univariate observations x_0..x_{T-1}. Values are finite by construction.
struct TimeSeries {
  std::vector<double> values;
  std::string name;

  std::size_t size() const noexcept { return values.size(); }
};

/// Binary anomaly flags paired with a TimeSeries.
struct LabelSeries {
  std::vector<std::uint8_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

enum class SeriesFormat { Csv, NabCsv };
enum class TailPolicy { PadRepeatLast, Truncate };

/// Position of one embedding row on the original timeline.
struct RowRef {
  std::size_t timestep = 0;  // index into the series; for pads, the conceptual index >= T
  bool pad = false;
};

/// Fixed-length windows over a series of length T.
///
/// With PadRepeatLast every window holds exactly L rows and positions past the
/// end of the series are pads (the series is conceptually extended by repeating
/// its last value). With Truncate the final window is shortened instead, so no
/// pad rows exist.
class WindowPlan {
 public:
  WindowPlan() = default;
  WindowPlan(std::size_t series_length, std::size_t window_length, std::size_t stride,
             TailPolicy policy, std::vector<std::size_t> starts);

  std::size_t series_length() const noexcept { return series_length_; }
  std::size_t window_length() const noexcept { return window_length_; }
  std::size_t stride() const noexcept { return stride_; }
  TailPolicy tail_policy() const noexcept { return policy_; }
  const std::vector<std::size_t>& window_starts() const noexcept { return starts_; }
  std::size_t window_count() const noexcept { return starts_.size(); }

  /// Embedding rows held by window i (L, or shorter for a truncated tail).
  std::size_t rows_in_window(std::size_t i) const;
  /// Positions of window i that fall inside [0, T).
  std::size_t valid_length(std::size_t i) const;
  std::size_t pad_count(std::size_t i) const { return rows_in_window(i) - valid_length(i); }

  /// Index of the first embedding row of window i.
  std::size_t first_row(std::size_t i) const;
  std::size_t total_rows() const;

  /// Row references for windows [first, first + count), in row order.
  std::vector<RowRef> row_refs(std::size_t first, std::size_t count) const;
  std::vector<RowRef> row_refs() const { return row_refs(0, window_count()); }

  friend bool operator==(const WindowPlan&, const WindowPlan&) = default;

 private:
  std::size_t series_length_ = 0;
  std::size_t window_length_ = 0;
  std::size_t stride_ = 0;
  TailPolicy policy_ = TailPolicy::PadRepeatLast;
  std::vector<std::size_t> starts_;
};

/// Loads one column of a delimited file. For NabCsv the value column is used
/// and `channel` is ignored.
TimeSeries load_series(const std::filesystem::path& path, std::size_t channel = 0,
                       SeriesFormat format = SeriesFormat::Csv);

/// Loads a single column of 0/1 flags with an optional "label" header.
LabelSeries load_labels(const std::filesystem::path& path);

/// Writes `value` header plus one value per line, printed with enough digits
/// to round-trip bitwise.
void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);
void write_labels_csv(const LabelSeries& labels, const std::filesystem::path& path);

WindowPlan plan_windows(std::size_t series_length, std::size_t window_length,
                        std::size_t stride, TailPolicy policy = TailPolicy::PadRepeatLast);

/// Series value at a conceptual index, clamped to the ends of the series.
double value_at(const TimeSeries& series, std::ptrdiff_t index);

SeriesFormat parse_series_format(const std::string& text);
TailPolicy parse_tail_policy(const std::string& text);
std::string to_string(TailPolicy policy);

}  // namespace themis::io
