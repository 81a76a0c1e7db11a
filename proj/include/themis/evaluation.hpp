#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "themis/dataset_io.hpp"

namespace themis::eval {

/// Half-open run of anomalous timesteps [start, end).
struct Event {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Sorted, disjoint, non-empty events inside [0, T).
struct EventList {
  std::vector<Event> events;

  bool empty() const noexcept { return events.empty(); }
  std::size_t size() const noexcept { return events.size(); }
  friend bool operator==(const EventList&, const EventList&) = default;
};

/// Closed-open interval on the continuous time axis. Timestep i covers [i, i + 1).
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - start; }
};

EventList to_events(const io::LabelSeries& labels);
/// Sorts, validates against [0, T) and merges touching events.
EventList normalize_events(EventList events, std::size_t series_length);

/// Zones partitioning [0, T): one per truth event, cut at the midpoints of the
/// gaps between consecutive events.
std::vector<Interval> affiliation_zones(const EventList& truth, std::size_t series_length);

/// Mean over predicted points x in `pred` (already inside `zone`) of the
/// probability that a uniform point of the zone lies at least as far from
/// `truth` as x does. Points inside the truth event score 1.
double zone_precision_probability(std::span<const Interval> pred, Interval truth, Interval zone);

/// Mean over truth points y of the probability that a uniform point of the
/// zone lies at least as far from y as the nearest predicted point. Zero when
/// the zone holds no prediction.
double zone_recall_probability(std::span<const Interval> pred, Interval truth, Interval zone);

/// Mean distance from predicted points to the truth event, and from truth
/// points to the nearest prediction.
double zone_precision_distance(std::span<const Interval> pred, Interval truth);
double zone_recall_distance(std::span<const Interval> pred, Interval truth);

struct ZoneReport {
  Interval zone;
  Event truth;
  /// Unset when the zone holds no predicted point.
  std::optional<double> precision;
  double recall = 0.0;
  std::optional<double> precision_distance;
  std::optional<double> recall_distance;
};

struct AffiliationReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// No truth events: recall and F1 are undefined and reported as absent.
  bool empty_truth = false;
  /// No predicted events: precision is undefined and reported as 0.
  bool no_predictions = false;
  std::vector<ZoneReport> per_zone;
};

/// Affiliation precision/recall/F1. Precision averages zones holding at least
/// one prediction; recall averages all zones.
AffiliationReport affiliation_metrics(const EventList& pred, const EventList& truth, std::size_t series_length);

/// Fraction of anomalous labels.
double summarize(const io::LabelSeries& labels);

struct PointwiseScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Plain per-timestep F1, for diagnostics only.
PointwiseScores pointwise_f1(const io::LabelSeries& pred, const io::LabelSeries& truth);

}  // namespace themis::eval
