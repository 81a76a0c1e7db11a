#include "themis/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "themis/error.hpp"

namespace themis::eval {

namespace {

// Integral of f over [lo, hi] where f is linear between consecutive entries
// of `knots` (knots outside the range are ignored).
double integrate_linear(const std::function<double(double)>& f, double lo, double hi, std::vector<double> knots) {
  if (!(hi > lo)) return 0.0;
  knots.push_back(lo);
  knots.push_back(hi);
  std::erase_if(knots, [&](double x) { return x < lo || x > hi; });
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double acc = 0.0;
  double prev_x = knots.front();
  double prev_f = f(prev_x);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double x = knots[i];
    const double fx = f(x);
    acc += 0.5 * (prev_f + fx) * (x - prev_x);
    prev_x = x;
    prev_f = fx;
  }
  return acc;
}

double distance_to(double x, Interval iv) {
  if (x < iv.start) return iv.start - x;
  if (x > iv.end) return x - iv.end;
  return 0.0;
}

double distance_to_set(double y, std::span<const Interval> set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& iv : set) best = std::min(best, distance_to(y, iv));
  return best;
}

double total_length(std::span<const Interval> set) {
  double acc = 0.0;
  for (const auto& iv : set) acc += iv.length();
  return acc;
}

// Breakpoints of y -> distance_to_set(y, set): interval ends and gap midpoints.
std::vector<double> distance_knots(std::span<const Interval> set) {
  std::vector<Interval> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<double> knots;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    knots.push_back(sorted[i].start);
    knots.push_back(sorted[i].end);
    if (i + 1 < sorted.size()) knots.push_back(0.5 * (sorted[i].end + sorted[i + 1].start));
  }
  return knots;
}

// Adds the zero crossings of each linear piece of g between sorted knots.
void add_crossings(const std::function<double(double)>& g, std::vector<double>& knots, double lo, double hi) {
  std::vector<double> base = knots;
  base.push_back(lo);
  base.push_back(hi);
  std::erase_if(base, [&](double x) { return x < lo || x > hi; });
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());
  for (std::size_t i = 1; i < base.size(); ++i) {
    const double p = base[i - 1];
    const double q = base[i];
    const double gp = g(p);
    const double gq = g(q);
    if ((gp < 0.0 && gq > 0.0) || (gp > 0.0 && gq < 0.0)) knots.push_back(p + (q - p) * gp / (gp - gq));
  }
}

std::vector<Interval> clip_to_zone(const EventList& pred, Interval zone) {
  std::vector<Interval> out;
  for (const auto& e : pred.events) {
    const double s = std::max(static_cast<double>(e.start), zone.start);
    const double t = std::min(static_cast<double>(e.end), zone.end);
    if (t > s) out.push_back({s, t});
  }
  return out;
}

Interval as_interval(Event e) { return {static_cast<double>(e.start), static_cast<double>(e.end)}; }

}  // namespace

EventList to_events(const io::LabelSeries& labels) {
  EventList out;
  std::size_t t = 0;
  const std::size_t n = labels.labels.size();
  while (t < n) {
    if (labels.labels[t] == 0) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < n && labels.labels[t] != 0) ++t;
    out.events.push_back({start, t});
  }
  return out;
}

EventList normalize_events(EventList list, std::size_t series_length) {
  for (const auto& e : list.events) {
    if (e.start >= e.end || e.end > series_length) {
      throw Error(ErrorCode::InvalidParameter, "event [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                                                   ") is empty or outside [0, " + std::to_string(series_length) + ")");
    }
  }
  std::sort(list.events.begin(), list.events.end(), [](const Event& a, const Event& b) { return a.start < b.start; });
  EventList merged;
  for (const auto& e : list.events) {
    if (!merged.events.empty() && e.start <= merged.events.back().end) {
      merged.events.back().end = std::max(merged.events.back().end, e.end);
    } else {
      merged.events.push_back(e);
    }
  }
  return merged;
}

std::vector<Interval> affiliation_zones(const EventList& truth, std::size_t series_length) {
  std::vector<Interval> zones;
  const auto& ev = truth.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double lo = i == 0 ? 0.0 : 0.5 * static_cast<double>(ev[i - 1].end + ev[i].start);
    const double hi = i + 1 == ev.size() ? static_cast<double>(series_length)
                                         : 0.5 * static_cast<double>(ev[i].end + ev[i + 1].start);
    zones.push_back({lo, hi});
  }
  return zones;
}

double zone_precision_probability(std::span<const Interval> pred, Interval truth, Interval zone) {
  const double len = total_length(pred);
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidParameter, "precision of an empty prediction set");
  const double a = truth.start;
  const double b = truth.end;
  const double e0 = zone.start;
  const double e1 = zone.end;
  const double width = e1 - e0;

  // Measure of zone points at distance >= delta > 0 from the truth event.
  auto survival = [&](double delta) {
    return (std::max(0.0, a - delta - e0) + std::max(0.0, e1 - b - delta)) / width;
  };
  const auto left = [&](double x) { return survival(a - x); };
  const auto right = [&](double x) { return survival(x - b); };

  double acc = 0.0;
  for (const auto& iv : pred) {
    // Inside the truth event every point scores 1.
    acc += std::max(0.0, std::min(iv.end, b) - std::max(iv.start, a));
    acc += integrate_linear(left, iv.start, std::min(iv.end, a), {a + b - e1});
    acc += integrate_linear(right, std::max(iv.start, b), iv.end, {a + b - e0});
  }
  return std::clamp(acc / len, 0.0, 1.0);
}

double zone_recall_probability(std::span<const Interval> pred, Interval truth, Interval zone) {
  if (pred.empty() || !(truth.length() > 0.0)) return 0.0;
  const double e0 = zone.start;
  const double e1 = zone.end;
  const double width = e1 - e0;
  const auto dist = [&](double y) { return distance_to_set(y, pred); };
  const auto g_left = [&](double y) { return y - dist(y) - e0; };
  const auto g_right = [&](double y) { return e1 - y - dist(y); };
  const auto f = [&](double y) {
    const double d = dist(y);
    return (std::max(0.0, y - d - e0) + std::max(0.0, e1 - y - d)) / width;
  };

  auto knots = distance_knots(pred);
  add_crossings(g_left, knots, truth.start, truth.end);
  add_crossings(g_right, knots, truth.start, truth.end);
  const double acc = integrate_linear(f, truth.start, truth.end, knots);
  return std::clamp(acc / truth.length(), 0.0, 1.0);
}

double zone_precision_distance(std::span<const Interval> pred, Interval truth) {
  const double len = total_length(pred);
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidParameter, "distance of an empty prediction set");
  const auto d = [&](double x) { return distance_to(x, truth); };
  double acc = 0.0;
  for (const auto& iv : pred) acc += integrate_linear(d, iv.start, iv.end, {truth.start, truth.end});
  return acc / len;
}

double zone_recall_distance(std::span<const Interval> pred, Interval truth) {
  if (pred.empty()) return std::numeric_limits<double>::infinity();
  const auto d = [&](double y) { return distance_to_set(y, pred); };
  return integrate_linear(d, truth.start, truth.end, distance_knots(pred)) / truth.length();
}

AffiliationReport affiliation_metrics(const EventList& pred_in, const EventList& truth_in, std::size_t series_length) {
  if (series_length == 0) throw Error(ErrorCode::EmptySeries, "affiliation metrics on an empty series");
  const auto pred = normalize_events(pred_in, series_length);
  const auto truth = normalize_events(truth_in, series_length);

  AffiliationReport report;
  report.no_predictions = pred.empty();
  if (truth.empty()) {
    report.empty_truth = true;
    return report;
  }

  const auto zones = affiliation_zones(truth, series_length);
  double precision_sum = 0.0;
  std::size_t precision_zones = 0;
  double recall_sum = 0.0;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    ZoneReport z;
    z.zone = zones[i];
    z.truth = truth.events[i];
    const auto j = as_interval(truth.events[i]);
    const auto pieces = clip_to_zone(pred, zones[i]);
    if (!pieces.empty()) {
      z.precision = zone_precision_probability(pieces, j, zones[i]);
      z.precision_distance = zone_precision_distance(pieces, j);
      z.recall_distance = zone_recall_distance(pieces, j);
      precision_sum += *z.precision;
      ++precision_zones;
    }
    z.recall = zone_recall_probability(pieces, j, zones[i]);
    recall_sum += z.recall;
    report.per_zone.push_back(z);
  }
  report.precision = precision_zones == 0 ? 0.0 : precision_sum / static_cast<double>(precision_zones);
  report.recall = recall_sum / static_cast<double>(zones.size());
  const double denom = report.precision + report.recall;
  report.f1 = denom > 0.0 ? 2.0 * report.precision * report.recall / denom : 0.0;
  return report;
}

double summarize(const io::LabelSeries& labels) {
  if (labels.labels.empty()) throw Error(ErrorCode::EmptySeries, "anomaly ratio of an empty label series");
  std::size_t ones = 0;
  for (auto l : labels.labels) ones += l != 0 ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(labels.labels.size());
}

PointwiseScores pointwise_f1(const io::LabelSeries& pred, const io::LabelSeries& truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " predictions for " +
                                               std::to_string(truth.size()) + " labels");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const bool p = pred.labels[t] != 0;
    const bool y = truth.labels[t] != 0;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  PointwiseScores out;
  out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

}  // namespace themis::eval
