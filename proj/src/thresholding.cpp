#include "themis/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "themis/error.hpp"

namespace themis::thresh {

namespace {

constexpr std::size_t kGridPoints = 300;
constexpr double kRootTolerance = 1e-10;
constexpr int kMaxBisections = 200;
// Grid points closer to zero than this (relative to 1/Y_max) only see
// rounding noise around the trivial root x = 0.
constexpr double kNearZero = 1e-5;

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

double mean_log1p(std::span<const double> peaks, double x) {
  double acc = 0.0;
  for (double y : peaks) acc += std::log1p(x * y);
  return acc / static_cast<double>(peaks.size());
}

double bisect(std::span<const double> peaks, double lo, double hi, double f_lo) {
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= kRootTolerance * std::abs(mid)) return mid;
    const double f_mid = grimshaw_objective(peaks, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void collect_roots(std::span<const double> peaks, const std::vector<double>& grid, std::vector<double>& roots) {
  if (grid.size() < 2) return;
  double prev_x = grid.front();
  double prev_f = grimshaw_objective(peaks, prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double f = grimshaw_objective(peaks, x);
    if (!std::isfinite(f) || !std::isfinite(prev_f)) {
      prev_x = x;
      prev_f = f;
      continue;
    }
    if (prev_f == 0.0) {
      roots.push_back(prev_x);
    } else if ((prev_f < 0.0) != (f < 0.0) && f != 0.0) {
      roots.push_back(bisect(peaks, prev_x, x, prev_f));
    }
    prev_x = x;
    prev_f = f;
  }
  if (prev_f == 0.0) roots.push_back(prev_x);
}

void check_peaks(std::span<const double> peaks) {
  if (peaks.empty()) throw Error(ErrorCode::TooFewPeaks, "no peaks to fit");
  for (double y : peaks) {
    if (!(y > 0.0) || !std::isfinite(y)) throw Error(ErrorCode::InvalidParameter, "peaks must be positive and finite");
  }
}

}  // namespace

std::string to_string(ThresholdMethod method) {
  return method == ThresholdMethod::Spot ? "spot" : "fixed_quantile";
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw Error(ErrorCode::EmptySeries, "quantile of an empty score series");
  if (!(level >= 0.0 && level <= 1.0)) throw Error(ErrorCode::InvalidParameter, "quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double gpd_log_likelihood(std::span<const double> peaks, double gamma, double sigma) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(sigma > 0.0) || peaks.empty()) return kNegInf;
  const auto n = static_cast<double>(peaks.size());
  if (std::abs(gamma) <= kGammaZero) {
    double acc = 0.0;
    for (double y : peaks) acc += y;
    return -n * std::log(sigma) - acc / sigma;
  }
  double acc = 0.0;
  for (double y : peaks) {
    const double z = gamma * y / sigma;
    if (!(z > -1.0)) return kNegInf;
    acc += std::log1p(z);
  }
  return -n * std::log(sigma) - (1.0 + 1.0 / gamma) * acc;
}

double grimshaw_objective(std::span<const double> peaks, double x) {
  double u = 0.0;
  double v = 0.0;
  for (double y : peaks) {
    const double z = x * y;
    u += 1.0 / (1.0 + z);
    v += std::log1p(z);
  }
  const auto n = static_cast<double>(peaks.size());
  return (u / n) * (1.0 + v / n) - 1.0;
}

GpdFit fit_exponential(std::span<const double> peaks) {
  check_peaks(peaks);
  GpdFit fit;
  fit.gamma = 0.0;
  fit.sigma = std::accumulate(peaks.begin(), peaks.end(), 0.0) / static_cast<double>(peaks.size());
  fit.peak_count = peaks.size();
  fit.log_likelihood = gpd_log_likelihood(peaks, 0.0, fit.sigma);
  fit.exponential = true;
  return fit;
}

GpdFit fit_gpd(std::span<const double> peaks) {
  if (peaks.size() < kMinPeaks) {
    throw Error(ErrorCode::TooFewPeaks, std::to_string(peaks.size()) + " peaks, need at least " +
                                            std::to_string(kMinPeaks));
  }
  check_peaks(peaks);
  GpdFit best = fit_exponential(peaks);

  const auto [min_it, max_it] = std::minmax_element(peaks.begin(), peaks.end());
  const double ymin = *min_it;
  const double ymax = *max_it;
  const double ymean = best.sigma;

  std::vector<double> roots;
  // Negative side, dense near both ends of (-1/Y_max, 0).
  {
    auto near_zero = logspace(kNearZero, 0.5, kGridPoints);
    auto near_pole = logspace(1e-10, 0.5, kGridPoints);
    std::vector<double> grid;
    for (double f : near_pole) grid.push_back(-(1.0 - f) / ymax);
    for (auto it = near_zero.rbegin(); it != near_zero.rend(); ++it) grid.push_back(-*it / ymax);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    collect_roots(peaks, grid, roots);
  }
  const double upper = 2.0 * (ymean - ymin) / (ymin * ymin);
  const double lower = kNearZero / ymax;
  if (std::isfinite(upper) && upper > lower) collect_roots(peaks, logspace(lower, upper, kGridPoints), roots);

  for (double x : roots) {
    if (x == 0.0 || !std::isfinite(x)) continue;
    const double gamma = mean_log1p(peaks, x);
    const double sigma = gamma / x;
    if (!(sigma > 0.0) || !std::isfinite(gamma)) continue;
    const double ll = gpd_log_likelihood(peaks, gamma, sigma);
    if (ll > best.log_likelihood) {
      best.gamma = gamma;
      best.sigma = sigma;
      best.log_likelihood = ll;
      best.exponential = false;
    }
  }
  return best;
}

double spot_quantile(double t0, double gamma, double sigma, double q, std::size_t n, std::size_t peak_count) {
  if (peak_count == 0 || n == 0) throw Error(ErrorCode::InvalidParameter, "SPOT quantile needs peaks");
  const double r = q * static_cast<double>(n) / static_cast<double>(peak_count);
  if (std::abs(gamma) <= kGammaZero) return t0 - sigma * std::log(r);
  return t0 + (sigma / gamma) * (std::pow(r, -gamma) - 1.0);
}

ThresholdDecision spot_threshold(std::span<const double> scores, double q, double init_level) {
  if (scores.empty()) throw Error(ErrorCode::EmptySeries, "SPOT on an empty score series");
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidParameter, "risk q must lie in (0, 1)");
  if (!(init_level > 0.0 && init_level < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "initial quantile level must lie in (0, 1)");
  }
  ThresholdDecision out;
  out.q = q;
  out.init_level = init_level;
  out.method = ThresholdMethod::Spot;
  out.n = scores.size();

  const double t0 = empirical_quantile(scores, init_level);
  std::vector<double> peaks;
  for (double s : scores) {
    if (s > t0) peaks.push_back(s - t0);
  }
  if (peaks.empty()) {
    out.delta = t0;
    out.no_peaks = true;
    out.fit.t0 = t0;
    return out;
  }
  if (peaks.size() < kMinPeaks) {
    out.few_peaks = true;
    out.fit = fit_exponential(peaks);
  } else {
    out.fit = fit_gpd(peaks);
  }
  out.fit.t0 = t0;

  const double raw = spot_quantile(t0, out.fit.gamma, out.fit.sigma, q, scores.size(), peaks.size());
  const double smax = *std::max_element(scores.begin(), scores.end());
  const double clamped = std::max(t0, std::min(raw, smax + out.fit.sigma));
  out.clamped = clamped != raw;
  out.delta = clamped;
  return out;
}

ThresholdDecision quantile_threshold(std::span<const double> scores, double level) {
  ThresholdDecision out;
  out.method = ThresholdMethod::FixedQuantile;
  out.init_level = level;
  out.n = scores.size();
  out.delta = empirical_quantile(scores, level);
  out.fit.t0 = out.delta;
  return out;
}

io::LabelSeries apply_threshold(std::span<const double> scores, double delta) {
  io::LabelSeries out;
  out.labels.reserve(scores.size());
  for (double s : scores) out.labels.push_back(s > delta ? 1 : 0);
  return out;
}

}  // namespace themis::thresh
