#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "themis/dataset_io.hpp"

namespace themis::thresh {

/// Generalized Pareto fit to the exceedances over t0.
struct GpdFit {
  double gamma = 0.0;
  double sigma = 0.0;
  std::size_t peak_count = 0;
  double t0 = 0.0;
  double log_likelihood = 0.0;
  /// True when the exponential model (gamma = 0, sigma = mean peak) won,
  /// either because no Grimshaw root was found or because it scored higher.
  bool exponential = false;
};

enum class ThresholdMethod { Spot, FixedQuantile };

std::string to_string(ThresholdMethod method);

struct ThresholdDecision {
  double delta = 0.0;
  double q = 0.0;
  double init_level = 0.0;
  ThresholdMethod method = ThresholdMethod::Spot;
  GpdFit fit;
  std::size_t n = 0;
  /// No score exceeded t0; delta is t0.
  bool no_peaks = false;
  /// Fewer than kMinPeaks exceedances; the exponential tail was used.
  bool few_peaks = false;
  /// delta was pulled into [t0, max score + sigma].
  bool clamped = false;
};

inline constexpr std::size_t kMinPeaks = 8;
/// Below this |gamma| the exponential-limit formula is used.
inline constexpr double kGammaZero = 1e-6;

/// Empirical quantile with linear interpolation between order statistics
/// (position (n - 1) * level).
double empirical_quantile(std::span<const double> values, double level);

/// GPD log-likelihood of positive peaks; -inf outside the support.
double gpd_log_likelihood(std::span<const double> peaks, double gamma, double sigma);

/// Grimshaw's profile equation u(x) v(x) - 1 with
/// u(x) = mean 1/(1 + x Y), v(x) = 1 + mean log(1 + x Y).
double grimshaw_objective(std::span<const double> peaks, double x);

/// Maximum-likelihood GPD fit. Roots of the Grimshaw equation are located by
/// sign changes on grids covering (-1/Y_max, 0) and (0, 2 (mean - min) / min^2],
/// refined by bisection (relative tolerance 1e-10, at most 200 steps); the
/// candidate with the highest likelihood wins, the exponential model included.
/// Throws TooFewPeaks below kMinPeaks peaks, InvalidParameter for peaks <= 0.
GpdFit fit_gpd(std::span<const double> peaks);

/// Exponential fit: gamma = 0, sigma = mean peak.
GpdFit fit_exponential(std::span<const double> peaks);

/// delta = t0 + (sigma / gamma) ((q n / N_t)^-gamma - 1), or
/// t0 - sigma ln(q n / N_t) when |gamma| <= kGammaZero. No clamping.
double spot_quantile(double t0, double gamma, double sigma, double q, std::size_t n, std::size_t peak_count);

/// Batch SPOT over `scores`. The result is clamped to [t0, max(scores) + sigma].
ThresholdDecision spot_threshold(std::span<const double> scores, double q, double init_level);

/// Fixed threshold at the init_level quantile; kept for ablations.
ThresholdDecision quantile_threshold(std::span<const double> scores, double level);

/// y_t = 1 iff s_t > delta.
io::LabelSeries apply_threshold(std::span<const double> scores, double delta);

}  // namespace themis::thresh
