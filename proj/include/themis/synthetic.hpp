#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "themis/dataset_io.hpp"
#include "themis/evaluation.hpp"

namespace themis::synth {

/// Periodic base signal plus Gaussian noise with injected level shifts.
struct LevelShiftSpec {
  std::size_t length = 8192;
  std::size_t segments = 5;
  std::size_t min_segment = 32;
  std::size_t max_segment = 128;
  double noise_sigma = 1.0;
  /// Shift magnitude in units of noise_sigma; the sign is drawn per segment.
  double shift_sigmas = 8.0;
  double sine_amplitude = 3.0;
  std::size_t sine_period = 32;
  std::uint64_t seed = 0;
};

struct LabeledSeries {
  io::TimeSeries series;
  io::LabelSeries labels;
  eval::EventList segments;
};

/// Segments are placed one per equal stratum of [period, length), so they
/// never overlap or touch. Throws InvalidParameter if they cannot fit.
LabeledSeries level_shift_series(const LevelShiftSpec& spec);

}  // namespace themis::synth
