#include "themis/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "themis/embedding_store.hpp"
#include "themis/error.hpp"

namespace themis::synth {

namespace {

// Independent counter streams of one seed.
constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;
constexpr std::uint64_t kLayoutStream = 0x6C61796F7574ULL;

}  // namespace

LabeledSeries level_shift_series(const LevelShiftSpec& spec) {
  if (spec.segments == 0 || spec.min_segment == 0 || spec.min_segment > spec.max_segment ||
      spec.sine_period == 0 || !(spec.noise_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "invalid level-shift specification");
  }
  const std::size_t head = spec.sine_period;
  if (spec.length <= head || (spec.length - head) / spec.segments < 2 * spec.max_segment) {
    throw Error(ErrorCode::InvalidParameter, std::to_string(spec.segments) + " segments of up to " +
                                                 std::to_string(spec.max_segment) + " points do not fit in " +
                                                 std::to_string(spec.length));
  }

  LabeledSeries out;
  out.series.name = "level_shift_seed" + std::to_string(spec.seed);
  out.series.values.resize(spec.length);
  out.labels.labels.assign(spec.length, 0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double phase = two_pi * static_cast<double>(t) / static_cast<double>(spec.sine_period);
    out.series.values[t] =
        spec.sine_amplitude * std::sin(phase) + spec.noise_sigma * embed::normal_at(spec.seed ^ kNoiseStream, t);
  }

  const std::size_t stratum = (spec.length - head) / spec.segments;
  const std::uint64_t layout = spec.seed ^ kLayoutStream;
  for (std::size_t i = 0; i < spec.segments; ++i) {
    const auto span_len = spec.max_segment - spec.min_segment + 1;
    const auto len = spec.min_segment + static_cast<std::size_t>(embed::uniform_at(layout, 3 * i) *
                                                                 static_cast<double>(span_len));
    const auto slack = stratum - len - 1;
    const auto start = head + i * stratum +
                       static_cast<std::size_t>(embed::uniform_at(layout, 3 * i + 1) * static_cast<double>(slack));
    const double sign = embed::uniform_at(layout, 3 * i + 2) < 0.5 ? -1.0 : 1.0;
    for (std::size_t t = start; t < start + len; ++t) {
      out.series.values[t] += sign * spec.shift_sigmas * spec.noise_sigma;
      out.labels.labels[t] = 1;
    }
    out.segments.events.push_back({start, start + len});
  }
  return out;
}

}  // namespace themis::synth
