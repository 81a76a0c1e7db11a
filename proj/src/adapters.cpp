#include "themis/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "themis/error.hpp"

namespace themis::adapt {

namespace {

constexpr double kNullEigenvalueRatio = 1e-10;
constexpr double kDegenerateNorm = 1e-12;
constexpr double kReachFloor = 1e-10;

std::size_t resolved_top_k(const TrimmedParams& params, std::size_t n_t) {
  if (params.top_k) return *params.top_k;
  return static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n_t)));
}

std::size_t trim_count(double alpha, std::size_t n_t) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n_t)));
}

void check_trimmed(const TrimmedParams& params, std::size_t m) {
  if (!(params.alpha >= 0.0 && params.alpha < 0.5)) {
    throw Error(ErrorCode::InvalidParameter, "trim fraction must lie in [0, 0.5)");
  }
  if (m < 2) throw Error(ErrorCode::TooFewPoints, "trimmed adapter needs at least 2 rows");
  const std::size_t n_t = m - 1;
  const std::size_t top_k = resolved_top_k(params, n_t);
  if (top_k == 0) throw Error(ErrorCode::InvalidParameter, "top_k must be >= 1");
  const std::size_t cut = trim_count(params.alpha, n_t);
  if (n_t < 2 * cut + top_k) {
    throw Error(ErrorCode::TrimExhaustsData, "n_t=" + std::to_string(n_t) + " leaves " +
                                                 std::to_string(n_t - std::min(n_t, 2 * cut)) +
                                                 " values after trimming, top_k=" + std::to_string(top_k));
  }
}

// Whether the adapter is well defined on an m-row matrix.
bool fits(const AdapterConfig& config, std::size_t m) {
  if (m < 2) return false;
  switch (config.adapter) {
    case Adapter::Spectral: return config.spectral.k >= 1 && config.spectral.k <= m;
    case Adapter::Lof: return config.lof.neighbors >= 1 && config.lof.neighbors + 1 <= m;
    case Adapter::Mean: return true;
    case Adapter::TrimmedTopK:
      try {
        check_trimmed(config.trimmed, m);
        return true;
      } catch (const Error&) {
        return false;
      }
  }
  return false;
}

RowScores run_adapter(const sim::SimilarityMatrix& s, const AdapterConfig& config) {
  switch (config.adapter) {
    case Adapter::Spectral: return spectral_residual_score(s, config.spectral, config.solver);
    case Adapter::Lof: return {lof_score(s, config.lof), false};
    case Adapter::Mean: return {mean_similarity_score(s), false};
    case Adapter::TrimmedTopK: return {trimmed_topk_score(s, config.trimmed), false};
  }
  throw Error(ErrorCode::InvalidParameter, "unknown adapter");
}

sim::SimilarityMatrix submatrix(const sim::SimilarityMatrix& s, const std::vector<std::size_t>& keep) {
  const auto n = keep.size();
  std::vector<double> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) entries[i * n + j] = s(keep[i], keep[j]);
  }
  sim::SimilarityMatrix out(n, std::move(entries), std::vector<std::uint8_t>(n, 0));
  out.batch_index = s.batch_index;
  return out;
}

}  // namespace

std::string to_string(Adapter adapter) {
  switch (adapter) {
    case Adapter::Spectral: return "spectral";
    case Adapter::Lof: return "lof";
    case Adapter::Mean: return "mean";
    case Adapter::TrimmedTopK: return "trimmed";
  }
  return "unknown";
}

Adapter parse_adapter(const std::string& text) {
  if (text == "spectral") return Adapter::Spectral;
  if (text == "lof") return Adapter::Lof;
  if (text == "mean") return Adapter::Mean;
  if (text == "trimmed" || text == "trimmed_topk") return Adapter::TrimmedTopK;
  throw Error(ErrorCode::InvalidParameter, "unknown adapter '" + text + "'");
}

std::string to_string(EigenSolver solver) { return solver == EigenSolver::Full ? "full" : "iterative"; }

EigenSolver parse_eigen_solver(const std::string& text) {
  if (text == "full") return EigenSolver::Full;
  if (text == "iterative") return EigenSolver::Iterative;
  throw Error(ErrorCode::InvalidParameter, "unknown eigensolver '" + text + "'");
}

double exact_sum(std::span<const double> values) {
  // Shewchuk's non-overlapping partials with a correctly rounded final pass.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  std::size_t n = partials.size();
  if (n == 0) return 0.0;
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

RowScores spectral_scores(const EigenDecomposition& eig, std::size_t k) {
  const auto m = static_cast<std::size_t>(eig.vectors.rows());
  const auto available = static_cast<std::size_t>(eig.vectors.cols());
  if (k == 0 || k > available || available != static_cast<std::size_t>(eig.values.size())) {
    throw Error(ErrorCode::InvalidParameter, "k=" + std::to_string(k) + " with " +
                                                 std::to_string(available) + " eigenpairs available");
  }
  RowScores out{std::vector<double>(m, 0.0), false};
  const double lambda_max = eig.values.maxCoeff();
  std::vector<Eigen::Index> cols;
  for (std::size_t c = available - k; c < available; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (lambda_max > 0.0 && eig.values[col] > kNullEigenvalueRatio * lambda_max) cols.push_back(col);
  }
  std::vector<double> norms(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    double sq = 0.0;
    for (auto c : cols) {
      const double e = eig.vectors(static_cast<Eigen::Index>(t), c);
      sq += e * e;
    }
    norms[t] = std::sqrt(sq);
  }
  const double max_norm = m == 0 ? 0.0 : *std::max_element(norms.begin(), norms.end());
  if (max_norm < kDegenerateNorm) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t t = 0; t < m; ++t) out.scores[t] = std::clamp(1.0 - norms[t] / max_norm, 0.0, 1.0);
  return out;
}

RowScores spectral_residual_score(const sim::SimilarityMatrix& s, const SpectralParams& params,
                                  EigenSolver solver) {
  if (params.k == 0 || params.k > s.size()) {
    throw Error(ErrorCode::InvalidParameter,
                "spectral k=" + std::to_string(params.k) + " outside [1, " + std::to_string(s.size()) + "]");
  }
  const auto eig = solver == EigenSolver::Full ? decompose_largest(s, params.k) : decompose_top(s, params.k);
  return spectral_scores(eig, params.k);
}

std::vector<double> lof_score(const sim::SimilarityMatrix& s, const LofParams& params) {
  const std::size_t m = s.size();
  const std::size_t k = params.neighbors;
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "k_nn must be >= 1");
  if (m < k + 1) {
    throw Error(ErrorCode::TooFewPoints,
                "LOF with k_nn=" + std::to_string(k) + " needs " + std::to_string(k + 1) + " rows, got " +
                    std::to_string(m));
  }
  const auto entries = s.entries();
  const double smax = *std::max_element(entries.begin(), entries.end());
  auto dist = [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : smax - s(i, j); };

  std::vector<std::size_t> neighbors(m * k);
  std::vector<double> kdist(m);
  std::vector<std::size_t> order(m - 1);
  for (std::size_t t = 0; t < m; ++t) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != t) order[n++] = j;
    }
    const auto closer = [&](std::size_t a, std::size_t b) {
      const double da = dist(t, a);
      const double db = dist(t, b);
      return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
    std::copy_n(order.begin(), k, neighbors.begin() + static_cast<std::ptrdiff_t>(t * k));
    kdist[t] = dist(t, order[k - 1]);
  }

  std::vector<double> lrd(m);
  for (std::size_t t = 0; t < m; ++t) {
    double reach = 0.0;
    for (std::size_t n = 0; n < k; ++n) {
      const auto j = neighbors[t * k + n];
      reach += std::max(dist(t, j), kdist[j]);
    }
    lrd[t] = 1.0 / std::max(reach / static_cast<double>(k), kReachFloor);
  }

  std::vector<double> lof(m);
  for (std::size_t t = 0; t < m; ++t) {
    double acc = 0.0;
    for (std::size_t n = 0; n < k; ++n) acc += lrd[neighbors[t * k + n]];
    lof[t] = acc / static_cast<double>(k) / lrd[t];
  }
  return lof;
}

std::vector<double> mean_similarity_score(const sim::SimilarityMatrix& s) {
  const std::size_t m = s.size();
  if (m < 2) throw Error(ErrorCode::TooFewPoints, "mean adapter needs at least 2 rows");
  std::vector<double> out(m);
  std::vector<double> off(m - 1);
  for (std::size_t t = 0; t < m; ++t) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != t) off[n++] = s(t, j);
    }
    out[t] = 1.0 - exact_sum(off) / static_cast<double>(m - 1);
  }
  return out;
}

std::vector<double> trimmed_topk_score(const sim::SimilarityMatrix& s, const TrimmedParams& params) {
  const std::size_t m = s.size();
  check_trimmed(params, m);
  const std::size_t n_t = m - 1;
  const std::size_t top_k = resolved_top_k(params, n_t);
  const std::size_t cut = trim_count(params.alpha, n_t);

  std::vector<double> out(m);
  std::vector<double> off(n_t);
  for (std::size_t t = 0; t < m; ++t) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != t) off[n++] = s(t, j);
    }
    std::sort(off.begin(), off.end());
    // Surviving values are off[cut, n_t - cut); the top_k largest end at n_t - cut.
    const auto end = n_t - cut;
    const std::span<const double> top(off.data() + (end - top_k), top_k);
    out[t] = 1.0 - exact_sum(top) / static_cast<double>(top_k);
  }
  return out;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
  if (raw.empty()) throw Error(ErrorCode::InvalidParameter, "cannot normalise an empty score vector");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo;
  const double range = *hi - min + kNormalizeEpsilon;
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - min) / range;
  return out;
}

RowScores score_batch(const sim::SimilarityMatrix& s, const AdapterConfig& config) {
  const std::size_t m = s.size();
  if (s.zero_row_count() == 0) return run_adapter(s, config);

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < m; ++i) {
    if (!s.is_zero_row(i)) active.push_back(i);
  }
  if (!fits(config, active.size())) return {std::vector<double>(m, 0.0), true};

  const auto inner = run_adapter(submatrix(s, active), config);
  const double floor = *std::min_element(inner.scores.begin(), inner.scores.end());
  RowScores out{std::vector<double>(m, floor), inner.degenerate};
  for (std::size_t i = 0; i < active.size(); ++i) out.scores[active[i]] = inner.scores[i];
  return out;
}

std::vector<double> normalize_batch(std::span<const double> raw, std::span<const io::RowRef> rows) {
  if (raw.size() != rows.size()) throw Error(ErrorCode::PartitionMismatch, "score and row counts differ");
  std::vector<double> real;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!rows[i].pad) real.push_back(raw[i]);
  }
  std::vector<double> out(raw.size(), 0.0);
  if (real.empty()) return out;
  const auto normed = normalize_scores(real);
  std::size_t n = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!rows[i].pad) out[i] = normed[n++];
  }
  return out;
}

ScoreSeries assemble_series_scores(const std::vector<std::vector<double>>& batch_scores,
                                   const sim::BatchPartition& partition, const io::WindowPlan& plan,
                                   const AdapterConfig& config) {
  if (batch_scores.size() != partition.batches.size()) {
    throw Error(ErrorCode::PartitionMismatch, std::to_string(batch_scores.size()) + " scored batches for " +
                                                  std::to_string(partition.batches.size()) + " partitions");
  }
  const std::size_t T = plan.series_length();
  std::vector<double> sum(T, 0.0);
  std::vector<std::size_t> count(T, 0);
  std::size_t next_window = 0;
  for (std::size_t b = 0; b < batch_scores.size(); ++b) {
    const auto& range = partition.batches[b];
    if (range.first != next_window) throw Error(ErrorCode::PartitionMismatch, "batches are not consecutive");
    next_window += range.count;
    const auto refs = plan.row_refs(range.first, range.count);
    if (refs.size() != batch_scores[b].size()) {
      throw Error(ErrorCode::PartitionMismatch, "batch " + std::to_string(b) + " holds " +
                                                    std::to_string(batch_scores[b].size()) + " scores for " +
                                                    std::to_string(refs.size()) + " rows");
    }
    for (std::size_t r = 0; r < refs.size(); ++r) {
      if (refs[r].pad) continue;
      sum[refs[r].timestep] += batch_scores[b][r];
      ++count[refs[r].timestep];
    }
  }
  if (next_window != plan.window_count()) {
    throw Error(ErrorCode::PartitionMismatch, "partition does not cover every window");
  }
  ScoreSeries out;
  out.config = config;
  out.scores.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (count[t] == 0) throw Error(ErrorCode::PartitionMismatch, "timestep " + std::to_string(t) + " unscored");
    out.scores[t] = count[t] == 1 ? sum[t] : sum[t] / static_cast<double>(count[t]);
  }
  return out;
}

}  // namespace themis::adapt
