#pragma once

// Independent reference implementations used only by the tests. They follow
// the textbook formulas directly and make no attempt at speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "themis/evaluation.hpp"
#include "themis/similarity.hpp"

namespace oracle {

inline std::vector<float> random_embeddings(std::mt19937_64& rng, std::size_t m, std::size_t d) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> z(m * d);
  for (auto& v : z) v = normal(rng);
  return z;
}

/// |cos| by a plain double loop.
inline std::vector<double> naive_wasm(std::span<const float> z, std::size_t m, std::size_t d) {
  std::vector<double> s(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double dot = 0, ni = 0, nj = 0;
      for (std::size_t c = 0; c < d; ++c) {
        const double a = z[i * d + c], b = z[j * d + c];
        dot += a * b;
        ni += a * a;
        nj += b * b;
      }
      s[i * m + j] = i == j ? 1.0 : std::min(1.0, std::abs(dot) / (std::sqrt(ni) * std::sqrt(nj)));
    }
  }
  return s;
}

/// Symmetric matrix with unit diagonal and off-diagonal entries in [0, 1].
inline themis::sim::SimilarityMatrix random_similarity(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(m * m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) s[i * m + j] = s[j * m + i] = u(rng);
  }
  return {m, std::move(s), std::vector<std::uint8_t>(m, 0)};
}

inline themis::sim::SimilarityMatrix from_entries(std::size_t m, std::vector<double> s) {
  return {m, std::move(s), std::vector<std::uint8_t>(m, 0)};
}

/// Cyclic Jacobi rotations on a small dense symmetric matrix. Returns the
/// eigenvalues ascending and the matching eigenvectors as columns (row-major m x m).
inline void jacobi_eigen(std::vector<double> a, std::size_t m, std::vector<double>& values,
                         std::vector<double>& vectors) {
  std::vector<double> v(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += a[p * m + q] * a[p * m + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a[p * m + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * m + q] - a[p * m + p]) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k * m + p], akq = a[k * m + q];
          a[k * m + p] = c * akp - s * akq;
          a[k * m + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p * m + k], aqk = a[q * m + k];
          a[p * m + k] = c * apk - s * aqk;
          a[q * m + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v[k * m + p], vkq = v[k * m + q];
          v[k * m + p] = c * vkp - s * vkq;
          v[k * m + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x * m + x] < a[y * m + y]; });
  values.resize(m);
  vectors.assign(m * m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    values[c] = a[order[c] * m + order[c]];
    for (std::size_t r = 0; r < m; ++r) vectors[r * m + c] = v[r * m + order[c]];
  }
}

/// 1 - |e_t| / max |e_j| over the top-k Jacobi eigenvectors.
inline std::vector<double> spectral_oracle(const std::vector<double>& s, std::size_t m, std::size_t k) {
  std::vector<double> values, vectors;
  jacobi_eigen(s, m, values, vectors);
  std::vector<double> norms(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t c = m - k; c < m; ++c) norms[t] += vectors[t * m + c] * vectors[t * m + c];
    norms[t] = std::sqrt(norms[t]);
  }
  const double mx = *std::max_element(norms.begin(), norms.end());
  std::vector<double> out(m);
  for (std::size_t t = 0; t < m; ++t) out[t] = 1 - norms[t] / mx;
  return out;
}

/// Planted-outlier block: `block` rows similar at `inner`, one extra row
/// (index `at`) similar to all others at `outer`.
inline std::vector<double> planted_block(std::size_t block, double inner, double outer, std::size_t at) {
  const std::size_t m = block + 1;
  std::vector<double> s(m * m, inner);
  for (std::size_t j = 0; j < m; ++j) s[at * m + j] = s[j * m + at] = outer;
  for (std::size_t i = 0; i < m; ++i) s[i * m + i] = 1.0;
  return s;
}

/// LOF straight from the definitions: full sort of every row, ties by index.
inline std::vector<double> naive_lof(const themis::sim::SimilarityMatrix& s, std::size_t k) {
  const std::size_t m = s.size();
  double smax = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) smax = std::max(smax, s(i, j));
  auto dist = [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : smax - s(i, j); };

  std::vector<std::vector<std::size_t>> nn(m);
  std::vector<double> kdist(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
    nn[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    kdist[i] = dist(i, nn[i].back());
  }
  std::vector<double> lrd(m);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0;
    for (auto j : nn[i]) sum += std::max(dist(i, j), kdist[j]);
    lrd[i] = 1.0 / std::max(sum / static_cast<double>(k), 1e-10);
  }
  std::vector<double> lof(m);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0;
    for (auto j : nn[i]) sum += lrd[j];
    lof[i] = sum / static_cast<double>(k) / lrd[i];
  }
  return lof;
}

inline double distance_to(double x, themis::eval::Interval iv) {
  if (x < iv.start) return iv.start - x;
  if (x > iv.end) return x - iv.end;
  return 0.0;
}

inline double distance_to(double x, std::span<const themis::eval::Interval> set) {
  double best = INFINITY;
  for (const auto& iv : set) best = std::min(best, distance_to(x, iv));
  return best;
}

inline double sample_union(std::mt19937_64& rng, std::span<const themis::eval::Interval> set) {
  double total = 0;
  for (const auto& iv : set) total += iv.length();
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (const auto& iv : set) {
    if (u < iv.length()) return iv.start + u;
    u -= iv.length();
  }
  return set.back().end;
}

/// Monte Carlo estimate of the zone precision: x uniform over the predicted
/// set, X uniform over the zone, P[d(X, J) >= d(x, J)].
inline double mc_precision(std::span<const themis::eval::Interval> pred, themis::eval::Interval truth,
                           themis::eval::Interval zone, std::size_t samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> in_zone(zone.start, zone.end);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double x = sample_union(rng, pred);
    const double X = in_zone(rng);
    hits += distance_to(X, truth) >= distance_to(x, truth);
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// y uniform over the truth event, X uniform over the zone,
/// P[|X - y| >= d(y, pred)].
inline double mc_recall(std::span<const themis::eval::Interval> pred, themis::eval::Interval truth,
                        themis::eval::Interval zone, std::size_t samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> in_zone(zone.start, zone.end);
  std::uniform_real_distribution<double> in_truth(truth.start, truth.end);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double y = in_truth(rng);
    const double X = in_zone(rng);
    hits += std::abs(X - y) >= distance_to(y, pred);
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// Inverse-CDF draw from GPD(gamma, sigma).
inline double gpd_draw(std::mt19937_64& rng, double gamma, double sigma) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (gamma == 0.0) return -sigma * std::log1p(-u);
  return sigma / gamma * (std::pow(1.0 - u, -gamma) - 1.0);
}

}  // namespace oracle
