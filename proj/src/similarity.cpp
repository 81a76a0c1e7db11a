#include "themis/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "themis/error.hpp"
#include "themis/kernels.hpp"

namespace themis::sim {

BatchPartition partition_batches(const io::WindowPlan& plan, std::size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorCode::InvalidParameter, "batch size must be >= 1");
  BatchPartition partition;
  partition.batch_size = batch_size;
  for (std::size_t first = 0; first < plan.window_count(); first += batch_size) {
    partition.batches.push_back({first, std::min(batch_size, plan.window_count() - first)});
  }
  return partition;
}

SimilarityMatrix::SimilarityMatrix(std::size_t size, std::vector<double> entries,
                                   std::vector<std::uint8_t> zero_rows)
    : size_(size), entries_(std::move(entries)), zero_rows_(std::move(zero_rows)) {
  if (entries_.size() != size_ * size_ || zero_rows_.size() != size_) {
    throw Error(ErrorCode::InvalidParameter, "similarity matrix shape mismatch");
  }
}

std::size_t SimilarityMatrix::zero_row_count() const noexcept {
  return static_cast<std::size_t>(std::count(zero_rows_.begin(), zero_rows_.end(), std::uint8_t{1}));
}

SimilarityMatrix build_wasm(std::span<const float> rows, std::size_t dim) {
  if (dim == 0 || rows.size() % dim != 0) throw Error(ErrorCode::InvalidParameter, "row buffer is not m x d");
  const std::size_t m = rows.size() / dim;
  if (m < 2) throw Error(ErrorCode::DegenerateBatch, "a batch needs at least 2 rows, got " + std::to_string(m));

  const auto& k = simd::active();
  std::vector<double> norms(m);
  std::vector<std::uint8_t> zero(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    norms[i] = std::sqrt(k.squared_norm(rows.data() + i * dim, dim));
    zero[i] = norms[i] < kZeroNormThreshold ? 1 : 0;
  }

  std::vector<double> s(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    s[i * m + i] = 1.0;
    if (zero[i]) continue;
    const float* zi = rows.data() + i * dim;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (zero[j]) continue;
      const double c = std::abs(k.dot(zi, rows.data() + j * dim, dim)) / (norms[i] * norms[j]);
      const double v = std::min(c, 1.0);
      s[i * m + j] = v;
      s[j * m + i] = v;
    }
  }
  return {m, std::move(s), std::move(zero)};
}

SimilarityMatrix build_batch_wasm(const embed::EmbeddingSequence& embeddings, const io::WindowPlan& plan,
                                  const BatchPartition& partition, std::size_t batch) {
  if (embeddings.rows() != plan.total_rows()) {
    throw Error(ErrorCode::PartitionMismatch, "embedding file holds " + std::to_string(embeddings.rows()) +
                                                  " rows but the window plan needs " +
                                                  std::to_string(plan.total_rows()));
  }
  const auto& range = partition.batches.at(batch);
  const auto first = plan.first_row(range.first);
  const auto count = plan.first_row(range.first + range.count) - first;
  auto s = build_wasm(embeddings.block(first, count), embeddings.dim());
  s.batch_index = batch;
  s.row_to_timestep = plan.row_refs(range.first, range.count);
  return s;
}

void dump_wasm(const SimilarityMatrix& s, const std::filesystem::path& path) {
  std::vector<float> values(s.entries().begin(), s.entries().end());
  embed::write_embeddings({s.size() * s.size(), 1, std::move(values), "wasm-batch-" + std::to_string(s.batch_index)},
                          path);
}

}  // namespace themis::sim
