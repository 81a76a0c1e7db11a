#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "themis/dataset_io.hpp"
#include "themis/embedding_store.hpp"

namespace themis::sim {

struct WindowRange {
  std::size_t first = 0;  // window index
  std::size_t count = 0;

  friend bool operator==(const WindowRange&, const WindowRange&) = default;
};

/// Consecutive, non-overlapping groups of B windows; the last may be short.
struct BatchPartition {
  std::size_t batch_size = 0;
  std::vector<WindowRange> batches;
};

BatchPartition partition_batches(const io::WindowPlan& plan, std::size_t batch_size);

/// Windowed absolute similarity matrix for one batch, stored densely in
/// float64 (row-major, exactly symmetric).
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t size, std::vector<double> entries, std::vector<std::uint8_t> zero_rows);

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * size_ + j]; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * size_, size_}; }
  std::span<const double> entries() const noexcept { return entries_; }

  /// Rows whose embedding norm fell below 1e-12; their off-diagonal entries are 0.
  bool is_zero_row(std::size_t i) const noexcept { return zero_rows_[i] != 0; }
  std::size_t zero_row_count() const noexcept;

  std::size_t batch_index = 0;
  std::vector<io::RowRef> row_to_timestep;

 private:
  std::size_t size_ = 0;
  std::vector<double> entries_;
  std::vector<std::uint8_t> zero_rows_;
};

inline constexpr double kZeroNormThreshold = 1e-12;

/// S[i,j] = |<z_i, z_j>| / (|z_i| |z_j|), clamped to [0, 1], diagonal 1.
/// `rows` holds m x dim floats row-major. Throws DegenerateBatch when m < 2.
SimilarityMatrix build_wasm(std::span<const float> rows, std::size_t dim);

/// Matrix for batch b of the partition, with row_to_timestep filled in.
SimilarityMatrix build_batch_wasm(const embed::EmbeddingSequence& embeddings, const io::WindowPlan& plan,
                                  const BatchPartition& partition, std::size_t batch);

/// Inspection dump in the THEM format: n = m*m, d = 1, tag "wasm-batch-<i>".
void dump_wasm(const SimilarityMatrix& s, const std::filesystem::path& path);

}  // namespace themis::sim
