#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "themis/dataset_io.hpp"

namespace themis::embed {

/// n x d row-major float matrix, one row per embedding position (pads included).
class EmbeddingSequence {
 public:
  EmbeddingSequence() = default;
  EmbeddingSequence(std::size_t rows, std::size_t dim, std::vector<float> values,
                    std::string source_tag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::span<const float> values() const noexcept { return values_; }

  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  /// Contiguous block of `count` rows starting at `first`.
  std::span<const float> block(std::size_t first, std::size_t count) const {
    return {values_.data() + first * dim_, count * dim_};
  }

  friend bool operator==(const EmbeddingSequence&, const EmbeddingSequence&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::string source_tag_;
};

// "THEM" v1 layout, all integers little-endian:
//   0  magic      "THEM"
//   4  version    u32 = 1
//   8  n          u64
//   16 d          u32
//   20 dtype      u8  = 1 (IEEE-754 binary32, little-endian)
//   21 reserved   3 bytes, zero
//   24 payload    n*d float32, row-major
//   .. trailer    u32 byte length + UTF-8 source tag
inline constexpr std::array<char, 4> kMagic{'T', 'H', 'E', 'M'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::size_t kHeaderBytes = 24;

struct EmbeddingFileHeader {
  std::array<char, 4> magic = kMagic;
  std::uint32_t version = kFormatVersion;
  std::uint64_t rows = 0;
  std::uint32_t dim = 0;
  std::uint8_t dtype_code = kDtypeFloat32;
  std::array<std::uint8_t, 3> reserved{};
};

std::array<std::uint8_t, kHeaderBytes> encode_header(const EmbeddingFileHeader& header);
EmbeddingFileHeader decode_header(std::span<const std::uint8_t, kHeaderBytes> bytes);

/// Payload size in bytes; throws DimensionOverflow when n*d*4 does not fit a file offset.
std::uint64_t payload_bytes(std::uint64_t rows, std::uint64_t dim);

void write_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path);
EmbeddingSequence read_embeddings(const std::filesystem::path& path);

/// Counter-based SplitMix64. Output i is mix(seed + (i + 1) * 0x9E3779B97F4A7C15)
/// with the standard SplitMix64 finalizer (shifts 30/27/31, multipliers
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) noexcept;

/// Uniform on (0, 1): ((u >> 11) + 0.5) * 2^-53.
double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept;

/// Standard normal for projection entry j via Box-Muller on counters 2j and 2j+1,
/// cosine branch only.
double normal_at(std::uint64_t seed, std::uint64_t entry) noexcept;

/// Dense w x d projection used by the reference embedder; entry (i, c) is
/// normal_at(seed, i*d + c) / sqrt(w).
std::vector<double> projection_matrix(std::size_t context, std::size_t dim, std::uint64_t seed);

/// Deterministic stand-in for a frozen encoder: for each plan row, take the
/// trailing context of length w ending at that position (clamped at both ends
/// of the series), z-normalize it (std floor 1e-8) and project it to d dims.
EmbeddingSequence reference_embed(const io::TimeSeries& series, const io::WindowPlan& plan,
                                  std::size_t context, std::size_t dim, std::uint64_t seed);

}  // namespace themis::embed
