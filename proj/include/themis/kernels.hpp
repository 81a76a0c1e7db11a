#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops of the similarity stage. Every kernel reads
// float32 storage and accumulates in float64. The scalar versions are the
// reference; vector versions are selected at runtime and must agree with the
// reference to within accumulation-order rounding.

namespace themis::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const float* a, const float* b, std::size_t n);
  double (*squared_norm)(const float* a, std::size_t n);
};

/// Best ISA supported by the running CPU and compiled into the binary.
Isa detected_isa() noexcept;
bool is_supported(Isa isa) noexcept;

/// Kernels in use. Initialised from detected_isa(), or from THEMIS_SIMD
/// (scalar|avx2|neon) when set.
const KernelTable& active() noexcept;
const KernelTable& table_for(Isa isa);
/// Switches the process-wide kernels; throws InvalidParameter if unsupported.
void select(Isa isa);

inline double dot(std::span<const float> a, std::span<const float> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double squared_norm(std::span<const float> a) { return active().squared_norm(a.data(), a.size()); }

namespace scalar {
double dot(const float* a, const float* b, std::size_t n);
double squared_norm(const float* a, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define THEMIS_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const float* a, const float* b, std::size_t n);
double squared_norm(const float* a, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define THEMIS_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const float* a, const float* b, std::size_t n);
double squared_norm(const float* a, std::size_t n);
}  // namespace neon
#endif

}  // namespace themis::simd
