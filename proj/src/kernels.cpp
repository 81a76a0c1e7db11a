#include "themis/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "themis/error.hpp"

namespace themis::simd {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::dot, &scalar::squared_norm};
#ifdef THEMIS_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::dot, &avx2::squared_norm};
#endif
#ifdef THEMIS_HAVE_NEON_KERNELS
constexpr KernelTable kNeon{Isa::Neon, &neon::dot, &neon::squared_norm};
#endif

Isa parse_isa(std::string_view text) {
  if (text == "scalar") return Isa::Scalar;
  if (text == "avx2") return Isa::Avx2;
  if (text == "neon") return Isa::Neon;
  throw Error(ErrorCode::InvalidParameter, "unknown SIMD level '" + std::string(text) + "'");
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("THEMIS_SIMD"); env != nullptr && *env != '\0') {
    return &table_for(parse_isa(env));
  }
  return &table_for(detected_isa());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool is_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#ifdef THEMIS_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#ifdef THEMIS_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  if (is_supported(Isa::Avx2)) return Isa::Avx2;
  if (is_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

const KernelTable& table_for(Isa isa) {
  if (!is_supported(isa)) {
    throw Error(ErrorCode::InvalidParameter, std::string(to_string(isa)) + " kernels unavailable on this CPU");
  }
  switch (isa) {
#ifdef THEMIS_HAVE_AVX2_KERNELS
    case Isa::Avx2: return kAvx2;
#endif
#ifdef THEMIS_HAVE_NEON_KERNELS
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table_for(isa), std::memory_order_release); }

}  // namespace themis::simd
