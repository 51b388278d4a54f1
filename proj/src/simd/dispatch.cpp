#include <atomic>
#include <cstdlib>
#include <string>

#include "tvcap/error.hpp"
#include "tvcap/simd.hpp"

namespace tvcap::simd {

namespace {

constexpr KernelTable scalar_table{&scalar::dot, &scalar::curl_e, &scalar::curl_h, &scalar::multiply};

#if defined(TVCAP_HAVE_AVX2_TU)
constexpr KernelTable avx2_table{&avx2::dot, &avx2::curl_e, &avx2::curl_h, &avx2::multiply};
#endif

bool cpu_has_avx2() {
#if defined(TVCAP_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  Isa isa = detected_isa();
  if (const char* env = std::getenv("TVCAP_SIMD")) {
    const std::string name(env);
    if (name == "scalar") isa = Isa::scalar;
    else if (name == "avx2" && is_available(Isa::avx2)) isa = Isa::avx2;
  }
  return isa;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool is_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa detected_isa() { return is_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  require(is_available(isa), Errc::invalid_argument,
          "SIMD variant " + std::string(to_string(isa)) + " is not available on this CPU");
  active().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels(Isa isa) {
#if defined(TVCAP_HAVE_AVX2_TU)
  if (isa == Isa::avx2 && is_available(Isa::avx2)) return avx2_table;
#endif
  (void)isa;
  return scalar_table;
}

const KernelTable& kernels() { return kernels(active_isa()); }

}  // namespace tvcap::simd
