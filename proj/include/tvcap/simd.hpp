#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the convolutions and the FDTD stepper.
// Every kernel has a scalar reference implementation; wider variants must
// reproduce it (bit-exactly for the elementwise kernels, to rounding for
// reductions) and are selected once at runtime from the CPU features.

namespace tvcap::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // h[i] -= s * (e[i + 1] - e[i]),  i in [0, n)
  void (*curl_e)(double* h, const double* e, double s, std::size_t n);
  // d[i] -= s * (h[i] - h[i - 1]),  i in [0, n); h[-1] must be readable
  void (*curl_h)(double* d, const double* h, double s, std::size_t n);
  // out[i] = in[i] * factor[i]
  void (*multiply)(double* out, const double* in, const double* factor, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void curl_e(double* h, const double* e, double s, std::size_t n);
void curl_h(double* d, const double* h, double s, std::size_t n);
void multiply(double* out, const double* in, const double* factor, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void curl_e(double* h, const double* e, double s, std::size_t n);
void curl_h(double* d, const double* h, double s, std::size_t n);
void multiply(double* out, const double* in, const double* factor, std::size_t n);
}  // namespace avx2

// Best ISA the running CPU (and this build) supports.
Isa detected_isa();

// ISA used by kernels(). Starts at detected_isa() unless the TVCAP_SIMD
// environment variable names another one ("scalar", "avx2").
Isa active_isa();

// Throws Errc::invalid_argument if the ISA is not available here.
void set_active_isa(Isa isa);

bool is_available(Isa isa);

const KernelTable& kernels();
const KernelTable& kernels(Isa isa);

}  // namespace tvcap::simd
