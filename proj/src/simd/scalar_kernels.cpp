#include "tvcap/simd.hpp"

namespace tvcap::simd::scalar {

// Four partial sums in the same lane order as the 256-bit variant, so the
// two reductions differ only in the final horizontal add.
double dot(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) acc[lane] += a[i + lane] * b[i + lane];
  }
  double sum = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void curl_e(double* h, const double* e, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) h[i] -= s * (e[i + 1] - e[i]);
}

void curl_h(double* d, const double* h, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] -= s * (h[i] - h[i - 1]);
}

void multiply(double* out, const double* in, const double* factor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * factor[i];
}

}  // namespace tvcap::simd::scalar
