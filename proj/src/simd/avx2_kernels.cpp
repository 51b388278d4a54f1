// Compiled with -mavx2. Only reached through the dispatcher after a CPU
// feature check. No FMA: results must match the scalar kernels bit for bit.

#include <immintrin.h>

#include "tvcap/simd.hpp"

namespace tvcap::simd::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  // (acc0 + acc2) + (acc1 + acc3), same association as the scalar kernel
  const __m128d pair = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void curl_e(double* h, const double* e, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(e + i + 1), _mm256_loadu_pd(e + i));
    _mm256_storeu_pd(h + i, _mm256_sub_pd(_mm256_loadu_pd(h + i), _mm256_mul_pd(vs, diff)));
  }
  for (; i < n; ++i) h[i] -= s * (e[i + 1] - e[i]);
}

void curl_h(double* d, const double* h, double s, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(h + i), _mm256_loadu_pd(h + i - 1));
    _mm256_storeu_pd(d + i, _mm256_sub_pd(_mm256_loadu_pd(d + i), _mm256_mul_pd(vs, diff)));
  }
  for (; i < n; ++i) d[i] -= s * (h[i] - h[i - 1]);
}

void multiply(double* out, const double* in, const double* factor, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(in + i), _mm256_loadu_pd(factor + i)));
  }
  for (; i < n; ++i) out[i] = in[i] * factor[i];
}

}  // namespace tvcap::simd::avx2
