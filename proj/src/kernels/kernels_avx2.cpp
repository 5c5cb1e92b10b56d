#include <immintrin.h>

#include <cmath>

#include "senssolve/kernels.hpp"

namespace senssolve::kernels::avx2 {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    i += 4;
  }
  double total = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) total += x[i];
  return total;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double total = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

// Elementwise; matches the scalar reference bit for bit.
void penalize(const double* x, double gamma, double* out, std::size_t n) {
  const double denom_s = 1.0 + gamma;
  const __m256d denom = _mm256_set1_pd(denom_s);
  const __m256d up = _mm256_set1_pd(2.0);
  const __m256d down = _mm256_set1_pd(2.0 * gamma);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d nonneg = _mm256_cmp_pd(v, zero, _CMP_GE_OQ);
    const __m256d factor = _mm256_blendv_pd(down, up, nonneg);
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_mul_pd(v, factor), denom));
  }
  for (; i < n; ++i) out[i] = (x[i] * (x[i] >= 0.0 ? 2.0 : 2.0 * gamma)) / denom_s;
}

double residual_ss(const double* y, const double* q, double beta, std::size_t n) {
  const __m256d b = _mm256_set1_pd(beta);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d r0 = _mm256_fnmadd_pd(b, _mm256_loadu_pd(q + i), _mm256_loadu_pd(y + i));
    const __m256d r1 = _mm256_fnmadd_pd(b, _mm256_loadu_pd(q + i + 4), _mm256_loadu_pd(y + i + 4));
    acc0 = _mm256_fmadd_pd(r0, r0, acc0);
    acc1 = _mm256_fmadd_pd(r1, r1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d r0 = _mm256_fnmadd_pd(b, _mm256_loadu_pd(q + i), _mm256_loadu_pd(y + i));
    acc0 = _mm256_fmadd_pd(r0, r0, acc0);
    i += 4;
  }
  double total = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double r = y[i] - beta * q[i];
    total += r * r;
  }
  return total;
}

// Elementwise; matches the scalar reference bit for bit.
void leverage_scale(const double* y, const double* h, double scale, double* out, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d num = _mm256_mul_pd(s, _mm256_loadu_pd(y + i));
    const __m256d root = _mm256_sqrt_pd(_mm256_sub_pd(one, _mm256_loadu_pd(h + i)));
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, root));
  }
  for (; i < n; ++i) out[i] = scale * y[i] / std::sqrt(1.0 - h[i]);
}

}  // namespace senssolve::kernels::avx2
