#include <immintrin.h>

#include <cmath>
#include <limits>

#include "fluidnet/kernels.hpp"

namespace fluidnet::kernels::avx2 {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, hi));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, hi));
}

void accumulate_abs_diff(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += std::fabs(a[i] - b[i]);
}

void accumulate_abs(const double* a, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = abs_pd(_mm256_loadu_pd(a + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += std::fabs(a[i]);
}

double max_value(const double* a, std::size_t n) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  __m256d m = _mm256_set1_pd(neg_inf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(a + i));
  double r = hmax(m);
  for (; i < n; ++i) r = a[i] > r ? a[i] : r;
  return r;
}

double trapezoid(const double* t, const double* y, std::size_t n) {
  if (n < 2) return 0.0;
  const std::size_t m = n - 1;  // number of intervals
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d dt = _mm256_sub_pd(_mm256_loadu_pd(t + i + 1), _mm256_loadu_pd(t + i));
    const __m256d sy = _mm256_add_pd(_mm256_loadu_pd(y + i + 1), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(dt, sy, acc);
  }
  double s = 0.5 * hsum(acc);
  for (; i < m; ++i) s += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return s;
}

double max_ratio(const double* num, const double* den, std::size_t n, double min_den) {
  __m256d m = _mm256_setzero_pd();
  const __m256d floor = _mm256_set1_pd(min_den);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_loadu_pd(den + i);
    const __m256d ok = _mm256_cmp_pd(d, floor, _CMP_GT_OQ);
    const __m256d safe_d = _mm256_blendv_pd(one, d, ok);
    const __m256d r = _mm256_and_pd(_mm256_div_pd(_mm256_loadu_pd(num + i), safe_d), ok);
    m = _mm256_max_pd(m, r);
  }
  double r = hmax(m);
  for (; i < n; ++i) {
    if (den[i] > min_den) {
      const double q = num[i] / den[i];
      r = q > r ? q : r;
    }
  }
  return r;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable kTable{accumulate_abs_diff, accumulate_abs, max_value, trapezoid, max_ratio, axpy};

}  // namespace fluidnet::kernels::avx2
