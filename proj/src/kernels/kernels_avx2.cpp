// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "fairrank/kernels.hpp"

namespace fairrank::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void m_update_avx2(double* m, const double* ms, const double* v, const double* lambda, const double* xw,
                   double rho, double gamma, std::size_t n) {
  const double denom = rho + gamma;
  const __m256d vrho = _mm256_set1_pd(rho);
  const __m256d vgamma = _mm256_set1_pd(gamma);
  const __m256d vdenom = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pull = _mm256_mul_pd(vrho, _mm256_sub_pd(_mm256_loadu_pd(ms + i), _mm256_loadu_pd(v + i)));
    const __m256d t = _mm256_sub_pd(pull, _mm256_loadu_pd(lambda + i));
    const __m256d u = _mm256_mul_pd(vgamma, _mm256_loadu_pd(xw + i));
    _mm256_storeu_pd(m + i, _mm256_div_pd(_mm256_add_pd(t, u), vdenom));
  }
  for (; i < n; ++i) {
    const double pull = rho * (ms[i] - v[i]);
    m[i] = ((pull - lambda[i]) + gamma * xw[i]) / denom;
  }
}

void lambda_update_avx2(double* lambda, const double* xw, const double* m, double theta, std::size_t n) {
  const __m256d vtheta = _mm256_set1_pd(theta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(xw + i), _mm256_loadu_pd(m + i));
    _mm256_storeu_pd(lambda + i, _mm256_sub_pd(_mm256_loadu_pd(lambda + i), _mm256_mul_pd(vtheta, r)));
  }
  for (; i < n; ++i) lambda[i] = lambda[i] - theta * (xw[i] - m[i]);
}

double pairwise_wins_avx2(const double* a, std::size_t na, const double* b, std::size_t nb) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const __m256d ai = _mm256_set1_pd(a[i]);
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      const __m256d bj = _mm256_loadu_pd(b + j);
      const __m256d gt = _mm256_and_pd(_mm256_cmp_pd(ai, bj, _CMP_GT_OQ), one);
      const __m256d eq = _mm256_and_pd(_mm256_cmp_pd(ai, bj, _CMP_EQ_OQ), half);
      acc = _mm256_add_pd(acc, _mm256_add_pd(gt, eq));
    }
    for (; j < nb; ++j) {
      if (a[i] > b[j]) {
        tail += 1.0;
      } else if (a[i] == b[j]) {
        tail += 0.5;
      }
    }
  }
  return hsum(acc) + tail;
}

constexpr KernelTable kAvx2{
    Isa::Avx2,        dot_avx2,           sum_squares_avx2,  squared_distance_avx2, max_abs_diff_avx2,
    m_update_avx2,    lambda_update_avx2, pairwise_wins_avx2,
};

}  // namespace

const KernelTable* detail::avx2_table() { return &kAvx2; }

}  // namespace fairrank::kernels
