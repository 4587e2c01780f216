#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "fairrank/kernels.hpp"

namespace fairrank::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void m_update_neon(double* m, const double* ms, const double* v, const double* lambda, const double* xw,
                   double rho, double gamma, std::size_t n) {
  const double denom = rho + gamma;
  const float64x2_t vrho = vdupq_n_f64(rho);
  const float64x2_t vgamma = vdupq_n_f64(gamma);
  const float64x2_t vdenom = vdupq_n_f64(denom);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t pull = vmulq_f64(vrho, vsubq_f64(vld1q_f64(ms + i), vld1q_f64(v + i)));
    const float64x2_t t = vsubq_f64(pull, vld1q_f64(lambda + i));
    const float64x2_t u = vmulq_f64(vgamma, vld1q_f64(xw + i));
    vst1q_f64(m + i, vdivq_f64(vaddq_f64(t, u), vdenom));
  }
  for (; i < n; ++i) {
    const double pull = rho * (ms[i] - v[i]);
    m[i] = ((pull - lambda[i]) + gamma * xw[i]) / denom;
  }
}

void lambda_update_neon(double* lambda, const double* xw, const double* m, double theta, std::size_t n) {
  const float64x2_t vtheta = vdupq_n_f64(theta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vsubq_f64(vld1q_f64(xw + i), vld1q_f64(m + i));
    vst1q_f64(lambda + i, vsubq_f64(vld1q_f64(lambda + i), vmulq_f64(vtheta, r)));
  }
  for (; i < n; ++i) lambda[i] = lambda[i] - theta * (xw[i] - m[i]);
}

double pairwise_wins_neon(const double* a, std::size_t na, const double* b, std::size_t nb) {
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t half = vdupq_n_f64(0.5);
  float64x2_t acc = vdupq_n_f64(0.0);
  double tail = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const float64x2_t ai = vdupq_n_f64(a[i]);
    std::size_t j = 0;
    for (; j + 2 <= nb; j += 2) {
      const float64x2_t bj = vld1q_f64(b + j);
      const float64x2_t gt = vreinterpretq_f64_u64(vandq_u64(vcgtq_f64(ai, bj), vreinterpretq_u64_f64(one)));
      const float64x2_t eq = vreinterpretq_f64_u64(vandq_u64(vceqq_f64(ai, bj), vreinterpretq_u64_f64(half)));
      acc = vaddq_f64(acc, vaddq_f64(gt, eq));
    }
    for (; j < nb; ++j) {
      if (a[i] > b[j]) {
        tail += 1.0;
      } else if (a[i] == b[j]) {
        tail += 0.5;
      }
    }
  }
  return vaddvq_f64(acc) + tail;
}

constexpr KernelTable kNeon{
    Isa::Neon,        dot_neon,           sum_squares_neon,  squared_distance_neon, max_abs_diff_neon,
    m_update_neon,    lambda_update_neon, pairwise_wins_neon,
};

}  // namespace

const KernelTable* detail::neon_table() { return &kNeon; }

}  // namespace fairrank::kernels
