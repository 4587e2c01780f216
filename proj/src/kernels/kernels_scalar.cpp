#include <algorithm>
#include <cmath>

#include "fairrank/kernels.hpp"

namespace fairrank::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void m_update_scalar(double* m, const double* ms, const double* v, const double* lambda, const double* xw,
                     double rho, double gamma, std::size_t n) {
  const double denom = rho + gamma;
  for (std::size_t i = 0; i < n; ++i) {
    const double pull = rho * (ms[i] - v[i]);
    m[i] = ((pull - lambda[i]) + gamma * xw[i]) / denom;
  }
}

void lambda_update_scalar(double* lambda, const double* xw, const double* m, double theta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) lambda[i] = lambda[i] - theta * (xw[i] - m[i]);
}

double pairwise_wins_scalar(const double* a, std::size_t na, const double* b, std::size_t nb) {
  double wins = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (a[i] > b[j]) {
        wins += 1.0;
      } else if (a[i] == b[j]) {
        wins += 0.5;
      }
    }
  }
  return wins;
}

constexpr KernelTable kScalar{
    Isa::Scalar,          dot_scalar,      sum_squares_scalar,   squared_distance_scalar, max_abs_diff_scalar,
    m_update_scalar,      lambda_update_scalar, pairwise_wins_scalar,
};

}  // namespace

const KernelTable& detail::scalar_table() { return kScalar; }

}  // namespace fairrank::kernels
