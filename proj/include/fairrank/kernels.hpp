#pragma once

// Data-parallel inner loops of the solver. Each kernel has a scalar reference
// implementation plus vectorized variants (AVX2 on x86-64, NEON on AArch64);
// the variant is picked once at runtime from the host CPU and can be pinned
// with the FAIRRANK_ISA environment variable (scalar | avx2 | neon).
//
// Element-wise kernels are bit-identical across variants. Reductions (dot,
// sum_squares, squared_distance) differ only by summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace fairrank::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  // m = (rho * (ms - v) - lambda + gamma * xw) / (rho + gamma)
  void (*m_update)(double* m, const double* ms, const double* v, const double* lambda, const double* xw,
                   double rho, double gamma, std::size_t n);
  // lambda -= theta * (xw - m)
  void (*lambda_update)(double* lambda, const double* xw, const double* m, double theta, std::size_t n);
  // sum over (i, j) of [a_i > b_j] + 0.5 [a_i == b_j]
  double (*pairwise_wins)(const double* a, std::size_t na, const double* b, std::size_t nb);
};

std::string_view name(Isa isa);

/// True when the variant is compiled in and supported by this CPU.
bool available(Isa isa);

/// Kernel table of a specific variant; throws ConfigError when unavailable.
const KernelTable& table(Isa isa);

/// Table used by the library.
const KernelTable& active();

/// Pins the active variant (tests and benchmarks).
void force(Isa isa);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum_squares(std::span<const double> a) { return active().sum_squares(a.data(), a.size()); }
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active().max_abs_diff(a.data(), b.data(), a.size());
}
inline double pairwise_wins(std::span<const double> a, std::span<const double> b) {
  return active().pairwise_wins(a.data(), a.size(), b.data(), b.size());
}

}  // namespace fairrank::kernels
