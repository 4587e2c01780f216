#include <atomic>
#include <cstdlib>
#include <string>

#include "fairrank/error.hpp"
#include "fairrank/kernels.hpp"

namespace fairrank::kernels {

#ifndef FAIRRANK_HAVE_AVX2
const KernelTable* detail::avx2_table() { return nullptr; }
#endif
#ifndef FAIRRANK_HAVE_NEON
const KernelTable* detail::neon_table() { return nullptr; }
#endif

namespace {

const KernelTable* lookup(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::scalar_table();
    case Isa::Avx2:
#if defined(FAIRRANK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") ? detail::avx2_table() : nullptr;
#else
      return nullptr;
#endif
    case Isa::Neon:
      return detail::neon_table();
  }
  return nullptr;
}

const KernelTable* select_default() {
  if (const char* env = std::getenv("FAIRRANK_ISA")) {
    const std::string want(env);
    if (want == "scalar") return lookup(Isa::Scalar);
    if (want == "avx2" && lookup(Isa::Avx2)) return lookup(Isa::Avx2);
    if (want == "neon" && lookup(Isa::Neon)) return lookup(Isa::Neon);
  }
  if (auto* t = lookup(Isa::Avx2)) return t;
  if (auto* t = lookup(Isa::Neon)) return t;
  return lookup(Isa::Scalar);
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

bool available(Isa isa) { return lookup(isa) != nullptr; }

const KernelTable& table(Isa isa) {
  const KernelTable* t = lookup(isa);
  if (t == nullptr) throw ConfigError("kernel variant '" + std::string(name(isa)) + "' is not available");
  return *t;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void force(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace fairrank::kernels
