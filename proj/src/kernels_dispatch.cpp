#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "topopt/kernels.hpp"

namespace topopt::kernels {

#if defined(TOPOPT_HAVE_AVX2)
namespace detail {
const KernelTable* avx2_table_impl();
}
#endif

namespace {

bool cpu_has_avx2_fma() {
#if defined(TOPOPT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& resolve(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return scalar_table();
    case Backend::avx2:
      if (const KernelTable* t = avx2_table()) return *t;
      throw std::runtime_error("avx2 kernels unavailable on this build or CPU");
    case Backend::automatic:
      break;
  }
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

const KernelTable& from_environment() {
  const char* env = std::getenv("TOPOPT_KERNELS");
  return resolve(env ? parse_backend(env) : Backend::automatic);
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable* avx2_table() {
#if defined(TOPOPT_HAVE_AVX2)
  static const bool supported = cpu_has_avx2_fma();
  return supported ? detail::avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "auto" || name.empty()) return Backend::automatic;
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "'");
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &from_environment();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Backend backend) { g_active.store(&resolve(backend), std::memory_order_release); }

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace topopt::kernels
