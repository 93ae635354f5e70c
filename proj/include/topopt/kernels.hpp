#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace topopt::kernels {

/// Table of the data-parallel inner loops used by the solvers.
///
/// Every entry has a scalar reference implementation; vectorized variants
/// must agree with it to rounding (checked by the kernel equivalence tests).
/// Within one backend every kernel has a fixed accumulation order, so results
/// are reproducible run to run.
struct KernelTable {
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = alpha * x + beta * y
  void (*scale_add)(double alpha, const double* x, double beta, double* y, std::size_t n);
  /// sum_k values[k] * x[cols[k]]  (one CSR row against a dense vector)
  double (*gather_dot)(const double* values, const std::int32_t* cols, std::size_t n,
                       const double* x);
};

enum class Backend { automatic, scalar, avx2 };

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Kernel table used by the library. Resolved on first use from the
/// TOPOPT_KERNELS environment variable (scalar|avx2|auto, default auto).
const KernelTable& active();

/// Overrides the backend for the rest of the process. Throws
/// std::runtime_error if avx2 is requested but unavailable.
void select(Backend backend);

Backend parse_backend(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale_add(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  active().scale_add(alpha, x.data(), beta, y.data(), x.size());
}

double norm2(std::span<const double> a);

}  // namespace topopt::kernels
