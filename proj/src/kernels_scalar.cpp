#include "topopt/kernels.hpp"

namespace topopt::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_add_scalar(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

double gather_dot_scalar(const double* values, const std::int32_t* cols, std::size_t n,
                         const double* x) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += values[k] * x[cols[k]];
  return sum;
}

constexpr KernelTable kScalar{"scalar", dot_scalar, axpy_scalar, scale_add_scalar,
                              gather_dot_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace topopt::kernels
