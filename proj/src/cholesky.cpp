#include "topopt/cholesky.hpp"

#include <algorithm>
#include <cmath>

#include "topopt/kernels.hpp"

namespace topopt {

CholeskyFactor CholeskyFactor::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix must be square");
  CholeskyFactor f;
  const Index n = a.rows();
  f.n_ = n;
  f.first_.resize(n);
  f.start_.resize(static_cast<std::size_t>(n) + 1);
  f.start_[0] = 0;
  for (Index i = 0; i < n; ++i) {
    const auto cols = a.row_cols(i);
    const Index first = cols.empty() ? i : std::min(cols.front(), i);
    f.first_[i] = first;
    f.start_[i + 1] = f.start_[i] + static_cast<std::size_t>(i - first + 1);
  }
  f.values_.assign(f.start_[n], 0.0);
  for (Index i = 0; i < n; ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size() && cols[k] <= i; ++k) {
      f.values_[f.start_[i] + (cols[k] - f.first_[i])] = vals[k];
    }
  }

  const auto& kern = kernels::active();
  // Row-oriented (bordering) elimination: row i only touches rows j < i whose
  // envelopes overlap its own.
  for (Index i = 0; i < n; ++i) {
    double* row_i = f.values_.data() + f.start_[i];
    const Index fi = f.first_[i];
    for (Index j = fi; j < i; ++j) {
      const double* row_j = f.values_.data() + f.start_[j];
      const Index fj = f.first_[j];
      const Index lo = std::max(fi, fj);
      const double s = kern.dot(row_i + (lo - fi), row_j + (lo - fj), static_cast<std::size_t>(j - lo));
      row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
    }
    const double s = kern.dot(row_i, row_i, static_cast<std::size_t>(i - fi));
    const double pivot = row_i[i - fi] - s;
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw NotPositiveDefinite(i);
    row_i[i - fi] = std::sqrt(pivot);
  }
  return f;
}

void CholeskyFactor::solve_in_place(std::span<double> b) const {
  if (static_cast<Index>(b.size()) != n_) throw std::invalid_argument("cholesky solve: dimension mismatch");
  const auto& kern = kernels::active();
  for (Index i = 0; i < n_; ++i) {
    const double* row = values_.data() + start_[i];
    const Index fi = first_[i];
    const double s = kern.dot(row, b.data() + fi, static_cast<std::size_t>(i - fi));
    b[i] = (b[i] - s) / row[i - fi];
  }
  for (Index i = n_ - 1; i >= 0; --i) {
    const double* row = values_.data() + start_[i];
    const Index fi = first_[i];
    b[i] /= row[i - fi];
    kern.axpy(-b[i], row, b.data() + fi, static_cast<std::size_t>(i - fi));
  }
}

Vector CholeskyFactor::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

std::vector<double> CholeskyFactor::reconstruct_dense() const {
  const std::size_t n = static_cast<std::size_t>(n_);
  std::vector<double> lower(n * n, 0.0);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = first_[i]; j <= i; ++j) {
      lower[i * n + j] = values_[start_[i] + (j - first_[i])];
    }
  }
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) s += lower[i * n + k] * lower[j * n + k];
      dense[i * n + j] = s;
    }
  }
  return dense;
}

}  // namespace topopt
