#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "topopt/sparse.hpp"

namespace topopt {

class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(Index pivot)
      : std::runtime_error("matrix not positive definite (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  Index pivot() const { return pivot_; }

 private:
  Index pivot_;
};

/// Envelope (skyline) Cholesky factor L with A = L L^T, in the natural
/// ordering. Row i of L is stored from its first nonzero column of A up to the
/// diagonal, so fill stays inside the profile of A.
class CholeskyFactor {
 public:
  /// Reads only the lower triangle of `a`. Throws NotPositiveDefinite with the
  /// offending pivot index.
  static CholeskyFactor factor(const SparseMatrix& a);

  Index dimension() const { return n_; }
  std::size_t stored_entries() const { return values_.size(); }

  void solve_in_place(std::span<double> b) const;
  Vector solve(std::span<const double> b) const;

  /// Row-major dense L L^T.
  std::vector<double> reconstruct_dense() const;

 private:
  Index n_ = 0;
  std::vector<Index> first_;          // first stored column of row i
  std::vector<std::size_t> start_;    // offset of L(i, first_[i]) in values_
  std::vector<double> values_;
};

inline CholeskyFactor cholesky_factor(const SparseMatrix& a) { return CholeskyFactor::factor(a); }

}  // namespace topopt
