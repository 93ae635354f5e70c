#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace topopt {

using Index = std::int32_t;
using Vector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-row sparse matrix.
///
/// Column indices are strictly increasing within each row and duplicates are
/// never stored. Instances are immutable once built; all operators (stiffness,
/// augmented systems, prolongations, filters) use this container.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Takes ownership of raw CSR arrays. Throws std::invalid_argument when the
  /// arrays violate the CSR invariants.
  SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  /// Duplicate (row, col) entries are summed. Explicit zeros are kept.
  static SparseMatrix from_triplets(Index nrows, Index ncols, std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix zero(Index nrows, Index ncols);
  /// Row-major dense input; entries with |a| == 0 are dropped.
  static SparseMatrix from_dense(Index nrows, Index ncols, std::span<const double> dense);

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const Index> row_cols(Index i) const {
    return {col_indices_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }

  /// Stored value or 0.
  double at(Index i, Index j) const;

  /// Diagonal entries (0 where not stored).
  Vector diagonal() const;

  /// |A_ij - A_ji| <= tol * max(1, |A_ij|) over all stored entries.
  bool is_symmetric(double tol = 1e-12) const;

  /// Row-major dense copy, for tests and tiny systems.
  std::vector<double> to_dense() const;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// out = A v
void spmv(const SparseMatrix& a, std::span<const double> v, std::span<double> out);
Vector spmv(const SparseMatrix& a, std::span<const double> v);

/// out = A^T v
Vector spmv_transpose(const SparseMatrix& a, std::span<const double> v);

SparseMatrix transpose(const SparseMatrix& a);

/// Sparse product A B (Gustavson, rows assembled in column order).
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// alpha A + beta B; the sparsity pattern is the union of both patterns.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);

/// A diag(d)
SparseMatrix scale_columns(const SparseMatrix& a, std::span<const double> d);

enum class SweepDirection { forward, backward };

/// One in-place Gauss-Seidel sweep for A z = b.
///
/// Throws std::domain_error("smoother requires nonzero diagonal") if a
/// diagonal entry is zero or missing.
void gauss_seidel_sweep(const SparseMatrix& a, std::span<const double> b, std::span<double> z,
                        SweepDirection direction);

/// Same sweep with a precomputed diagonal (the multigrid smoother caches it).
void gauss_seidel_sweep(const SparseMatrix& a, std::span<const double> diagonal,
                        std::span<const double> b, std::span<double> z, SweepDirection direction);

/// Matrix Market coordinate format ("%%MatrixMarket matrix coordinate real general").
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace topopt
