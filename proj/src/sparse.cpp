#include "topopt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "topopt/kernels.hpp"

namespace topopt {

namespace {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

SparseMatrix::SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require(nrows >= 0 && ncols >= 0, "negative matrix dimension");
  require(row_offsets_.size() == static_cast<std::size_t>(nrows) + 1, "row_offsets size != nrows+1");
  require(row_offsets_.front() == 0, "row_offsets must start at 0");
  require(col_indices_.size() == values_.size(), "col_indices/values size mismatch");
  require(static_cast<std::size_t>(row_offsets_.back()) == values_.size(),
          "last row offset must equal number of stored values");
  for (Index i = 0; i < nrows; ++i) {
    require(row_offsets_[i] <= row_offsets_[i + 1], "row_offsets must be nondecreasing");
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      require(col_indices_[k] >= 0 && col_indices_[k] < ncols, "column index out of range");
      if (k > row_offsets_[i]) {
        require(col_indices_[k - 1] < col_indices_[k],
                "column indices must be strictly increasing within a row");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index nrows, Index ncols, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    require(t.row >= 0 && t.row < nrows && t.col >= 0 && t.col < ncols,
            "triplet index out of range");
  }
  // Stable so duplicates are summed in insertion order.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(static_cast<std::size_t>(nrows) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
  }
  for (Index i = 0; i < nrows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> offsets(static_cast<std::size_t>(n) + 1);
  std::vector<Index> cols(n);
  for (Index i = 0; i <= n; ++i) offsets[i] = i;
  for (Index i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), Vector(n, 1.0));
}

SparseMatrix SparseMatrix::zero(Index nrows, Index ncols) {
  return SparseMatrix(nrows, ncols, std::vector<Index>(static_cast<std::size_t>(nrows) + 1, 0), {},
                      {});
}

SparseMatrix SparseMatrix::from_dense(Index nrows, Index ncols, std::span<const double> dense) {
  require(dense.size() == static_cast<std::size_t>(nrows) * ncols, "dense size mismatch");
  std::vector<Index> offsets(static_cast<std::size_t>(nrows) + 1, 0);
  std::vector<Index> cols;
  Vector vals;
  for (Index i = 0; i < nrows; ++i) {
    for (Index j = 0; j < ncols; ++j) {
      const double v = dense[static_cast<std::size_t>(i) * ncols + j];
      if (v != 0.0) {
        cols.push_back(j);
        vals.push_back(v);
      }
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(Index i, Index j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + (it - cols.begin())];
}

Vector SparseMatrix::diagonal() const {
  const Index n = std::min(nrows_, ncols_);
  Vector d(n, 0.0);
  for (Index i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (nrows_ != ncols_) return false;
  for (Index i = 0; i < nrows_; ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double aij = vals[k];
      const double aji = at(cols[k], i);
      if (std::abs(aij - aji) > tol * std::max(1.0, std::abs(aij))) return false;
    }
  }
  return true;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(nrows_) * ncols_, 0.0);
  for (Index i = 0; i < nrows_; ++i) {
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      dense[static_cast<std::size_t>(i) * ncols_ + col_indices_[k]] = values_[k];
    }
  }
  return dense;
}

void spmv(const SparseMatrix& a, std::span<const double> v, std::span<double> out) {
  if (static_cast<Index>(v.size()) != a.cols() || static_cast<Index>(out.size()) != a.rows()) {
    throw std::invalid_argument("spmv: dimension mismatch");
  }
  const auto& k = kernels::active();
  const auto offsets = a.row_offsets();
  const Index* cols = a.col_indices().data();
  const double* vals = a.values().data();
  for (Index i = 0; i < a.rows(); ++i) {
    const Index begin = offsets[i];
    out[i] = k.gather_dot(vals + begin, cols + begin, offsets[i + 1] - begin, v.data());
  }
}

Vector spmv(const SparseMatrix& a, std::span<const double> v) {
  Vector out(a.rows());
  spmv(a, v, out);
  return out;
}

Vector spmv_transpose(const SparseMatrix& a, std::span<const double> v) {
  if (static_cast<Index>(v.size()) != a.rows()) {
    throw std::invalid_argument("spmv_transpose: dimension mismatch");
  }
  Vector out(a.cols(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] += vals[k] * v[i];
  }
  return out;
}

SparseMatrix transpose(const SparseMatrix& a) {
  std::vector<Index> offsets(static_cast<std::size_t>(a.cols()) + 1, 0);
  for (Index c : a.col_indices()) ++offsets[c + 1];
  for (Index j = 0; j < a.cols(); ++j) offsets[j + 1] += offsets[j];
  std::vector<Index> cols(a.nnz());
  Vector vals(a.nnz());
  std::vector<Index> next(offsets.begin(), offsets.end() - 1);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto rc = a.row_cols(i);
    const auto rv = a.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const Index dst = next[rc[k]]++;
      cols[dst] = i;
      vals[dst] = rv[k];
    }
  }
  return SparseMatrix(a.cols(), a.rows(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  std::vector<Index> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> cols;
  Vector vals;
  std::vector<Index> marker(b.cols(), -1);
  Vector accum(b.cols(), 0.0);
  std::vector<Index> row_pattern;
  for (Index i = 0; i < a.rows(); ++i) {
    row_pattern.clear();
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    for (std::size_t p = 0; p < ac.size(); ++p) {
      const auto bc = b.row_cols(ac[p]);
      const auto bv = b.row_values(ac[p]);
      for (std::size_t q = 0; q < bc.size(); ++q) {
        const Index j = bc[q];
        if (marker[j] != i) {
          marker[j] = i;
          accum[j] = 0.0;
          row_pattern.push_back(j);
        }
        accum[j] += av[p] * bv[q];
      }
    }
    std::sort(row_pattern.begin(), row_pattern.end());
    for (Index j : row_pattern) {
      cols.push_back(j);
      vals.push_back(accum[j]);
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: dimension mismatch");
  }
  std::vector<Index> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> cols;
  Vector vals;
  cols.reserve(std::max(a.nnz(), b.nnz()));
  vals.reserve(std::max(a.nnz(), b.nnz()));
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_cols(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0;
    std::size_t q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        cols.push_back(ac[p]);
        vals.push_back(alpha * av[p++]);
      } else if (p == ac.size() || bc[q] < ac[p]) {
        cols.push_back(bc[q]);
        vals.push_back(beta * bv[q++]);
      } else {
        cols.push_back(ac[p]);
        vals.push_back(alpha * av[p++] + beta * bv[q++]);
      }
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix scale_columns(const SparseMatrix& a, std::span<const double> d) {
  if (static_cast<Index>(d.size()) != a.cols()) {
    throw std::invalid_argument("scale_columns: dimension mismatch");
  }
  Vector vals(a.values().begin(), a.values().end());
  const auto cols = a.col_indices();
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] *= d[cols[k]];
  return SparseMatrix(a.rows(), a.cols(), {a.row_offsets().begin(), a.row_offsets().end()},
                      {cols.begin(), cols.end()}, std::move(vals));
}

void gauss_seidel_sweep(const SparseMatrix& a, std::span<const double> diagonal,
                        std::span<const double> b, std::span<double> z, SweepDirection direction) {
  const Index n = a.rows();
  if (a.cols() != n || static_cast<Index>(b.size()) != n || static_cast<Index>(z.size()) != n ||
      static_cast<Index>(diagonal.size()) != n) {
    throw std::invalid_argument("gauss_seidel_sweep: dimension mismatch");
  }
  const auto& k = kernels::active();
  const auto offsets = a.row_offsets();
  const Index* cols = a.col_indices().data();
  const double* vals = a.values().data();
  // z_i += (b_i - A_i z) / a_ii  is the Gauss-Seidel update with the current z_i
  // folded into the row product.
  auto relax = [&](Index i) {
    if (diagonal[i] == 0.0) throw std::domain_error("smoother requires nonzero diagonal");
    const Index begin = offsets[i];
    const double row = k.gather_dot(vals + begin, cols + begin, offsets[i + 1] - begin, z.data());
    z[i] += (b[i] - row) / diagonal[i];
  };
  if (direction == SweepDirection::forward) {
    for (Index i = 0; i < n; ++i) relax(i);
  } else {
    for (Index i = n - 1; i >= 0; --i) relax(i);
  }
}

void gauss_seidel_sweep(const SparseMatrix& a, std::span<const double> b, std::span<double> z,
                        SweepDirection direction) {
  const Vector diagonal = a.diagonal();
  gauss_seidel_sweep(a, diagonal, b, z, direction);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << (i + 1) << ' ' << (cols[k] + 1) << ' ' << vals[k] << '\n';
    }
  }
}

}  // namespace topopt
