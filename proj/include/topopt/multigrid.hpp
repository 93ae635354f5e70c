#pragma once

#include <span>
#include <vector>

#include "topopt/cholesky.hpp"
#include "topopt/fem.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

/// Nine-point (bilinear) prolongation from `coarse` to its uniform refinement
/// `fine`, per displacement component. Rows of fixed fine dofs and columns of
/// fixed coarse dofs are dropped. With `augmented`, one extra row/column with
/// a single unit entry carries the volume multiplier through unchanged.
///
/// Throws std::invalid_argument if the meshes are not a 2x refinement pair
/// with the same supports.
SparseMatrix build_prolongation(const Mesh& fine, const Mesh& coarse, bool augmented);

/// P^T A P
SparseMatrix galerkin_coarsen(const SparseMatrix& a, const SparseMatrix& p);

/// Gauss-Seidel smoothing counts. Forward sweeps before the coarse correction
/// and the same number of backward sweeps after keep the V-cycle symmetric.
struct SmootherConfig {
  int pre_sweeps = 4;
  int post_sweeps = 4;
};

/// Scratch vectors for one V-cycle, one set per level.
struct MultigridWorkspace {
  std::vector<Vector> rhs;
  std::vector<Vector> correction;
  std::vector<Vector> scratch;
};

/// Operators A_0 (coarsest) .. A_{L-1} (finest) with A_{k-1} = P_k^T A_k P_k,
/// plus the Cholesky factor of A_0. Immutable once built.
class MultigridHierarchy {
 public:
  /// `prolongations[k]` maps level k to level k+1 (0-based), so there are
  /// levels-1 of them, coarsest first.
  MultigridHierarchy(SparseMatrix finest, std::span<const SparseMatrix> prolongations,
                     SmootherConfig smoother = {});

  int levels() const { return static_cast<int>(ops_.size()); }
  int finest_level() const { return levels() - 1; }
  const SparseMatrix& op(int level) const { return ops_[level]; }
  const SmootherConfig& smoother() const { return smoother_; }

  MultigridWorkspace make_workspace() const;

  /// One V-cycle for A_level z = r, updating z in place. Level 0 is an exact
  /// solve that overwrites z.
  void vcycle(int level, std::span<double> z, std::span<const double> r,
              MultigridWorkspace& ws) const;

  /// z = V(r) starting from z = 0 on the finest level (the preconditioner).
  void precondition(std::span<const double> r, std::span<double> z, MultigridWorkspace& ws) const;

 private:
  std::vector<SparseMatrix> ops_;
  std::vector<Vector> diagonals_;
  std::vector<SparseMatrix> prolong_;
  std::vector<SparseMatrix> restrict_;
  CholeskyFactor coarse_;
  SmootherConfig smoother_;
};

/// Prolongations for every consecutive pair of meshes in `meshes` (coarsest first).
std::vector<SparseMatrix> build_prolongations(std::span<const Mesh> meshes, bool augmented);

}  // namespace topopt
