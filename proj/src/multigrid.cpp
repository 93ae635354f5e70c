#include "topopt/multigrid.hpp"

#include <algorithm>
#include <stdexcept>

#include "topopt/kernels.hpp"

namespace topopt {

SparseMatrix build_prolongation(const Mesh& fine, const Mesh& coarse, bool augmented) {
  if (fine.nx() != 2 * coarse.nx() || fine.ny() != 2 * coarse.ny() ||
      fine.support() != coarse.support()) {
    throw std::invalid_argument("meshes are not a 2x refinement pair");
  }
  const Index extra = augmented ? 1 : 0;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(fine.num_dofs()) * 4);

  // 1D weights: even fine index coincides with a coarse node, odd index sits
  // halfway between two coarse nodes.
  auto stencil = [](int fine_index, int* coarse_index, double* weight) {
    if (fine_index % 2 == 0) {
      coarse_index[0] = fine_index / 2;
      weight[0] = 1.0;
      return 1;
    }
    coarse_index[0] = (fine_index - 1) / 2;
    coarse_index[1] = (fine_index + 1) / 2;
    weight[0] = weight[1] = 0.5;
    return 2;
  };

  for (int i = 0; i <= fine.nx(); ++i) {
    int ci[2];
    double wi[2];
    const int ni = stencil(i, ci, wi);
    for (int j = 0; j <= fine.ny(); ++j) {
      int cj[2];
      double wj[2];
      const int nj = stencil(j, cj, wj);
      const Index fine_node = fine.node(i, j);
      for (int comp = 0; comp < 2; ++comp) {
        const Index row = fine.dof(fine_node, comp);
        if (row == Mesh::kFixed) continue;
        for (int a = 0; a < ni; ++a) {
          for (int b = 0; b < nj; ++b) {
            const Index col = coarse.dof(coarse.node(ci[a], cj[b]), comp);
            if (col == Mesh::kFixed) continue;
            triplets.push_back({row, col, wi[a] * wj[b]});
          }
        }
      }
    }
  }
  if (augmented) triplets.push_back({fine.num_dofs(), coarse.num_dofs(), 1.0});
  return SparseMatrix::from_triplets(fine.num_dofs() + extra, coarse.num_dofs() + extra,
                                     std::move(triplets));
}

std::vector<SparseMatrix> build_prolongations(std::span<const Mesh> meshes, bool augmented) {
  std::vector<SparseMatrix> out;
  for (std::size_t k = 1; k < meshes.size(); ++k) {
    out.push_back(build_prolongation(meshes[k], meshes[k - 1], augmented));
  }
  return out;
}

SparseMatrix galerkin_coarsen(const SparseMatrix& a, const SparseMatrix& p) {
  if (a.rows() != a.cols() || a.cols() != p.rows()) {
    throw std::invalid_argument("galerkin_coarsen: dimension mismatch");
  }
  return multiply(transpose(p), multiply(a, p));
}

MultigridHierarchy::MultigridHierarchy(SparseMatrix finest,
                                       std::span<const SparseMatrix> prolongations,
                                       SmootherConfig smoother)
    : smoother_(smoother) {
  if (smoother.pre_sweeps < 0 || smoother.post_sweeps < 0) {
    throw std::invalid_argument("sweep counts must be nonnegative");
  }
  const std::size_t levels = prolongations.size() + 1;
  ops_.resize(levels);
  ops_[levels - 1] = std::move(finest);
  for (std::size_t k = levels - 1; k > 0; --k) {
    const SparseMatrix& p = prolongations[k - 1];
    if (p.rows() != ops_[k].rows()) {
      throw std::invalid_argument("prolongation does not match operator size");
    }
    SparseMatrix r = transpose(p);
    ops_[k - 1] = multiply(r, multiply(ops_[k], p));
    restrict_.insert(restrict_.begin(), std::move(r));
    prolong_.insert(prolong_.begin(), p);
  }
  diagonals_.reserve(levels);
  for (const auto& op : ops_) diagonals_.push_back(op.diagonal());
  coarse_ = CholeskyFactor::factor(ops_[0]);
}

MultigridWorkspace MultigridHierarchy::make_workspace() const {
  MultigridWorkspace ws;
  for (const auto& op : ops_) {
    ws.rhs.emplace_back(op.rows(), 0.0);
    ws.correction.emplace_back(op.rows(), 0.0);
    ws.scratch.emplace_back(op.rows(), 0.0);
  }
  return ws;
}

void MultigridHierarchy::vcycle(int level, std::span<double> z, std::span<const double> r,
                                MultigridWorkspace& ws) const {
  const SparseMatrix& a = ops_[level];
  if (static_cast<Index>(z.size()) != a.rows() || static_cast<Index>(r.size()) != a.rows()) {
    throw std::invalid_argument("vcycle: vector length does not match level operator");
  }
  if (level == 0) {
    std::copy(r.begin(), r.end(), z.begin());
    coarse_.solve_in_place(z);
    return;
  }
  const Vector& diag = diagonals_[level];
  for (int s = 0; s < smoother_.pre_sweeps; ++s) {
    gauss_seidel_sweep(a, diag, r, z, SweepDirection::forward);
  }
  Vector& residual = ws.scratch[level];
  spmv(a, z, residual);
  kernels::scale_add(1.0, r, -1.0, residual);
  spmv(restrict_[level - 1], residual, ws.rhs[level - 1]);
  Vector& coarse = ws.correction[level - 1];
  std::fill(coarse.begin(), coarse.end(), 0.0);
  vcycle(level - 1, coarse, ws.rhs[level - 1], ws);
  spmv(prolong_[level - 1], coarse, residual);
  kernels::axpy(1.0, residual, z);
  for (int s = 0; s < smoother_.post_sweeps; ++s) {
    gauss_seidel_sweep(a, diag, r, z, SweepDirection::backward);
  }
}

void MultigridHierarchy::precondition(std::span<const double> r, std::span<double> z,
                                      MultigridWorkspace& ws) const {
  std::fill(z.begin(), z.end(), 0.0);
  vcycle(finest_level(), z, r, ws);
}

}  // namespace topopt
