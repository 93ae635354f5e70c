#pragma once

#include <span>

#include "topopt/fem.hpp"
#include "topopt/model.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

/// Density filter x~ = W x.
///
/// W_hat_ij = max(0, r_min - dist(i, j)) over element centres (distance in
/// element widths), and each column of W is the matching column of W_hat
/// divided by its sum. W_hat is symmetric, so columns of W sum to one and the
/// filter preserves volume.
struct FilterMatrix {
  SparseMatrix w;
  double radius = 1.0;
  FilterMetric metric = FilterMetric::manhattan;
};

FilterMatrix build_filter(const Mesh& mesh, double radius, FilterMetric metric);

/// sum_i (W x)_i^p K_i
SparseMatrix simp_stiffness(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> x,
                            const FilterMatrix& filter, double penalty);

/// Column i = p sum_j W_ji (W x)_j^(p-1) K_j u. The second-order term of the
/// chain rule is not part of the Newton matrix.
SparseMatrix simp_B(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u,
                    std::span<const double> x, const FilterMatrix& filter, double penalty);

/// -1/2 u^T (dK/dx_i) u - lambda - phi_i + psi_i
Vector simp_kkt_res3(const Mesh& mesh, const ElementMatrix& ke, std::span<const double> u,
                     std::span<const double> x, double lambda, std::span<const double> phi,
                     std::span<const double> psi, const FilterMatrix& filter, double penalty);

class SimpModel final : public StiffnessModel {
 public:
  SimpModel(const Mesh& mesh, const ElementMatrix& ke, FilterMatrix filter, double penalty)
      : mesh_(&mesh), ke_(ke), filter_(std::move(filter)), penalty_(penalty) {}
  SparseMatrix stiffness(std::span<const double> x) const override;
  SparseMatrix sensitivity(std::span<const double> x, std::span<const double> u) const override;
  Index num_elements() const override { return mesh_->num_elements(); }
  const FilterMatrix& filter() const { return filter_; }

 private:
  const Mesh* mesh_;
  ElementMatrix ke_;
  FilterMatrix filter_;
  double penalty_;
};

}  // namespace topopt
