#pragma once

#include <memory>
#include <span>

#include "topopt/fem.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

/// Maps a design field to the stiffness operator and its sensitivity.
///
/// sensitivity(x, u) is the n x m matrix whose column i is d(K(x) u)/dx_i, so
/// the linearization of K(x) u in x is sensitivity * dx.
class StiffnessModel {
 public:
  virtual ~StiffnessModel() = default;
  virtual SparseMatrix stiffness(std::span<const double> x) const = 0;
  virtual SparseMatrix sensitivity(std::span<const double> x, std::span<const double> u) const = 0;
  virtual Index num_elements() const = 0;
};

/// Linear dependence K(x) = sum_i x_i K_i.
class VtsModel final : public StiffnessModel {
 public:
  VtsModel(const Mesh& mesh, const ElementMatrix& ke) : mesh_(&mesh), ke_(ke) {}
  SparseMatrix stiffness(std::span<const double> x) const override;
  SparseMatrix sensitivity(std::span<const double> x, std::span<const double> u) const override;
  Index num_elements() const override { return mesh_->num_elements(); }

 private:
  const Mesh* mesh_;
  ElementMatrix ke_;
};

/// VTS or SIMP model for the finest mesh of `problem`, per its spec.
std::unique_ptr<StiffnessModel> make_model(const FeProblem& problem);

}  // namespace topopt
