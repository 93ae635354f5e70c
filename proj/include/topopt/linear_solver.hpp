#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "topopt/krylov.hpp"
#include "topopt/multigrid.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

enum class LinearSolverKind { mgcg, direct };

LinearSolverKind parse_linear_solver(std::string_view name);
const char* to_string(LinearSolverKind kind);

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::mgcg;
  SmootherConfig smoother{};
  int max_cg_iterations = 1000;
};

/// Solves the SPD systems of one problem family (K(x) or the augmented Z) by
/// multigrid-preconditioned CG or by the skyline Cholesky reference. The
/// multigrid hierarchy is rebuilt from the given matrix on every call, since
/// the optimizers change the operator between calls.
class SpdSolver {
 public:
  SpdSolver(LinearSolverOptions options, std::vector<SparseMatrix> prolongations);

  /// `initial` may be empty (zero start). The direct arm ignores `stop` and
  /// reports zero iterations.
  PcgOutcome solve(const SparseMatrix& a, std::span<const double> b, Vector initial,
                   const StoppingRule& stop);

  LinearSolverKind kind() const { return options_.kind; }
  /// Wall time spent inside solve(), including hierarchy/factor set-up.
  double seconds() const { return seconds_; }

 private:
  LinearSolverOptions options_;
  std::vector<SparseMatrix> prolongations_;
  double seconds_ = 0.0;
};

}  // namespace topopt
