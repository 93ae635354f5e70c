#include "topopt/linear_solver.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

#include "topopt/cholesky.hpp"
#include "topopt/kernels.hpp"

namespace topopt {

LinearSolverKind parse_linear_solver(std::string_view name) {
  if (name == "mgcg") return LinearSolverKind::mgcg;
  if (name == "direct") return LinearSolverKind::direct;
  throw std::invalid_argument("unknown linear solver '" + std::string(name) + "'");
}

const char* to_string(LinearSolverKind kind) {
  return kind == LinearSolverKind::mgcg ? "mgcg" : "direct";
}

SpdSolver::SpdSolver(LinearSolverOptions options, std::vector<SparseMatrix> prolongations)
    : options_(options), prolongations_(std::move(prolongations)) {}

PcgOutcome SpdSolver::solve(const SparseMatrix& a, std::span<const double> b, Vector initial,
                            const StoppingRule& stop) {
  const auto start = std::chrono::steady_clock::now();
  PcgOutcome out;
  if (options_.kind == LinearSolverKind::direct) {
    const CholeskyFactor factor = CholeskyFactor::factor(a);
    out.solution = factor.solve(b);
    Vector r = spmv(a, out.solution);
    kernels::axpy(-1.0, b, r);
    out.final_residual_norm = kernels::norm2(r);
    out.converged = true;
  } else {
    const MultigridHierarchy hierarchy(a, prolongations_, options_.smoother);
    MultigridWorkspace ws = hierarchy.make_workspace();
    const LinearOperator precond = [&](std::span<const double> r, std::span<double> z) {
      hierarchy.precondition(r, z, ws);
    };
    out = pcg(a, b, precond, stop, options_.max_cg_iterations, std::move(initial));
  }
  seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace topopt
