#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <stdexcept>

#include "topopt/sparse.hpp"

namespace topopt {

/// Convergence test for inexact linear solves.
///
/// `relative` (default) stops once ||r|| <= tol * ||b||. `product` is the
/// literal reading ||r|| * ||b|| <= tol, kept for fidelity experiments.
struct StoppingRule {
  enum class Form { relative, product };

  double tolerance = 1e-2;
  Form form = Form::relative;

  static constexpr double kRhsFloor = 1e-300;

  bool satisfied(double residual_norm, double rhs_norm) const {
    if (form == Form::product) return residual_norm * rhs_norm <= tolerance;
    return residual_norm <= tolerance * std::max(rhs_norm, kRhsFloor);
  }
};

/// ||residual|| <= tol * max(||b||, 1e-300)
bool stopping_rule_ip(std::span<const double> residual, std::span<const double> b, double tol);

struct PcgOutcome {
  Vector solution;
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
};

class IndefiniteDirection : public std::runtime_error {
 public:
  IndefiniteDirection()
      : std::runtime_error("operator not positive definite along search direction") {}
};

/// out = Op(in)
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients in the residual convention r = A z - b.
///
/// The stopping rule is checked on the initial residual and after every
/// iteration. Reaching `max_iterations` returns converged = false; a
/// nonpositive curvature p^T A p throws IndefiniteDirection.
PcgOutcome pcg(const LinearOperator& a, std::span<const double> b, const LinearOperator& precond,
               const StoppingRule& stop, int max_iterations, Vector z0);

/// Convenience overload for an assembled matrix.
PcgOutcome pcg(const SparseMatrix& a, std::span<const double> b, const LinearOperator& precond,
               const StoppingRule& stop, int max_iterations, Vector z0);

}  // namespace topopt
