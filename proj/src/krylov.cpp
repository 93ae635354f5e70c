#include "topopt/krylov.hpp"

#include <cmath>

#include "topopt/kernels.hpp"

namespace topopt {

bool stopping_rule_ip(std::span<const double> residual, std::span<const double> b, double tol) {
  return StoppingRule{tol, StoppingRule::Form::relative}.satisfied(kernels::norm2(residual),
                                                                   kernels::norm2(b));
}

PcgOutcome pcg(const LinearOperator& a, std::span<const double> b, const LinearOperator& precond,
               const StoppingRule& stop, int max_iterations, Vector z0) {
  const std::size_t n = b.size();
  if (z0.empty()) z0.assign(n, 0.0);
  if (z0.size() != n) throw std::invalid_argument("pcg: initial guess size mismatch");

  PcgOutcome out;
  out.solution = std::move(z0);
  Vector& z = out.solution;
  const double b_norm = kernels::norm2(b);

  Vector r(n);
  a(z, r);
  kernels::axpy(-1.0, b, r);
  double r_norm = kernels::norm2(r);
  out.final_residual_norm = r_norm;
  if (stop.satisfied(r_norm, b_norm)) {
    out.converged = true;
    return out;
  }

  Vector y(n);
  precond(r, y);
  Vector p(y);
  for (double& v : p) v = -v;
  Vector ap(n);
  double ry = kernels::dot(r, y);

  for (int it = 1; it <= max_iterations; ++it) {
    a(p, ap);
    const double curvature = kernels::dot(p, ap);
    if (!(curvature > 0.0)) throw IndefiniteDirection();
    const double alpha = ry / curvature;
    kernels::axpy(alpha, p, z);
    kernels::axpy(alpha, ap, r);
    precond(r, y);
    const double ry_new = kernels::dot(r, y);
    const double beta = ry_new / ry;
    kernels::scale_add(-1.0, y, beta, p);
    ry = ry_new;

    r_norm = kernels::norm2(r);
    out.iterations = it;
    out.final_residual_norm = r_norm;
    if (stop.satisfied(r_norm, b_norm)) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

PcgOutcome pcg(const SparseMatrix& a, std::span<const double> b, const LinearOperator& precond,
               const StoppingRule& stop, int max_iterations, Vector z0) {
  const LinearOperator op = [&a](std::span<const double> in, std::span<double> out) {
    spmv(a, in, out);
  };
  return pcg(op, b, precond, stop, max_iterations, std::move(z0));
}

}  // namespace topopt
