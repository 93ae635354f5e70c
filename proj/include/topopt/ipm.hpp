#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "topopt/fem.hpp"
#include "topopt/krylov.hpp"
#include "topopt/linear_solver.hpp"
#include "topopt/model.hpp"
#include "topopt/run_log.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

enum class CgTolMode { fixed, decreasing };

struct IpmState;

struct IpmConfig {
  double sigma_s = 0.2;
  double sigma_r = 0.2;
  double tau_nwt = 1e-1;
  double tau_ip = 1e-8;
  double step_shrink = 0.9;
  double cg_tol = 1e-2;
  CgTolMode cg_tol_mode = CgTolMode::fixed;
  StoppingRule::Form cg_form = StoppingRule::Form::relative;
  int newton_cap = 50;
  bool equilibrium_guard = true;  ///< see newton_direction; inexact solver only
  double s0 = 1.0;
  double r0 = 1.0;
  LinearSolverOptions linear{};
  /// Called with the state after every accepted Newton step (before any
  /// barrier update). For diagnostics and tests.
  std::function<void(const IpmState&)> on_step;

  void validate() const;
};

struct IpmState {
  Vector u;
  double lambda = 1.0;
  Vector x;
  Vector phi;
  Vector psi;
  double s = 1.0;
  double r = 1.0;
};

/// Residuals of the perturbed KKT system at one state.
///
///   res1 = f - K(x) u
///   res2 = V - sum x
///   res3 = -1/2 u^T K_i u - lambda - phi_i + psi_i   (stationarity, = 0 at a KKT point)
///   res4 = s - phi_i x_i
///   res5 = r - psi_i (xbar - x_i)
///   res3_tilde = res3 - X^{-1} res4 + Xt^{-1} res5
///
/// For SIMP the energy term uses the model sensitivity, 1/2 (B^T u)_i.
struct ResidualBundle {
  Vector res1;
  double res2 = 0.0;
  Vector res3;
  Vector res4;
  Vector res5;
  Vector res3_tilde;
};

/// D = X^{-1} Phi + Xt^{-1} Psi. Throws std::runtime_error("state left the
/// interior") unless x is strictly inside (0, xbar) and phi, psi > 0.
Vector barrier_diagonal(const IpmState& state, double upper_bound);

/// `k` and `b` must be the stiffness and sensitivity at (state.x, state.u).
ResidualBundle compute_residuals(const IpmState& state, const SparseMatrix& k,
                                 const SparseMatrix& b, std::span<const double> f, double volume,
                                 double upper_bound);

/// Recomputes res4, res5 and res3_tilde after a change of (s, r).
void refresh_complementarity(const IpmState& state, double upper_bound, ResidualBundle& bundle);

struct AugmentedSystem {
  SparseMatrix z;  ///< (n+1) x (n+1), last row/column for the volume multiplier
  Vector rhs;
};

/// Z = [[K, 0], [0, 0]] + [B; e^T] D^{-1} [B^T, e],
/// rhs = [res1; res2] + [B; e^T] D^{-1} res3_tilde.
AugmentedSystem build_augmented_system(const SparseMatrix& k, const SparseMatrix& b,
                                       std::span<const double> d, const ResidualBundle& bundle);

/// d_x = D^{-1} (B^T d_u + e d_lambda - res3_tilde)
Vector recover_dx(std::span<const double> du, double dlambda, const ResidualBundle& bundle,
                  std::span<const double> d, const SparseMatrix& b);

/// d_lambda that satisfies the volume row exactly for the given d_u, so that
/// e^T d_x = res2 holds even when d_u comes from an inexact solve.
double volume_consistent_dlambda(std::span<const double> du, const ResidualBundle& bundle,
                                 std::span<const double> d, const SparseMatrix& b);

/// d_phi = X^{-1} (res4 - Phi d_x),  d_psi = Xt^{-1} (res5 + Psi d_x)
std::pair<Vector, Vector> recover_dphi_dpsi(std::span<const double> dx,
                                            const ResidualBundle& bundle, const IpmState& state,
                                            double upper_bound);

/// min(alpha_l, alpha_u, 1) where alpha_l, alpha_u are `shrink` times the
/// largest steps keeping x + alpha d within [0, xbar].
double step_length(std::span<const double> x, std::span<const double> dx, double upper_bound,
                   double shrink = 0.9);

/// Same rule for a vector bounded only from below by zero.
double step_length_positive(std::span<const double> v, std::span<const double> dv,
                            double shrink = 0.9);

/// ||res1||/||f|| + ||res3_tilde||/(||phi|| + ||psi||) <= tau
bool newton_stop(const ResidualBundle& bundle, std::span<const double> f,
                 std::span<const double> phi, std::span<const double> psi, double tau);

/// Diagnostic KKT measure:
/// ||res1||/||f|| + ||res3_tilde||/(||phi||+||psi||) + phi^T x/(||phi|| ||x||)
///   + psi^T (xbar - x)/(||phi|| ||x||)
double scaled_kkt_error(const IpmState& state, const ResidualBundle& bundle,
                        std::span<const double> f, double upper_bound);

struct LemmaCheck {
  bool pass = true;
  double max_ratio = 0.0;      ///< max_i |x*_i - x_i| / (x*_i x_i)
  double max_violation = 0.0;  ///< max(0, max_ratio - tau / s)
};

/// Elementwise |x*_i - x_i| / (x*_i x_i) <= tau / s.
LemmaCheck lemma_gap_check(std::span<const double> x, std::span<const double> x_star, double s,
                           double tau);

/// Barrier reductions needed to bring max(s, r) from (s0, r0) to <= tau.
int barrier_reductions(double tau, double sigma_s, double sigma_r, double s0 = 1.0,
                       double r0 = 1.0);

struct NewtonDirection {
  Vector du;
  double dlambda = 0.0;
  Vector dx;
  Vector dphi;
  Vector dpsi;
  int cg_iterations = 0;
  bool linear_converged = true;
};

/// Solves the augmented system with `solver` (zero initial guess), applies the
/// volume-row correction to d_lambda and recovers d_x, d_phi, d_psi.
///
/// With `equilibrium_bound` > 0 an inexact solve is also required to leave a
/// displacement-block residual of at most that size; otherwise it is resumed
/// from its last iterate with a tolerance ten times smaller (down to 1e-12).
/// This keeps ||f - K u|| from drifting when the x rows dominate ||rhs||.
NewtonDirection newton_direction(const IpmState& state, const SparseMatrix& k,
                                 const SparseMatrix& b, const ResidualBundle& bundle,
                                 double upper_bound, SpdSolver& solver, const StoppingRule& stop,
                                 double equilibrium_bound = 0.0);

struct IpmResult {
  IpmState state;
  RunLog log;
  std::vector<int> newton_per_barrier;
  double max_volume_error = 0.0;  ///< max |sum x - V| / V over accepted steps
  bool interior_maintained = true;
};

/// Primal-dual interior point method for the problem's model (VTS or SIMP).
/// Algorithmic failures (Newton cap, linear-solver breakdown) are reported in
/// log.status / log.reason rather than thrown.
IpmResult ipm_solve(const FeProblem& problem, const IpmConfig& config);

}  // namespace topopt
