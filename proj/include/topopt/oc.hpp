#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "topopt/fem.hpp"
#include "topopt/krylov.hpp"
#include "topopt/linear_solver.hpp"
#include "topopt/run_log.hpp"
#include "topopt/sparse.hpp"

namespace topopt {

enum class OcVariant { oc, doc, aoc };

OcVariant parse_oc_variant(std::string_view name);
const char* to_string(OcVariant variant);

struct OcConfig {
  OcVariant variant = OcVariant::oc;
  double q = 0.5;  ///< damping exponent, DOC only
  double tau_lambda = 1e-11;
  double tau_oc = 1e-5;
  double x_lower = 1e-9;
  double lambda_upper = 10000.0;
  double cg_tol_start = 1e-4;
  double cg_tol_shrink = 0.1;
  double cg_tol_floor = 1e-12;
  int max_outer = 5000;
  StoppingRule::Form cg_form = StoppingRule::Form::relative;
  LinearSolverOptions linear{};

  void validate() const;
};

struct Bisection {
  double lambda = 0.0;
  Vector x;
  double bracket_width = 0.0;
  int steps = 0;
};

/// Multiplier search for x_new_i = clamp(x_i g_i^q / lambda, x_lower, xbar)
/// with sum x_new = V (q = 1 except for DOC). Bisection over
/// [0, lambda_upper] until the bracket is narrower than tau_lambda; the
/// returned x is evaluated at the last midpoint. Throws
/// std::runtime_error("volume unreachable") if V lies outside the volumes
/// attainable at the bracket ends.
Bisection bisect_lambda(std::span<const double> x, std::span<const double> g, double volume,
                        double upper_bound, const OcConfig& config);

/// One OC (or DOC) update from element energies g_i = u^T K_i u.
Vector oc_step(std::span<const double> x, std::span<const double> g, double volume,
               double upper_bound, const OcConfig& config);

struct AveragedStep {
  Vector x;
  Vector first;
  Vector second;
};

/// x <- (OC(x) + OC(OC(x))) / 2. `energies(x)` must solve equilibrium at x and
/// return the element energies; it is called once, for the intermediate iterate.
AveragedStep aoc_step(std::span<const double> x, std::span<const double> g, double volume,
                      double upper_bound, const OcConfig& config,
                      const std::function<Vector(std::span<const double>)>& energies);

struct OcResult {
  Vector x;           ///< raw iterate, entries >= x_lower
  Vector x_reported;  ///< entries equal to x_lower replaced by 0
  Vector u;
  RunLog log;
  double max_volume_error = 0.0;  ///< max |sum x - V| / V over accepted iterates
};

/// Optimality-criteria loop for the VTS problem. Failures (unreachable
/// volume, loss of descent below the CG tolerance floor) are reported through
/// log.status / log.reason.
OcResult oc_solve(const FeProblem& problem, const OcConfig& config);

}  // namespace topopt
