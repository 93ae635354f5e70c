#include "topopt/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topopt/kernels.hpp"
#include "topopt/multigrid.hpp"

namespace topopt {

void IpmConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(sigma_s) || !in_unit(sigma_r)) {
    throw std::invalid_argument("barrier reduction factors must lie in (0, 1)");
  }
  if (!in_unit(step_shrink)) throw std::invalid_argument("step shrink must lie in (0, 1)");
  if (!(tau_nwt > 0.0) || !(tau_ip > 0.0) || !(cg_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (!(s0 > 0.0) || !(r0 > 0.0)) throw std::invalid_argument("initial barriers must be positive");
  if (newton_cap < 1) throw std::invalid_argument("newton cap must be >= 1");
}

Vector barrier_diagonal(const IpmState& state, double upper_bound) {
  const std::size_t m = state.x.size();
  Vector d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = state.x[i];
    const double gap = upper_bound - x;
    if (!(x > 0.0 && gap > 0.0 && state.phi[i] > 0.0 && state.psi[i] > 0.0)) {
      throw std::runtime_error("state left the interior");
    }
    d[i] = state.phi[i] / x + state.psi[i] / gap;
  }
  return d;
}

void refresh_complementarity(const IpmState& state, double upper_bound, ResidualBundle& bundle) {
  const std::size_t m = state.x.size();
  bundle.res4.resize(m);
  bundle.res5.resize(m);
  bundle.res3_tilde.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = state.x[i];
    const double gap = upper_bound - x;
    bundle.res4[i] = state.s - state.phi[i] * x;
    bundle.res5[i] = state.r - state.psi[i] * gap;
    bundle.res3_tilde[i] = bundle.res3[i] - bundle.res4[i] / x + bundle.res5[i] / gap;
  }
}

ResidualBundle compute_residuals(const IpmState& state, const SparseMatrix& k,
                                 const SparseMatrix& b, std::span<const double> f, double volume,
                                 double upper_bound) {
  const std::size_t m = state.x.size();
  if (static_cast<std::size_t>(b.cols()) != m || b.rows() != k.rows() ||
      static_cast<Index>(state.u.size()) != k.rows() || f.size() != state.u.size()) {
    throw std::invalid_argument("compute_residuals: dimension mismatch");
  }
  ResidualBundle bundle;
  bundle.res1 = spmv(k, state.u);
  kernels::scale_add(1.0, f, -1.0, bundle.res1);
  bundle.res2 = volume - std::accumulate(state.x.begin(), state.x.end(), 0.0);
  bundle.res3 = spmv_transpose(b, state.u);
  for (std::size_t i = 0; i < m; ++i) {
    bundle.res3[i] = -0.5 * bundle.res3[i] - state.lambda - state.phi[i] + state.psi[i];
  }
  refresh_complementarity(state, upper_bound, bundle);
  return bundle;
}

AugmentedSystem build_augmented_system(const SparseMatrix& k, const SparseMatrix& b,
                                       std::span<const double> d, const ResidualBundle& bundle) {
  const Index n = k.rows();
  const Index m = b.cols();
  if (k.cols() != n || b.rows() != n || static_cast<Index>(d.size()) != m) {
    throw std::invalid_argument("build_augmented_system: dimension mismatch");
  }
  Vector dinv(m);
  for (Index i = 0; i < m; ++i) {
    if (!(d[i] > 0.0)) throw std::runtime_error("state left the interior");
    dinv[i] = 1.0 / d[i];
  }
  const SparseMatrix bd = scale_columns(b, dinv);
  const SparseMatrix top = add(k, multiply(bd, transpose(b)));
  const Vector arrow = spmv(b, dinv);
  const double corner = std::accumulate(dinv.begin(), dinv.end(), 0.0);

  std::vector<Index> offsets(static_cast<std::size_t>(n) + 2, 0);
  std::vector<Index> cols;
  Vector vals;
  cols.reserve(top.nnz() + 2 * static_cast<std::size_t>(n) + 1);
  vals.reserve(cols.capacity());
  for (Index i = 0; i < n; ++i) {
    const auto rc = top.row_cols(i);
    const auto rv = top.row_values(i);
    cols.insert(cols.end(), rc.begin(), rc.end());
    vals.insert(vals.end(), rv.begin(), rv.end());
    cols.push_back(n);
    vals.push_back(arrow[i]);
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  for (Index i = 0; i < n; ++i) {
    cols.push_back(i);
    vals.push_back(arrow[i]);
  }
  cols.push_back(n);
  vals.push_back(corner);
  offsets[n + 1] = static_cast<Index>(cols.size());

  AugmentedSystem out{SparseMatrix(n + 1, n + 1, std::move(offsets), std::move(cols), std::move(vals)),
                      Vector(static_cast<std::size_t>(n) + 1)};
  Vector scaled(m);
  for (Index i = 0; i < m; ++i) scaled[i] = dinv[i] * bundle.res3_tilde[i];
  spmv(b, scaled, std::span<double>(out.rhs.data(), n));
  kernels::axpy(1.0, bundle.res1, std::span<double>(out.rhs.data(), n));
  out.rhs[n] = bundle.res2 + std::accumulate(scaled.begin(), scaled.end(), 0.0);
  return out;
}

Vector recover_dx(std::span<const double> du, double dlambda, const ResidualBundle& bundle,
                  std::span<const double> d, const SparseMatrix& b) {
  Vector dx = spmv_transpose(b, du);
  for (std::size_t i = 0; i < dx.size(); ++i) {
    dx[i] = (dx[i] + dlambda - bundle.res3_tilde[i]) / d[i];
  }
  return dx;
}

double volume_consistent_dlambda(std::span<const double> du, const ResidualBundle& bundle,
                                 std::span<const double> d, const SparseMatrix& b) {
  const Vector btdu = spmv_transpose(b, du);
  double num = bundle.res2;
  double den = 0.0;
  for (std::size_t i = 0; i < btdu.size(); ++i) {
    num -= (btdu[i] - bundle.res3_tilde[i]) / d[i];
    den += 1.0 / d[i];
  }
  return num / den;
}

std::pair<Vector, Vector> recover_dphi_dpsi(std::span<const double> dx,
                                            const ResidualBundle& bundle, const IpmState& state,
                                            double upper_bound) {
  const std::size_t m = dx.size();
  Vector dphi(m);
  Vector dpsi(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = state.x[i];
    dphi[i] = (bundle.res4[i] - state.phi[i] * dx[i]) / x;
    dpsi[i] = (bundle.res5[i] + state.psi[i] * dx[i]) / (upper_bound - x);
  }
  return {std::move(dphi), std::move(dpsi)};
}

double step_length(std::span<const double> x, std::span<const double> dx, double upper_bound,
                   double shrink) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lower = inf;
  double upper = inf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) lower = std::min(lower, -x[i] / dx[i]);
    if (dx[i] > 0.0) upper = std::min(upper, (upper_bound - x[i]) / dx[i]);
  }
  return std::min({shrink * lower, shrink * upper, 1.0});
}

double step_length_positive(std::span<const double> v, std::span<const double> dv, double shrink) {
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) lower = std::min(lower, -v[i] / dv[i]);
  }
  return std::min(shrink * lower, 1.0);
}

namespace {

double newton_measure(const ResidualBundle& bundle, std::span<const double> f,
                      std::span<const double> phi, std::span<const double> psi) {
  return kernels::norm2(bundle.res1) / kernels::norm2(f) +
         kernels::norm2(bundle.res3_tilde) / (kernels::norm2(phi) + kernels::norm2(psi));
}

}  // namespace

bool newton_stop(const ResidualBundle& bundle, std::span<const double> f,
                 std::span<const double> phi, std::span<const double> psi, double tau) {
  return newton_measure(bundle, f, phi, psi) <= tau;
}

double scaled_kkt_error(const IpmState& state, const ResidualBundle& bundle,
                        std::span<const double> f, double upper_bound) {
  const double phi_norm = kernels::norm2(state.phi);
  const double x_norm = kernels::norm2(state.x);
  double psi_gap = 0.0;
  for (std::size_t i = 0; i < state.x.size(); ++i) psi_gap += state.psi[i] * (upper_bound - state.x[i]);
  return newton_measure(bundle, f, state.phi, state.psi) +
         kernels::dot(state.phi, state.x) / (phi_norm * x_norm) + psi_gap / (phi_norm * x_norm);
}

LemmaCheck lemma_gap_check(std::span<const double> x, std::span<const double> x_star, double s,
                           double tau) {
  if (x.size() != x_star.size()) throw std::invalid_argument("lemma_gap_check: size mismatch");
  LemmaCheck out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.max_ratio = std::max(out.max_ratio, std::abs(x_star[i] - x[i]) / (x_star[i] * x[i]));
  }
  out.max_violation = std::max(0.0, out.max_ratio - tau / s);
  out.pass = out.max_violation == 0.0;
  return out;
}

int barrier_reductions(double tau, double sigma_s, double sigma_r, double s0, double r0) {
  if (!(tau > 0.0) || !(sigma_s > 0.0 && sigma_s < 1.0) || !(sigma_r > 0.0 && sigma_r < 1.0)) {
    throw std::invalid_argument("barrier_reductions: invalid parameters");
  }
  int count = 0;
  double s = s0;
  double r = r0;
  while (std::max(s, r) > tau) {
    s *= sigma_s;
    r *= sigma_r;
    ++count;
  }
  return count;
}

NewtonDirection newton_direction(const IpmState& state, const SparseMatrix& k,
                                 const SparseMatrix& b, const ResidualBundle& bundle,
                                 double upper_bound, SpdSolver& solver, const StoppingRule& stop,
                                 double equilibrium_bound) {
  const Vector d = barrier_diagonal(state, upper_bound);
  const AugmentedSystem sys = build_augmented_system(k, b, d, bundle);
  PcgOutcome sol = solver.solve(sys.z, sys.rhs, {}, stop);
  const Index n = k.rows();
  int iterations = sol.iterations;

  if (equilibrium_bound > 0.0 && solver.kind() == LinearSolverKind::mgcg) {
    StoppingRule tighter = stop;
    auto block_residual = [&] {
      Vector r = spmv(sys.z, sol.solution);
      double sq = 0.0;
      for (Index i = 0; i < n; ++i) sq += (r[i] - sys.rhs[i]) * (r[i] - sys.rhs[i]);
      return std::sqrt(sq);
    };
    while (block_residual() > equilibrium_bound && tighter.tolerance * 0.1 >= 1e-12) {
      tighter.tolerance *= 0.1;
      sol = solver.solve(sys.z, sys.rhs, std::move(sol.solution), tighter);
      iterations += sol.iterations;
    }
  }

  NewtonDirection dir;
  dir.cg_iterations = iterations;
  dir.linear_converged = sol.converged;
  dir.du.assign(sol.solution.begin(), sol.solution.begin() + n);
  dir.dlambda = volume_consistent_dlambda(dir.du, bundle, d, b);
  dir.dx = recover_dx(dir.du, dir.dlambda, bundle, d, b);
  std::tie(dir.dphi, dir.dpsi) = recover_dphi_dpsi(dir.dx, bundle, state, upper_bound);
  return dir;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double min_entry(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

IpmResult ipm_solve(const FeProblem& problem, const IpmConfig& config) {
  config.validate();
  problem.spec.validate();
  const auto model = make_model(problem);
  const Mesh& mesh = problem.finest();
  const Vector& f = problem.load;
  const double volume = problem.spec.volume;
  const double xbar = problem.spec.upper_bound;
  const Index m = mesh.num_elements();

  SpdSolver k_solver(config.linear, build_prolongations(problem.meshes, false));
  SpdSolver z_solver(config.linear, build_prolongations(problem.meshes, true));

  IpmResult result;
  RunLog& log = result.log;
  log.solver = "ipm";
  if (config.tau_ip < 1e-12) {
    log.warnings.push_back("tau_ip below 1e-12 is beyond validated regime");
  }
  IpmState& st = result.state;
  st.x.assign(m, volume / m);
  st.lambda = 1.0;
  st.phi.assign(m, 1.0);
  st.psi.assign(m, 1.0);
  st.s = config.s0;
  st.r = config.r0;
  double cg_tol = config.cg_tol;
  auto stop_rule = [&] { return StoppingRule{cg_tol, config.cg_form}; };
  int unconverged_solves = 0;

  auto finish = [&](std::string status, std::string reason) {
    log.status = std::move(status);
    log.reason = std::move(reason);
    log.linear_seconds = k_solver.seconds() + z_solver.seconds();
    if (!st.u.empty()) log.objective = compliance(f, st.u);
    log.x_min = min_entry(st.x);
    if (unconverged_solves > 0) {
      log.warnings.push_back(std::to_string(unconverged_solves) +
                             " linear solves stopped at the iteration cap");
    }
  };

  try {
    SparseMatrix k = model->stiffness(st.x);
    auto t0 = std::chrono::steady_clock::now();
    PcgOutcome init = k_solver.solve(k, f, {}, stop_rule());
    st.u = std::move(init.solution);
    if (!init.converged) ++unconverged_solves;
    SparseMatrix b = model->sensitivity(st.x, st.u);
    ResidualBundle bundle = compute_residuals(st, k, b, f, volume, xbar);
    {
      LogRow row;
      row.event = "init";
      row.s = st.s;
      row.r = st.r;
      row.cg_iterations = init.iterations;
      row.cg_tol = cg_tol;
      row.objective = compliance(f, st.u);
      row.res1_rel = kernels::norm2(bundle.res1) / kernels::norm2(f);
      row.kkt_error = scaled_kkt_error(st, bundle, f, xbar);
      row.lambda = st.lambda;
      row.volume_error = -bundle.res2 / volume;
      row.seconds = seconds_since(t0);
      log.add(row);
    }

    int newton = 0;
    while (true) {
      if (newton == config.newton_cap) {
        finish("failed", "Newton cap of " + std::to_string(config.newton_cap) +
                             " steps exceeded at barrier s = " + std::to_string(st.s));
        return result;
      }
      t0 = std::chrono::steady_clock::now();
      const NewtonDirection dir = newton_direction(
          st, k, b, bundle, xbar, z_solver, stop_rule(),
          config.equilibrium_guard ? cg_tol * kernels::norm2(f) : 0.0);
      if (!dir.linear_converged) ++unconverged_solves;
      const double alpha =
          std::min({step_length(st.x, dir.dx, xbar, config.step_shrink),
                    step_length_positive(st.phi, dir.dphi, config.step_shrink),
                    step_length_positive(st.psi, dir.dpsi, config.step_shrink)});
      kernels::axpy(alpha, dir.du, st.u);
      st.lambda += alpha * dir.dlambda;
      kernels::axpy(alpha, dir.dx, st.x);
      kernels::axpy(alpha, dir.dphi, st.phi);
      kernels::axpy(alpha, dir.dpsi, st.psi);
      ++newton;

      for (Index i = 0; i < m; ++i) {
        if (!(st.x[i] > 0.0 && st.x[i] < xbar && st.phi[i] > 0.0 && st.psi[i] > 0.0)) {
          result.interior_maintained = false;
          break;
        }
      }
      k = model->stiffness(st.x);
      b = model->sensitivity(st.x, st.u);
      bundle = compute_residuals(st, k, b, f, volume, xbar);
      result.max_volume_error = std::max(result.max_volume_error, std::abs(bundle.res2) / volume);

      LogRow& row = log.add({});
      row.outer = log.outer_iterations + 1;
      row.newton = newton;
      row.event = "newton";
      row.s = st.s;
      row.r = st.r;
      row.cg_iterations = dir.cg_iterations;
      row.cg_tol = cg_tol;
      row.objective = compliance(f, st.u);
      row.res1_rel = kernels::norm2(bundle.res1) / kernels::norm2(f);
      row.kkt_error = scaled_kkt_error(st, bundle, f, xbar);
      row.alpha = alpha;
      row.lambda = st.lambda;
      row.volume_error = -bundle.res2 / volume;
      row.seconds = seconds_since(t0);
      if (config.on_step) config.on_step(st);

      if (!result.interior_maintained) {
        finish("failed", "state left the interior");
        return result;
      }
      if (newton_stop(bundle, f, st.phi, st.psi, config.tau_nwt)) {
        result.newton_per_barrier.push_back(newton);
        newton = 0;
        ++log.outer_iterations;
        st.s *= config.sigma_s;
        st.r *= config.sigma_r;
        if (config.cg_tol_mode == CgTolMode::decreasing) cg_tol *= 0.5;
        if (std::max(st.s, st.r) <= config.tau_ip) break;
        refresh_complementarity(st, xbar, bundle);
      }
    }
  } catch (const std::exception& e) {
    finish("failed", e.what());
    return result;
  }
  finish("converged", "");
  return result;
}

}  // namespace topopt
