#include "topopt/oc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "topopt/kernels.hpp"
#include "topopt/multigrid.hpp"

namespace topopt {

OcVariant parse_oc_variant(std::string_view name) {
  if (name == "oc") return OcVariant::oc;
  if (name == "doc") return OcVariant::doc;
  if (name == "aoc") return OcVariant::aoc;
  throw std::invalid_argument("unknown OC variant '" + std::string(name) + "'");
}

const char* to_string(OcVariant variant) {
  switch (variant) {
    case OcVariant::oc: return "oc";
    case OcVariant::doc: return "doc";
    case OcVariant::aoc: return "aoc";
  }
  return "oc";
}

void OcConfig::validate() const {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("damping exponent must lie in (0, 1]");
  if (!(tau_lambda > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  if (!(tau_oc >= 0.0)) throw std::invalid_argument("OC tolerance must be nonnegative");
  if (!(x_lower > 0.0)) throw std::invalid_argument("lower bound must be strictly positive");
  if (!(lambda_upper > 0.0)) throw std::invalid_argument("lambda bracket must be positive");
  if (!(cg_tol_start > 0.0) || !(cg_tol_shrink > 0.0 && cg_tol_shrink < 1.0)) {
    throw std::invalid_argument("invalid CG tolerance schedule");
  }
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
}

namespace {

double exponent_of(const OcConfig& config) {
  return config.variant == OcVariant::doc ? config.q : 1.0;
}

double attained_volume(std::span<const double> num, double lambda, double lower, double upper,
                       Vector* out) {
  double vol = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    double v;
    if (lambda > 0.0) {
      v = std::clamp(num[i] / lambda, lower, upper);
    } else {
      v = num[i] > 0.0 ? upper : lower;
    }
    if (out) (*out)[i] = v;
    vol += v;
  }
  return vol;
}

}  // namespace

Bisection bisect_lambda(std::span<const double> x, std::span<const double> g, double volume,
                        double upper_bound, const OcConfig& config) {
  if (x.size() != g.size()) throw std::invalid_argument("bisect_lambda: size mismatch");
  const double power = exponent_of(config);
  Vector num(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (g[i] < 0.0) throw std::invalid_argument("element energies must be nonnegative");
    num[i] = x[i] * (power == 1.0 ? g[i] : std::pow(g[i], power));
  }
  double lo = 0.0;
  double hi = config.lambda_upper;
  const double lower = config.x_lower;
  if (attained_volume(num, hi, lower, upper_bound, nullptr) > volume ||
      attained_volume(num, lo, lower, upper_bound, nullptr) < volume) {
    throw std::runtime_error("volume unreachable");
  }
  Bisection out;
  out.x.assign(x.size(), 0.0);
  double lambda = 0.5 * (lo + hi);
  attained_volume(num, lambda, lower, upper_bound, &out.x);
  while (hi - lo > config.tau_lambda) {
    lambda = 0.5 * (lo + hi);
    const double vol = attained_volume(num, lambda, lower, upper_bound, &out.x);
    if (vol > volume) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    ++out.steps;
  }
  out.lambda = lambda;
  out.bracket_width = hi - lo;
  return out;
}

Vector oc_step(std::span<const double> x, std::span<const double> g, double volume,
               double upper_bound, const OcConfig& config) {
  return bisect_lambda(x, g, volume, upper_bound, config).x;
}

AveragedStep aoc_step(std::span<const double> x, std::span<const double> g, double volume,
                      double upper_bound, const OcConfig& config,
                      const std::function<Vector(std::span<const double>)>& energies) {
  OcConfig plain = config;
  plain.variant = OcVariant::oc;
  AveragedStep out;
  out.first = oc_step(x, g, volume, upper_bound, plain);
  const Vector g1 = energies(out.first);
  out.second = oc_step(out.first, g1, volume, upper_bound, plain);
  out.x.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.x[i] = 0.5 * (out.first[i] + out.second[i]);
  return out;
}

OcResult oc_solve(const FeProblem& problem, const OcConfig& config) {
  config.validate();
  problem.spec.validate();
  if (problem.spec.model != Model::vts) {
    throw std::invalid_argument("OC methods support the VTS model only");
  }
  const Mesh& mesh = problem.finest();
  const Vector& f = problem.load;
  const double volume = problem.spec.volume;
  const double xbar = problem.spec.upper_bound;
  const Index m = mesh.num_elements();
  if (!(config.x_lower * m < volume)) {
    throw std::invalid_argument("lower bound too large for the prescribed volume");
  }

  SpdSolver solver(config.linear, build_prolongations(problem.meshes, false));
  const bool guarded = config.linear.kind == LinearSolverKind::mgcg;

  OcResult result;
  RunLog& log = result.log;
  log.solver = to_string(config.variant);
  Vector& x = result.x;
  Vector& u = result.u;
  x.assign(m, volume / m);
  double cg_tol = config.cg_tol_start;
  int unconverged_solves = 0;

  auto equilibrium = [&](std::span<const double> design, Vector warm, LogRow row) {
    const auto t0 = std::chrono::steady_clock::now();
    PcgOutcome sol = solver.solve(assemble_stiffness(mesh, problem.ke, design), f, std::move(warm),
                                  StoppingRule{cg_tol, config.cg_form});
    if (!sol.converged) ++unconverged_solves;
    row.cg_iterations = sol.iterations;
    row.cg_tol = cg_tol;
    row.objective = compliance(f, sol.solution);
    row.volume_error =
        (std::accumulate(design.begin(), design.end(), 0.0) - volume) / volume;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.add(std::move(row));
    return std::move(sol.solution);
  };
  auto make_row = [&](const char* event) {
    LogRow row;
    row.outer = log.outer_iterations;
    row.event = event;
    return row;
  };

  auto finish = [&](std::string status, std::string reason) {
    log.status = std::move(status);
    log.reason = std::move(reason);
    log.linear_seconds = solver.seconds();
    log.objective = u.empty() ? kNotApplicable : compliance(f, u);
    result.x_reported = x;
    double x_min = kNotApplicable;
    for (double& v : result.x_reported) {
      if (v <= config.x_lower) {
        v = 0.0;
      } else if (std::isnan(x_min) || v < x_min) {
        x_min = v;
      }
    }
    log.x_min = x_min;
    if (unconverged_solves > 0) {
      log.warnings.push_back(std::to_string(unconverged_solves) +
                             " linear solves stopped at the iteration cap");
    }
  };

  try {
    u = equilibrium(x, {}, make_row("init"));
    double work = kernels::dot(f, u);
    while (log.outer_iterations < config.max_outer) {
      const Vector g = element_energies(mesh, problem.ke, u);
      Vector x_new;
      double lambda = kNotApplicable;
      if (config.variant == OcVariant::aoc) {
        auto inner = [&](std::span<const double> design) {
          const Vector ui = equilibrium(design, u, make_row("aoc-inner"));
          return element_energies(mesh, problem.ke, ui);
        };
        x_new = aoc_step(x, g, volume, xbar, config, inner).x;
      } else {
        Bisection bis = bisect_lambda(x, g, volume, xbar, config);
        x_new = std::move(bis.x);
        lambda = bis.lambda;
      }
      LogRow row = make_row("step");
      row.outer = log.outer_iterations + 1;
      row.lambda = lambda;
      Vector u_new = equilibrium(x_new, u, row);
      const double work_new = kernels::dot(f, u_new);
      if (guarded && work_new > work) {
        log.rows.back().event = "rejected";
        log.rows.back().delta_objective = 0.5 * (work_new - work);
        cg_tol *= config.cg_tol_shrink;
        if (cg_tol < config.cg_tol_floor) {
          finish("failed", "iterative solver cannot sustain descent");
          return result;
        }
        u = equilibrium(x, u, make_row("retry"));
        work = kernels::dot(f, u);
        continue;
      }
      log.rows.back().delta_objective = 0.5 * (work_new - work);
      ++log.outer_iterations;
      const double change = std::abs(work_new - work);
      x = std::move(x_new);
      u = std::move(u_new);
      work = work_new;
      result.max_volume_error = std::max(
          result.max_volume_error,
          std::abs(std::accumulate(x.begin(), x.end(), 0.0) - volume) / volume);
      if (change <= config.tau_oc) {
        finish("converged", "");
        return result;
      }
    }
  } catch (const std::exception& e) {
    finish("failed", e.what());
    return result;
  }
  finish("max_outer", "iteration cap reached");
  return result;
}

}  // namespace topopt
