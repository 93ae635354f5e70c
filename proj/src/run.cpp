#include "topopt/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace topopt {

SolverKind parse_solver(std::string_view name) {
  if (name == "ipm") return SolverKind::ipm;
  if (name == "oc") return SolverKind::oc;
  if (name == "doc") return SolverKind::doc;
  if (name == "aoc") return SolverKind::aoc;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::ipm: return "ipm";
    case SolverKind::oc: return "oc";
    case SolverKind::doc: return "doc";
    case SolverKind::aoc: return "aoc";
  }
  return "ipm";
}

void RunConfig::validate() const {
  problem.validate();
  if (problem.model == Model::simp && solver != SolverKind::ipm) {
    throw std::invalid_argument("SIMP model requires the ipm solver");
  }
  if (solver == SolverKind::ipm) {
    ipm.validate();
  } else {
    oc.validate();
  }
}

namespace {

OcConfig oc_config_for(const RunConfig& config) {
  OcConfig oc = config.oc;
  oc.variant = config.solver == SolverKind::doc   ? OcVariant::doc
               : config.solver == SolverKind::aoc ? OcVariant::aoc
                                                  : OcVariant::oc;
  return oc;
}

const char* linear_name(const RunConfig& config) {
  return to_string(config.solver == SolverKind::ipm ? config.ipm.linear.kind
                                                    : config.oc.linear.kind);
}

void write_artifacts(const RunConfig& config, const RunResult& result) {
  std::filesystem::create_directories(config.out_dir);
  render_density(result.x, result.nx, result.ny, config.problem.upper_bound,
                 config.out_dir / "density");
  {
    std::ofstream out(config.out_dir / "log.csv");
    result.log.write_csv(out, config.log_times);
    if (!out) throw std::runtime_error("cannot write log.csv");
  }
  std::ofstream out(config.out_dir / "summary.json");
  out << summary_json(config, result) << '\n';
  if (!out) throw std::runtime_error("cannot write summary.json");
}

}  // namespace

RunResult run(const RunConfig& config) {
  config.validate();
  const FeProblem problem = FeProblem::build(config.problem);
  RunResult result;
  result.nx = problem.finest().nx();
  result.ny = problem.finest().ny();
  result.num_dofs = problem.num_dofs();
  if (config.solver == SolverKind::ipm) {
    IpmResult ip = ipm_solve(problem, config.ipm);
    result.log = std::move(ip.log);
    result.x = ip.state.x;
    result.x_raw = std::move(ip.state.x);
    result.newton_per_barrier = std::move(ip.newton_per_barrier);
    result.max_volume_error = ip.max_volume_error;
  } else {
    OcResult oc = oc_solve(problem, oc_config_for(config));
    result.log = std::move(oc.log);
    result.x = std::move(oc.x_reported);
    result.x_raw = std::move(oc.x);
    result.max_volume_error = oc.max_volume_error;
  }
  if (!config.out_dir.empty()) write_artifacts(config, result);
  return result;
}

std::string summary_json(const RunConfig& config, const RunResult& result) {
  using nlohmann::json;
  const RunLog& log = result.log;
  auto number = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json j;
  j["solver"] = to_string(config.solver);
  j["linear"] = linear_name(config);
  j["model"] = config.problem.model == Model::vts ? "vts" : "simp";
  j["problem"] = config.problem.name;
  j["levels"] = config.problem.levels;
  j["nx"] = result.nx;
  j["ny"] = result.ny;
  j["elements"] = result.nx * result.ny;
  j["dofs"] = result.num_dofs;
  j["volume"] = config.problem.volume;
  j["upper_bound"] = config.problem.upper_bound;
  j["status"] = log.status;
  j["reason"] = log.reason;
  j["warnings"] = log.warnings;
  j["feval"] = log.feval();
  j["total_cg_iters"] = log.total_cg();
  j["avg_cg_per_solve"] = log.avg_cg();
  j["outer_iters"] = log.outer_iterations;
  j["objective"] = number(log.objective);
  j["x_min"] = number(log.x_min);
  j["max_volume_error"] = result.max_volume_error;
  j["linear_seconds"] = log.linear_seconds;
  if (config.solver == SolverKind::ipm) {
    j["tau_ip"] = config.ipm.tau_ip;
    j["cg_tol"] = config.ipm.cg_tol;
    j["cg_tol_mode"] = config.ipm.cg_tol_mode == CgTolMode::fixed ? "fixed" : "decreasing";
    j["newton_per_barrier"] = result.newton_per_barrier;
  } else {
    j["tau_oc"] = config.oc.tau_oc;
    j["x_lower"] = config.oc.x_lower;
  }
  return j.dump(2);
}

std::vector<std::uint8_t> density_pixels(std::span<const double> x, int nx, int ny,
                                         double upper_bound) {
  if (static_cast<long>(x.size()) != static_cast<long>(nx) * ny) {
    throw std::invalid_argument("density field does not match the mesh");
  }
  std::vector<std::uint8_t> pixels(x.size());
  for (int row = 0; row < ny; ++row) {
    const int j = ny - 1 - row;
    for (int i = 0; i < nx; ++i) {
      const double t = std::clamp(x[static_cast<std::size_t>(i) * ny + j] / upper_bound, 0.0, 1.0);
      pixels[static_cast<std::size_t>(row) * nx + i] =
          static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  }
  return pixels;
}

void render_density(std::span<const double> x, int nx, int ny, double upper_bound,
                    const std::filesystem::path& stem) {
  const auto pixels = density_pixels(x, nx, ny, upper_bound);
  auto pgm_path = stem;
  pgm_path += ".pgm";
  std::ofstream pgm(pgm_path, std::ios::binary);
  pgm << "P5\n" << nx << ' ' << ny << "\n255\n";
  pgm.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!pgm) throw std::runtime_error("cannot write " + pgm_path.string());

  auto csv_path = stem;
  csv_path += ".csv";
  std::ofstream csv(csv_path);
  csv << "i,j,x\n";
  char buf[32];
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x[static_cast<std::size_t>(i) * ny + j]);
      csv << i << ',' << j << ',' << buf << '\n';
    }
  }
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
}

bool same_problem(const ProblemSpec& a, const ProblemSpec& b) {
  return a.coarse_nx == b.coarse_nx && a.coarse_ny == b.coarse_ny && a.levels == b.levels &&
         a.support == b.support && a.load == b.load && a.volume == b.volume &&
         a.upper_bound == b.upper_bound && a.young == b.young && a.poisson == b.poisson &&
         a.model == b.model &&
         (a.model == Model::vts ||
          (a.simp.penalty == b.simp.penalty && a.simp.filter_radius == b.simp.filter_radius &&
           a.simp.metric == b.simp.metric));
}

Comparison compare(const RunConfig& a, const RunConfig& b) {
  if (!same_problem(a.problem, b.problem)) throw std::invalid_argument("mismatched problems");
  RunConfig ca = a;
  RunConfig cb = b;
  ca.out_dir.clear();
  cb.out_dir.clear();
  Comparison cmp{run(ca), run(cb)};
  double sq = 0.0;
  for (std::size_t i = 0; i < cmp.a.x.size(); ++i) {
    const double d = std::abs(cmp.a.x[i] - cmp.b.x[i]);
    sq += d * d;
    cmp.diff_linf = std::max(cmp.diff_linf, d);
  }
  cmp.diff_l2 = std::sqrt(sq);
  return cmp;
}

void write_comparison(std::ostream& out, const RunConfig& ca, const RunConfig& cb,
                      const Comparison& cmp) {
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-7s %-10s %6s %9s %8s %16s\n", "run", "solver", "linear",
                "feval", "total_cg", "avg_cg", "objective");
  out << line;
  auto row = [&](const char* tag, const RunConfig& c, const RunResult& r) {
    std::snprintf(line, sizeof line, "%-6s %-7s %-10s %6d %9ld %8.3f %16.10g  %s\n", tag,
                  to_string(c.solver), linear_name(c), r.log.feval(), r.log.total_cg(),
                  r.log.avg_cg(), r.log.objective, r.log.status.c_str());
    out << line;
  };
  row("A", ca, cmp.a);
  row("B", cb, cmp.b);
  std::snprintf(line, sizeof line, "||x_A - x_B||_2   = %.6e\n||x_A - x_B||_inf = %.6e\n",
                cmp.diff_l2, cmp.diff_linf);
  out << line;
}

}  // namespace topopt
