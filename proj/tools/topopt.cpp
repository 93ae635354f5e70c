// Command-line front end: single runs and two-run comparisons.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "topopt/kernels.hpp"
#include "topopt/run.hpp"

namespace {

using namespace topopt;

// Raw option values; problem keys left unset keep the preset's values.
struct Options {
  std::string preset = "ex1";
  int levels = 3;
  std::string solver = "ipm";
  std::string linear = "mgcg";
  std::string model;
  double tau_ip = 1e-8;
  double tau_oc = 1e-5;
  double cg_tol = 0.0;
  std::string cg_tol_mode = "fixed";
  std::string cg_stop = "relative";
  double x_lower = 1e-9;
  double q = 0.5;
  int max_outer = 5000;
  int newton_cap = 50;
  double tau_nwt = 1e-1;
  double sigma = 0.2;
  int pre_sweeps = 4;
  int post_sweeps = 4;
  std::string out;
  std::string kernels = "auto";
  bool no_times = false;
  std::uint64_t seed = 0;

  int coarse_nx = 0;
  int coarse_ny = 0;
  std::string support;
  std::string load;
  double volume = 0.0;
  double upper_bound = 0.0;
  double young = 0.0;
  double poisson = -1.0;
  double penalty = 0.0;
  double filter_radius = 0.0;
  std::string filter_metric;
};

void add_run_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.add_option("--preset", o.preset, "Problem preset: ex1, ex2, ex3, ex4 or custom")
      ->capture_default_str();
  app.add_option("--levels", o.levels, "Refinement levels (1 = coarse mesh)")
      ->check(CLI::Range(1, 12))
      ->capture_default_str();
  app.add_option("--solver", o.solver)->check(CLI::IsMember({"ipm", "oc", "doc", "aoc"}))
      ->capture_default_str();
  app.add_option("--linear", o.linear)->check(CLI::IsMember({"mgcg", "direct"}))
      ->capture_default_str();
  app.add_option("--model", o.model, "Override the preset's model")
      ->check(CLI::IsMember({"vts", "simp"}));
  app.add_option("--tau-ip", o.tau_ip)->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--tau-oc", o.tau_oc)->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--cg-tol", o.cg_tol, "CG tolerance (default 1e-2 for ipm, start 1e-4 for OC)")
      ->check(CLI::PositiveNumber);
  app.add_option("--cg-tol-mode", o.cg_tol_mode)
      ->check(CLI::IsMember({"fixed", "decreasing"}))
      ->capture_default_str();
  app.add_option("--cg-stop", o.cg_stop, "relative: |r| <= tol |b|; product: |r| |b| <= tol")
      ->check(CLI::IsMember({"relative", "product"}))
      ->capture_default_str();
  app.add_option("--x-lower", o.x_lower)->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--q", o.q, "DOC damping exponent")->capture_default_str();
  app.add_option("--max-outer", o.max_outer)->capture_default_str();
  app.add_option("--newton-cap", o.newton_cap)->capture_default_str();
  app.add_option("--tau-nwt", o.tau_nwt)->capture_default_str();
  app.add_option("--sigma", o.sigma, "Barrier reduction factor")->capture_default_str();
  app.add_option("--pre-sweeps", o.pre_sweeps)->capture_default_str();
  app.add_option("--post-sweeps", o.post_sweeps)->capture_default_str();
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--kernels", o.kernels)->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
  app.add_flag("--no-times", o.no_times, "Omit wall times from log.csv");
  app.add_option("--seed", o.seed, "Reserved; no algorithm is randomized");

  app.add_option("--coarse-nx", o.coarse_nx)->check(CLI::PositiveNumber);
  app.add_option("--coarse-ny", o.coarse_ny)->check(CLI::PositiveNumber);
  app.add_option("--support", o.support)->check(CLI::IsMember({"left_edge", "bottom_corners"}));
  app.add_option("--load", o.load)->check(CLI::IsMember({"right_middle", "bottom_middle"}));
  app.add_option("--volume", o.volume)->check(CLI::PositiveNumber);
  app.add_option("--upper-bound", o.upper_bound)->check(CLI::PositiveNumber);
  app.add_option("--young", o.young)->check(CLI::PositiveNumber);
  app.add_option("--poisson", o.poisson);
  app.add_option("--penalty", o.penalty);
  app.add_option("--filter-radius", o.filter_radius);
  app.add_option("--filter-metric", o.filter_metric)
      ->check(CLI::IsMember({"manhattan", "euclidean"}));
}

RunConfig to_config(const Options& o) {
  RunConfig c;
  ProblemSpec& p = c.problem;
  p = preset(o.preset == "custom" ? "ex1" : o.preset, o.levels);
  if (o.preset == "custom") p.name = "custom";
  if (o.coarse_nx > 0) p.coarse_nx = o.coarse_nx;
  if (o.coarse_ny > 0) p.coarse_ny = o.coarse_ny;
  if (!o.support.empty()) {
    p.support = o.support == "left_edge" ? Support::left_edge : Support::bottom_corners;
  }
  if (!o.load.empty()) {
    p.load = o.load == "right_middle" ? LoadSite::right_middle : LoadSite::bottom_middle;
  }
  if (!o.model.empty()) p.model = o.model == "vts" ? Model::vts : Model::simp;
  p.volume = o.volume > 0.0 ? o.volume : static_cast<double>(p.finest_elements());
  if (o.upper_bound > 0.0) p.upper_bound = o.upper_bound;
  if (o.young > 0.0) p.young = o.young;
  if (o.poisson >= 0.0) p.poisson = o.poisson;
  if (o.penalty > 0.0) p.simp.penalty = o.penalty;
  if (o.filter_radius > 0.0) p.simp.filter_radius = o.filter_radius;
  if (!o.filter_metric.empty()) {
    p.simp.metric = o.filter_metric == "manhattan" ? FilterMetric::manhattan : FilterMetric::euclidean;
  }

  c.solver = parse_solver(o.solver);
  LinearSolverOptions linear;
  linear.kind = parse_linear_solver(o.linear);
  linear.smoother = SmootherConfig{o.pre_sweeps, o.post_sweeps};
  const auto form = o.cg_stop == "product" ? StoppingRule::Form::product : StoppingRule::Form::relative;

  c.ipm.tau_ip = o.tau_ip;
  c.ipm.tau_nwt = o.tau_nwt;
  c.ipm.sigma_s = c.ipm.sigma_r = o.sigma;
  c.ipm.newton_cap = o.newton_cap;
  c.ipm.cg_tol_mode = o.cg_tol_mode == "decreasing" ? CgTolMode::decreasing : CgTolMode::fixed;
  c.ipm.cg_form = form;
  c.ipm.linear = linear;
  if (o.cg_tol > 0.0) c.ipm.cg_tol = o.cg_tol;

  c.oc.tau_oc = o.tau_oc;
  c.oc.x_lower = o.x_lower;
  c.oc.q = o.q;
  c.oc.max_outer = o.max_outer;
  c.oc.cg_form = form;
  c.oc.linear = linear;
  if (o.cg_tol > 0.0) c.oc.cg_tol_start = o.cg_tol;

  c.out_dir = o.out;
  c.seed = o.seed;
  c.log_times = !o.no_times;
  return c;
}

RunConfig config_from_file(const std::string& path) {
  CLI::App app;
  Options o;
  add_run_options(app, o);
  const char* argv[] = {"topopt", "--config", path.c_str()};
  app.parse(3, const_cast<char**>(argv));
  kernels::select(kernels::parse_backend(o.kernels));
  return to_config(o);
}

void print_summary(const RunResult& r) {
  std::printf("status      %s%s%s\n", r.log.status.c_str(), r.log.reason.empty() ? "" : ": ",
              r.log.reason.c_str());
  std::printf("dofs        %d\nelements    %d\n", r.num_dofs, r.nx * r.ny);
  std::printf("outer iters %d\nfeval       %d\ntotal CG    %ld\navg CG      %.3f\n",
              r.log.outer_iterations, r.log.feval(), r.log.total_cg(), r.log.avg_cg());
  std::printf("objective   %.12g\nx_min       %.6g\n", r.log.objective, r.log.x_min);
  for (const auto& w : r.log.warnings) std::printf("warning     %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compliance topology optimization by interior point and optimality criteria methods"};
  app.require_subcommand(1);

  Options run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Solve one problem and write artifacts");
  add_run_options(*run_cmd, run_opts);

  std::string config_a;
  std::string config_b;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Solve two configurations of one problem");
  cmp_cmd->add_option("config_a", config_a, "First configuration file")->required()
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("config_b", config_b, "Second configuration file")->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      kernels::select(kernels::parse_backend(run_opts.kernels));
      const RunConfig config = to_config(run_opts);
      const RunResult result = run(config);
      print_summary(result);
      return result.log.status == "failed" ? 1 : 0;
    }
    const RunConfig a = config_from_file(config_a);
    const RunConfig b = config_from_file(config_b);
    const Comparison cmp = compare(a, b);
    write_comparison(std::cout, a, b, cmp);
    return cmp.a.log.status == "failed" || cmp.b.log.status == "failed" ? 1 : 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
