#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topopt/fem.hpp"
#include "topopt/ipm.hpp"
#include "topopt/oc.hpp"
#include "topopt/run_log.hpp"

namespace topopt {

enum class SolverKind { ipm, oc, doc, aoc };

SolverKind parse_solver(std::string_view name);
const char* to_string(SolverKind kind);

struct RunConfig {
  ProblemSpec problem;
  SolverKind solver = SolverKind::ipm;
  IpmConfig ipm{};
  OcConfig oc{};
  std::filesystem::path out_dir;  ///< empty: no artifacts are written
  std::uint64_t seed = 0;         ///< reserved; no algorithm draws random numbers
  bool log_times = true;          ///< include wall-time columns in log.csv

  /// Throws std::invalid_argument for inconsistent combinations.
  void validate() const;
};

struct RunResult {
  RunLog log;
  Vector x;      ///< reported design (OC: lower-bound entries zeroed)
  Vector x_raw;  ///< design as iterated
  int nx = 0;
  int ny = 0;
  Index num_dofs = 0;
  std::vector<int> newton_per_barrier;
  double max_volume_error = 0.0;
};

/// Runs the configured pipeline. Algorithmic failures are reported in
/// result.log.status; invalid configurations throw. When out_dir is set,
/// writes density.pgm, density.csv, log.csv and summary.json there (also
/// after a failure).
RunResult run(const RunConfig& config);

std::string summary_json(const RunConfig& config, const RunResult& result);

/// 8-bit gray levels round(255 x / xbar), image rows from the top of the
/// domain downwards, nx pixels per row.
std::vector<std::uint8_t> density_pixels(std::span<const double> x, int nx, int ny,
                                         double upper_bound);

/// Writes `<stem>.pgm` (binary P5 graymap) and `<stem>.csv` (i, j, x per element).
void render_density(std::span<const double> x, int nx, int ny, double upper_bound,
                    const std::filesystem::path& stem);

bool same_problem(const ProblemSpec& a, const ProblemSpec& b);

struct Comparison {
  RunResult a;
  RunResult b;
  double diff_l2 = 0.0;
  double diff_linf = 0.0;
};

/// Runs both configurations (artifacts suppressed) and compares the reported
/// designs. Throws std::invalid_argument("mismatched problems") unless both
/// share the same ProblemSpec.
Comparison compare(const RunConfig& a, const RunConfig& b);

void write_comparison(std::ostream& out, const RunConfig& ca, const RunConfig& cb,
                      const Comparison& cmp);

}  // namespace topopt
