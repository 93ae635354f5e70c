#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace topopt {

inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

/// One row per linear system solved. Fields that do not apply to the solver
/// that produced the row hold kNotApplicable (written as empty CSV cells).
struct LogRow {
  int solve = 0;  ///< 1-based linear-solve counter
  int outer = 0;  ///< barrier index (IP) or accepted iteration (OC)
  int newton = 0; ///< Newton step within the current barrier value (IP)
  std::string event;
  double s = kNotApplicable;
  double r = kNotApplicable;
  int cg_iterations = 0;
  double cg_tol = kNotApplicable;
  double objective = kNotApplicable;
  double delta_objective = kNotApplicable;
  double res1_rel = kNotApplicable;
  double kkt_error = kNotApplicable;
  double alpha = kNotApplicable;
  double lambda = kNotApplicable;
  double volume_error = kNotApplicable;
  double seconds = 0.0;
};

struct RunLog {
  std::string solver;
  std::vector<LogRow> rows;

  std::string status = "running";  ///< converged | failed
  std::string reason;
  std::vector<std::string> warnings;
  int outer_iterations = 0;
  double objective = kNotApplicable;
  double x_min = kNotApplicable;
  double linear_seconds = 0.0;

  int feval() const { return static_cast<int>(rows.size()); }
  long total_cg() const;
  double avg_cg() const;
  bool converged() const { return status == "converged"; }

  LogRow& add(LogRow row);
  void write_csv(std::ostream& out, bool include_times = true) const;
};

}  // namespace topopt
