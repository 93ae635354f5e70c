#include "topopt/run_log.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace topopt {

long RunLog::total_cg() const {
  long total = 0;
  for (const auto& row : rows) total += row.cg_iterations;
  return total;
}

double RunLog::avg_cg() const {
  return rows.empty() ? 0.0 : static_cast<double>(total_cg()) / static_cast<double>(rows.size());
}

LogRow& RunLog::add(LogRow row) {
  row.solve = feval() + 1;
  rows.push_back(std::move(row));
  return rows.back();
}

namespace {

void put(std::ostream& out, double v) {
  out << ',';
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void RunLog::write_csv(std::ostream& out, bool include_times) const {
  out << "solve,outer,newton,event,s,r,cg_iters,cg_tol,objective,delta_objective,res1_rel,"
         "kkt_error,alpha,lambda,volume_error";
  if (include_times) out << ",seconds";
  out << '\n';
  for (const auto& row : rows) {
    out << row.solve << ',' << row.outer << ',' << row.newton << ',' << row.event;
    put(out, row.s);
    put(out, row.r);
    out << ',' << row.cg_iterations;
    put(out, row.cg_tol);
    put(out, row.objective);
    put(out, row.delta_objective);
    put(out, row.res1_rel);
    put(out, row.kkt_error);
    put(out, row.alpha);
    put(out, row.lambda);
    put(out, row.volume_error);
    if (include_times) put(out, row.seconds);
    out << '\n';
  }
}

}  // namespace topopt
