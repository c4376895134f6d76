#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "zoadmm/diagnostics.hpp"

namespace zoadmm {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_wall(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kTraceHeader = "iter,epoch,evals,diag_evals,wall_s,objective,lagrangian,primal_res,stat_gap,theta";

/// One row per iteration; every column except wall_s is reproducible for a
/// fixed config and seed. stat_gap prints as nan on unsampled iterations.
inline void write_trace_csv(const std::string& path, const std::vector<IterationTrace>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << kTraceHeader << '\n';
  for (const auto& row : rows) {
    out << row.iter << ',' << row.epoch << ',' << row.evals << ',' << row.diag_evals << ','
        << detail::format_wall(row.wall_s) << ',' << detail::format_double(row.objective) << ','
        << detail::format_double(row.lagrangian) << ',' << detail::format_double(row.primal_res) << ','
        << detail::format_double(row.stat_gap) << ',' << detail::format_double(row.theta) << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

struct SummaryRow {
  std::uint64_t seed = 0;
  std::string variant;
  long iterations = 0;
  long batch_size = 0;
  long epoch_length = 0;
  double eta = 0.0;
  double rho = 0.0;
  double r = 0.0;
  long long evals = 0;
  long long diag_evals = 0;
  double objective = 0.0;       // at the selected iterate
  double best_objective = 0.0;  // smallest traced objective
  long selected_iter = 0;
  double selected_theta = 0.0;
  double wall_s = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "seed,variant,iterations,batch_size,epoch_length,eta,rho,r,evals,diag_evals,objective,best_objective,"
    "selected_iter,selected_theta,wall_s";

inline void append_summary_csv(const std::string& path, const SummaryRow& row) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (fresh) out << kSummaryHeader << '\n';
  out << row.seed << ',' << row.variant << ',' << row.iterations << ',' << row.batch_size << ','
      << row.epoch_length << ',' << detail::format_double(row.eta) << ',' << detail::format_double(row.rho) << ','
      << detail::format_double(row.r) << ',' << row.evals << ',' << row.diag_evals << ','
      << detail::format_double(row.objective) << ',' << detail::format_double(row.best_objective) << ','
      << row.selected_iter << ',' << detail::format_double(row.selected_theta) << ','
      << detail::format_wall(row.wall_s) << '\n';
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace zoadmm
