#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sparsegan {

/// Aggregate over the seeds of one (controller, d_g) cell.
struct ReportRow {
  std::string controller;
  double d_g = 0.0;
  std::size_t runs = 0;    // successful runs aggregated below
  std::size_t failed = 0;  // runs that ended FAILED (not aggregated)
  double best_fd_mean = 0.0;
  double best_fd_std = 0.0;
  double covered_mean = 0.0;
  double final_d_d_mean = 0.0;
  double normalized_flops_mean = 0.0;
  double normalized_flops_std = 0.0;
};

/// Reads <dir>/trailer.json from every run directory, skipping unreadable or
/// corrupt ones with a warning on stderr, and aggregates runs by
/// (controller, d_g). Writes a text table to `text` and, when csv_out is
/// given, a machine-readable copy. Throws ConfigError when no run could be
/// read at all.
std::vector<ReportRow> write_report(std::span<const std::filesystem::path> run_dirs,
                                    std::ostream& text,
                                    const std::optional<std::filesystem::path>& csv_out);

}  // namespace sparsegan
