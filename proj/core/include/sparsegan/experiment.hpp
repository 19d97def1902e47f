#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparsegan/config.hpp"

namespace sparsegan {

/// One CSV log record, written every eval_interval iterations and at the end.
/// br is the most recent instantaneous balance ratio (nan before the first
/// valid sample), br_avg the ring-window average.
struct LogRow {
  std::uint64_t iter = 0;
  double br = 0.0;
  double br_avg = 0.0;
  double d_d = 0.0;
  std::size_t active_g = 0;
  std::size_t active_d = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double fd = 0.0;
  std::size_t covered_modes = 0;
  double hq_fraction = 0.0;
  std::uint64_t flops = 0;
  double wall_ms = 0.0;
};

/// Header string for the CSV log, matching LogRow's fields in order.
const char* log_header();

/// Topology/density change recorded in the run trailer.
struct DensityEvent {
  enum class Type { SetDensity, DiscDst, GenDst, Prune };
  std::uint64_t iter = 0;
  Type type = Type::SetDensity;
  double d_d_before = 0.0;   // controller density before the event
  double d_d_after = 0.0;    // controller density after the event
  std::size_t active_g = 0;  // counts after the event
  std::size_t active_d = 0;
  std::size_t k = 0;         // drop/grow count for topology events
};

const char* density_event_name(DensityEvent::Type type);

struct RunSummary {
  bool failed = false;
  std::string error;

  std::uint64_t iterations_run = 0;
  std::uint64_t iterations_total = 0;

  std::size_t init_active_g = 0;  // counts right after mask init, before t=1
  std::size_t init_active_d = 0;

  double final_d_d = 0.0;
  std::size_t final_active_g = 0;
  std::size_t final_active_d = 0;
  double final_br_avg = 0.0;  // nan when the window never filled
  double final_fd = 0.0;
  double best_fd = 0.0;
  std::size_t final_covered = 0;
  double final_hq = 0.0;

  std::uint64_t g_forward_flops = 0;
  std::uint64_t g_backward_flops = 0;
  std::uint64_t d_forward_flops = 0;
  std::uint64_t d_backward_flops = 0;
  std::uint64_t total_flops = 0;
  std::uint64_t dense_total_flops = 0;
  double normalized_flops = 0.0;

  std::uint64_t controller_boundaries = 0;
  std::uint64_t density_events = 0;
  std::uint64_t disc_dst_events = 0;
  std::uint64_t g_dst_events = 0;
  std::vector<DensityEvent> events;

  double wall_ms = 0.0;
};

struct RunResult {
  LogRow final_row;
  RunSummary summary;
};

struct RunOptions {
  std::filesystem::path out_dir;  // falls back to cfg.out when empty

  /// When false (the default) the wall_ms CSV column is written as 0 so logs
  /// from identical configs and seeds are byte-identical; measured wall time
  /// is always available in the trailer.
  bool timing = false;

  /// Test hook: when set, replaces the balance ratio pushed at iteration t.
  /// Returning nullopt keeps the measured sample.
  std::function<std::optional<double>(std::uint64_t)> br_override;
};

/// Runs one experiment, writing <out>/log.csv row by row and <out>/trailer.json
/// at the end. Non-finite training values mark the run FAILED in the trailer
/// and stop it early; partial logs are kept and no exception escapes for that
/// case. Configuration problems throw ConfigError before any training.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace sparsegan
