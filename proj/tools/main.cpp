#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sparsegan/error.hpp"
#include "sparsegan/experiment.hpp"
#include "sparsegan/report.hpp"

namespace {

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

struct SweepArgs {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::size_t parallel = 1;
  bool timing = false;
};

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string csv;
};

void print_summary(const std::string& label, const sparsegan::RunSummary& s) {
  std::printf("%s: %s  iters=%llu/%llu  d_d=%.3f  best_fd=%.5f  covered=%zu  norm_flops=%.3f\n",
              label.c_str(), s.failed ? "FAILED" : "ok",
              static_cast<unsigned long long>(s.iterations_run),
              static_cast<unsigned long long>(s.iterations_total), s.final_d_d, s.best_fd,
              s.final_covered, s.normalized_flops);
  if (s.failed) std::printf("  error: %s\n", s.error.c_str());
}

int run_train(const TrainArgs& args) {
  sparsegan::ExperimentConfig cfg = sparsegan::load_config_file(args.config);
  if (args.seed) cfg.seed = *args.seed;
  sparsegan::RunOptions opts;
  opts.out_dir = args.out;
  opts.timing = args.timing;
  const sparsegan::RunResult res = sparsegan::run_experiment(cfg, opts);
  print_summary("train", res.summary);
  return res.summary.failed ? 3 : 0;
}

int run_sweep(const SweepArgs& args) {
  const sparsegan::ExperimentConfig base = sparsegan::load_config_file(args.config);
  const std::filesystem::path out_base =
      args.out.empty() ? std::filesystem::path(base.out) : std::filesystem::path(args.out);
  if (out_base.empty())
    throw sparsegan::ConfigError("sweep: no output directory (set 'out' or pass --out)");
  if (args.seeds.empty()) throw sparsegan::ConfigError("sweep: need at least one seed");

  std::vector<sparsegan::RunSummary> summaries(args.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  const std::size_t workers = std::max<std::size_t>(1, std::min(args.parallel, args.seeds.size()));

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= args.seeds.size()) return;
      sparsegan::ExperimentConfig cfg = base;
      cfg.seed = args.seeds[i];
      sparsegan::RunOptions opts;
      opts.out_dir = out_base / ("seed_" + std::to_string(cfg.seed));
      opts.timing = args.timing;
      try {
        summaries[i] = sparsegan::run_experiment(cfg, opts).summary;
      } catch (const std::exception& e) {
        summaries[i].failed = true;
        summaries[i].error = e.what();
      }
      const std::lock_guard<std::mutex> lock(io);
      print_summary("seed " + std::to_string(cfg.seed), summaries[i]);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (const auto& s : summaries) {
    if (s.failed) return 3;
  }
  return 0;
}

int run_report(const ReportArgs& args) {
  std::vector<std::filesystem::path> dirs(args.dirs.begin(), args.dirs.end());
  const std::optional<std::filesystem::path> csv =
      args.csv.empty() ? std::nullopt : std::optional<std::filesystem::path>(args.csv);
  sparsegan::write_report(dirs, std::cout, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse GAN training laboratory"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Run one experiment");
  train->add_option("--config", train_args.config, "Config file")->required();
  train->add_option("--out", train_args.out, "Output directory (overrides config 'out')");
  train->add_option("--seed", train_args.seed, "Seed override");
  train->add_flag("--timing", train_args.timing, "Record wall time in the CSV log");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Run one config over several seeds");
  sweep->add_option("--config", sweep_args.config, "Config file")->required();
  sweep->add_option("--out", sweep_args.out, "Output base directory");
  sweep->add_option("--seeds", sweep_args.seeds, "Seeds, e.g. --seeds 1,2,3")
      ->required()
      ->delimiter(',');
  sweep->add_option("--parallel", sweep_args.parallel, "Concurrent runs")->default_val(1);
  sweep->add_flag("--timing", sweep_args.timing, "Record wall time in the CSV logs");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Summarize finished runs");
  report->add_option("dirs", report_args.dirs, "Run directories")->required();
  report->add_option("--csv", report_args.csv, "Also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return run_train(train_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
    if (report->parsed()) return run_report(report_args);
  } catch (const sparsegan::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
