#include "sparsegan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

struct RunStats {
  std::string controller;
  double d_g = 0.0;
  bool failed = false;
  double best_fd = 0.0;
  double covered = 0.0;
  double final_d_d = 0.0;
  double normalized = 0.0;
};

std::optional<RunStats> read_run(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "trailer.json";
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "[report] warning: skipping %s (no trailer.json)\n",
                 dir.string().c_str());
    return std::nullopt;
  }
  nlohmann::json j;
  try {
    in >> j;
    RunStats st;
    st.controller = j.at("controller").get<std::string>();
    st.d_g = j.at("d_g").get<double>();
    st.failed = j.at("status").get<std::string>() == "FAILED";
    if (!st.failed) {
      const auto& fin = j.at("final");
      st.best_fd = fin.at("best_fd").get<double>();
      st.covered = static_cast<double>(fin.at("covered_modes").get<std::size_t>());
      st.final_d_d = fin.at("d_d").get<double>();
      st.normalized = j.at("flops").at("normalized").get<double>();
    }
    return st;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "[report] warning: skipping %s (corrupt trailer: %s)\n",
                 dir.string().c_str(), e.what());
    return std::nullopt;
  }
}

struct Accum {
  std::size_t failed = 0;
  std::vector<double> best_fd, covered, final_d_d, normalized;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<ReportRow> write_report(std::span<const std::filesystem::path> run_dirs,
                                    std::ostream& text,
                                    const std::optional<std::filesystem::path>& csv_out) {
  std::map<std::pair<std::string, double>, Accum> cells;
  std::size_t readable = 0;
  for (const auto& dir : run_dirs) {
    const std::optional<RunStats> st = read_run(dir);
    if (!st) continue;
    ++readable;
    Accum& acc = cells[{st->controller, st->d_g}];
    if (st->failed) {
      acc.failed += 1;
      continue;
    }
    acc.best_fd.push_back(st->best_fd);
    acc.covered.push_back(st->covered);
    acc.final_d_d.push_back(st->final_d_d);
    acc.normalized.push_back(st->normalized);
  }
  if (readable == 0) throw ConfigError("report: no readable run directories");

  std::vector<ReportRow> rows;
  for (const auto& [key, acc] : cells) {
    ReportRow r;
    r.controller = key.first;
    r.d_g = key.second;
    r.runs = acc.best_fd.size();
    r.failed = acc.failed;
    r.best_fd_mean = mean_of(acc.best_fd);
    r.best_fd_std = std_of(acc.best_fd);
    r.covered_mean = mean_of(acc.covered);
    r.final_d_d_mean = mean_of(acc.final_d_d);
    r.normalized_flops_mean = mean_of(acc.normalized);
    r.normalized_flops_std = std_of(acc.normalized);
    rows.push_back(r);
  }

  text << "controller      d_g    runs failed best_fd           covered  final_d_d  norm_flops\n";
  for (const ReportRow& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-15s %-6.3g %-4zu %-6zu %8.5f +- %7.5f %7.2f %10.3f %7.3f +- %5.3f\n",
                  r.controller.c_str(), r.d_g, r.runs, r.failed, r.best_fd_mean, r.best_fd_std,
                  r.covered_mean, r.final_d_d_mean, r.normalized_flops_mean,
                  r.normalized_flops_std);
    text << line;
  }

  if (csv_out) {
    std::ofstream csv(*csv_out);
    if (!csv) throw ConfigError("report: cannot write " + csv_out->string());
    csv << "controller,d_g,runs,failed,best_fd_mean,best_fd_std,covered_mean,final_d_d_mean,"
           "normalized_flops_mean,normalized_flops_std\n";
    for (const ReportRow& r : rows) {
      char line[256];
      std::snprintf(line, sizeof(line), "%s,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    r.controller.c_str(), r.d_g, r.runs, r.failed, r.best_fd_mean, r.best_fd_std,
                    r.covered_mean, r.final_d_d_mean, r.normalized_flops_mean,
                    r.normalized_flops_std);
      csv << line;
    }
  }
  return rows;
}

}  // namespace sparsegan
