#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "sparsegan/config.hpp"
#include "sparsegan/dataset.hpp"
#include "sparsegan/error.hpp"
#include "sparsegan/experiment.hpp"
#include "sparsegan/metrics.hpp"
#include "sparsegan/report.hpp"
#include "sparsegan/sparsity.hpp"

using namespace sparsegan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBase = "controller = static\nd_g = 0.4\n";

void expect_cfg_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text, "t");
    FAIL_CHECK("expected ConfigError containing '" << needle << "'");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_trailer(const fs::path& dir) { return json::parse(slurp(dir / "trailer.json")); }

std::vector<std::string> csv_lines(const fs::path& dir) {
  std::istringstream in(slurp(dir / "log.csv"));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// Small/fast experiment base; the caller appends the keys a test varies
// (parse_config rejects duplicate keys, so the base holds only fixed ones).
std::string tiny_run(const std::string& controller, const std::string& extra) {
  return "controller = " + controller + "\n" +
         "g_widths = [8, 8]\n"
         "d_widths = [8, 8]\n"
         "n_dis = 2\n"
         "batch_g = 8\n"
         "batch_d = 8\n"
         "delta_t_g = 10\n"
         "delta_t_d = 10\n"
         "br_window = 8\n"
         "metric_samples = 64\n" +
         extra;
}

// Mirrors the controller's density step arithmetic (including the snap band
// at the walls) so event expectations are exact doubles, not approximations.
double step_up(double d, double delta, double d_max) {
  const double cand = d + delta;
  return cand >= d_max - 1e-9 ? d_max : cand;
}
double step_down(double d, double delta, double d_min) {
  const double cand = d - delta;
  return cand <= d_min + 1e-9 ? d_min : cand;
}

std::size_t count_of(double density, std::size_t total) {
  const auto n = std::llround(density * static_cast<double>(total));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max<long long>(0, n)));
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const ExperimentConfig cfg = parse_config(kBase);
  CHECK(cfg.controller == ControllerKind::Static);
  CHECK(cfg.d_g == 0.4);
  CHECK(cfg.dataset.kind == DatasetSpec::Kind::Ring);
  CHECK(cfg.dataset.count == 8);
  CHECK(cfg.dataset.scale == 2.0);
  CHECK(cfg.dataset.sigma == 0.05);
  CHECK(cfg.latent_dim == 2);
  CHECK(cfg.g_widths == std::vector<std::size_t>{64, 64});
  CHECK(cfg.d_widths == std::vector<std::size_t>{64, 64});
  CHECK(cfg.loss == LossKind::Hinge);
  CHECK(cfg.d_d_init == 0.4);  // balance strategy copies d_g
  CHECK(cfg.d_max == 1.0);
  CHECK(cfg.d_min == 0.05);  // defaults to delta_d
  CHECK(cfg.alloc_mode == AllocMode::Er);
  CHECK(cfg.grow_mode == GrowMode::Gradient);
  CHECK(cfg.delta_t_g == 500);
  CHECK(cfg.delta_t_d == 1000);
  CHECK(cfg.delta_d == 0.05);
  CHECK(cfg.gamma == 0.5);
  CHECK(cfg.b_lo == 0.45);
  CHECK(cfg.b_hi == 0.55);
  CHECK(cfg.br_window == 1000);
  CHECK(cfg.br_eval_interval == 1);
  CHECK(cfg.adam.lr == 2e-4);
  CHECK(cfg.adam.beta1 == 0.0);
  CHECK(cfg.adam.beta2 == 0.9);
  CHECK(cfg.adam.eps == 1e-8);
  CHECK(cfg.n_dis == 5);
  CHECK(cfg.batch_g == 128);
  CHECK(cfg.batch_d == 64);
  CHECK(cfg.iterations == 20000);
  CHECK(cfg.ema_beta == 0.999);
  CHECK(cfg.seed == 1);
  CHECK(cfg.eval_interval == 500);
  CHECK(cfg.metric_samples == 4096);
  CHECK(cfg.out.empty());
}

TEST_CASE("explicit values survive the round trip") {
  const ExperimentConfig cfg = parse_config(
      "controller = dst_both\n"
      "dataset = grid\n"
      "grid_m = 3\n"
      "grid_spacing = 1.5\n"
      "grid_sigma = 0.1\n"
      "latent_dim = 3\n"
      "g_widths = [5, 6]\n"
      "d_widths = [7]\n"
      "loss = wasserstein\n"
      "d_g = 0.25\n"
      "alloc_mode = erk\n"
      "grow_mode = random\n"
      "delta_t_g = 100\n"
      "delta_t_d = 200\n"
      "gamma = 0.3\n"
      "lr = 1e-3\n"
      "iterations = 400\n"
      "seed = 42\n"
      "out = \"runs/demo\"  # trailing comment\n");
  CHECK(cfg.controller == ControllerKind::DstBoth);
  CHECK(cfg.dataset.kind == DatasetSpec::Kind::Grid);
  CHECK(cfg.dataset.count == 3);
  CHECK(cfg.dataset.mode_count() == 9);
  CHECK(cfg.dataset.scale == 1.5);
  CHECK(cfg.loss == LossKind::Wasserstein);
  CHECK(cfg.alloc_mode == AllocMode::Erk);
  CHECK(cfg.grow_mode == GrowMode::Random);
  CHECK(cfg.gamma == 0.3);
  CHECK(cfg.adam.lr == 1e-3);
  CHECK(cfg.seed == 42);
  CHECK(cfg.out == "runs/demo");
  CHECK(cfg.generator_dims() == std::vector<std::size_t>{3, 5, 6, 2});
  CHECK(cfg.discriminator_dims() == std::vector<std::size_t>{2, 7, 1});
  CHECK(cfg.total_iterations() == 400);
}

TEST_CASE("posthoc extends the schedule by half") {
  const ExperimentConfig cfg =
      parse_config("controller = posthoc\nd_g = 0.3\niterations = 1000\n");
  CHECK(cfg.total_iterations() == 1500);
  CHECK(cfg.d_d_init == 1.0);
}

TEST_CASE("discriminator density resolution follows controller and strategy") {
  CHECK(parse_config("controller = static\nd_g = 0.3\n").d_d_init == 0.3);
  CHECK(parse_config("controller = static\nd_g = 0.3\ndensity_strategy = strong\n").d_d_init ==
        1.0);
  CHECK(parse_config("controller = static\nd_g = 0.3\ndensity_strategy = strong\nd_max = 0.8\n")
            .d_d_init == 0.8);
  CHECK(parse_config("controller = sdst\nd_g = 0.3\ndensity_strategy = strong\n").d_d_init == 1.0);
  CHECK(parse_config("controller = dda\nd_g = 0.3\n").d_d_init == 0.3);
  CHECK(parse_config("controller = adapt_relax\nd_g = 0.3\n").d_d_init == 0.3);
  CHECK(parse_config("controller = adapt_strict\nd_g = 0.3\nd_max = 0.5\n").d_d_init == 0.3);
  CHECK(parse_config("controller = static\nd_g = 0.3\nd_d_init = 0.7\n").d_d_init == 0.7);
}

TEST_CASE("config rejections") {
  expect_cfg_error("d_g = 0.4\n", "controller");
  expect_cfg_error("controller = static\n", "d_g");
  expect_cfg_error("controller = frob\nd_g = 0.4\n", "unknown controller");
  expect_cfg_error(kBase + "frobnicate = 1\n", "t:3: unknown key 'frobnicate'");
  expect_cfg_error("controller = static\ncontroller = sdst\n", "t:2: duplicate key");
  expect_cfg_error(kBase + "bogus line\n", "t:3: expected 'key = value'");
  expect_cfg_error(kBase + "lr =\n", "empty key or value");
  expect_cfg_error(kBase + "lr = banana\n", "expected a finite number");
  expect_cfg_error(kBase + "seed = -5\n", "expected a non-negative integer");
  expect_cfg_error(kBase + "g_widths = 64, 64\n", "expected a list");
  expect_cfg_error(kBase + "g_widths = []\n", "list must not be empty");
  expect_cfg_error(kBase + "g_widths = [64, 0]\n", "widths must be positive");
  expect_cfg_error("controller = static\nd_g = 0\n", "must be in (0, 1]");
  expect_cfg_error("controller = static\nd_g = 1.2\n", "must be in (0, 1]");
  expect_cfg_error(kBase + "gamma = 0\n", "must be in (0, 1]");
  expect_cfg_error(kBase + "b_lo = 0.6\nb_hi = 0.5\n", "strictly below");
  expect_cfg_error(kBase + "delta_d = 1.0\n", "must be in (1e-6, 1)");
  expect_cfg_error(kBase + "d_min = 0.9\nd_max = 0.8\n", "must not exceed d_max");
  expect_cfg_error(kBase + "ema_beta = 1.0\n", "must be in (0, 1)");
  expect_cfg_error(kBase + "iterations = 100\ndelta_t_g = 200\n",
                   "must cover at least one generator topology interval");
  expect_cfg_error(kBase + "metric_samples = 1\n", "at least 2");
  expect_cfg_error(kBase + "grid_m = 3\n", "unknown key 'grid_m'");
  expect_cfg_error("controller = adapt_strict\nd_g = 0.3\n", "explicit density cap");
  expect_cfg_error("controller = adapt_strict\nd_g = 0.3\nd_max = 1.0\n", "strictly below 1.0");
  expect_cfg_error("controller = adapt_relax\nd_g = 0.3\nd_max = 0.5\n",
                   "densification to 1.0");
  expect_cfg_error("controller = posthoc\nd_g = 0.3\nd_d_init = 0.5\n",
                   "keeps the discriminator dense");
  expect_cfg_error("controller = dda\nd_g = 0.02\n", "within [d_min, d_max]");
  expect_cfg_error(kBase + "dataset = cubes\n", "unknown dataset");
  expect_cfg_error(kBase + "loss = l2\n", "unknown loss");
}

TEST_CASE("config files load by path and fail cleanly when missing") {
  const fs::path dir = testutil::fresh_dir("harness_cfg");
  const fs::path file = dir / "exp.cfg";
  std::ofstream(file) << "# comment only line\ncontroller = sdst\nd_g = 0.5\nseed = 9\n";
  const ExperimentConfig cfg = load_config_file(file);
  CHECK(cfg.controller == ControllerKind::Sdst);
  CHECK(cfg.seed == 9);
  CHECK_THROWS_AS(load_config_file(dir / "absent.cfg"), ConfigError);
}

TEST_CASE("ring centers sit on the circle at equal angles") {
  DatasetSpec spec;
  spec.kind = DatasetSpec::Kind::Ring;
  spec.count = 4;
  spec.scale = 2.0;
  const auto centers = dataset_centers(spec);
  REQUIRE(centers.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double ang = 2.0 * M_PI * static_cast<double>(i) / 4.0;
    CHECK(centers[i][0] == doctest::Approx(2.0 * std::cos(ang)).epsilon(1e-12));
    CHECK(centers[i][1] == doctest::Approx(2.0 * std::sin(ang)).epsilon(1e-12));
  }
  CHECK(spec.mode_count() == 4);
}

TEST_CASE("grid centers form the centered lattice") {
  DatasetSpec spec;
  spec.kind = DatasetSpec::Kind::Grid;
  spec.count = 3;
  spec.scale = 1.5;
  const auto centers = dataset_centers(spec);
  REQUIRE(centers.size() == 9);
  CHECK(spec.mode_count() == 9);
  const auto has = [&](double x, double y) {
    for (const auto& c : centers)
      if (std::fabs(c[0] - x) < 1e-12 && std::fabs(c[1] - y) < 1e-12) return true;
    return false;
  };
  CHECK(has(0.0, 0.0));
  CHECK(has(-1.5, -1.5));
  CHECK(has(1.5, 1.5));
  CHECK(has(-1.5, 1.5));
  CHECK(has(0.0, 1.5));
}

TEST_CASE("dataset draws concentrate at the centers") {
  DatasetSpec spec;  // 8-ring defaults
  Rng rng(11);
  const Matrix s = sample_dataset(spec, 4000, rng);
  REQUIRE(s.rows() == 4000);
  REQUIRE(s.cols() == 2);
  const auto centers = dataset_centers(spec);
  const ModeStats st = mode_stats(s, centers, spec.sigma);
  CHECK(st.covered == 8);
  CHECK(st.hq_fraction >= 0.98);  // 3-sigma mass of a 2-D Gaussian is ~0.9889

  Rng rng2(11);
  const Matrix s2 = sample_dataset(spec, 4000, rng2);
  CHECK(std::equal(s.data(), s.data() + s.size(), s2.data()));
}

TEST_CASE("static run writes consistent logs and an exact flops ledger") {
  const fs::path dir = testutil::fresh_dir("harness_static");
  ExperimentConfig cfg = parse_config(tiny_run("static", "d_g = 0.4\niterations = 40\neval_interval = 10\nseed = 5\n"));
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult res = run_experiment(cfg, opts);
  CHECK(!res.summary.failed);
  CHECK(res.summary.iterations_run == 40);
  CHECK(res.summary.iterations_total == 40);

  const auto lines = csv_lines(dir);
  REQUIRE(lines.size() == 5);  // header + evals at 10, 20, 30, 40
  CHECK(lines[0] == log_header());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].substr(0, lines[i].find(',')) == std::to_string(10 * i));
  }

  const json j = read_trailer(dir);
  CHECK(j["status"] == "SUCCESS");
  CHECK(j["controller"] == "static");
  CHECK(j["seed"] == 5);
  CHECK(j["config"]["d_g"] == 0.4);
  CHECK(j["counters"]["density_events"] == 0);
  CHECK(j["counters"]["disc_dst_events"] == 0);
  CHECK(j["counters"]["g_dst_events"] == 0);
  CHECK(j["events"].empty());
  CHECK(j["final"]["d_d"] == 0.4);
  CHECK(j["initial"]["active_g"] == j["final"]["active_g"]);
  CHECK(j["initial"]["active_d"] == j["final"]["active_d"]);

  // Static topology: total cost is iterations * a closed-form per-iteration
  // charge. n_out sums for [8, 8] towers: generator 18, discriminator 17.
  const std::uint64_t ag = j["initial"]["active_g"], ad = j["initial"]["active_d"];
  const std::uint64_t cg = 2 * ag + 18, cd = 2 * ad + 17;
  const std::uint64_t b = 8;
  const std::uint64_t per_iter =
      2 * (3 * cd * 2 * b + cg * b)  // n_dis discriminator steps
      + 3 * cg * b + 3 * cd * b;     // one generator step
  CHECK(j["flops"]["total"] == 40 * per_iter);
  const std::uint64_t dense_per_iter =
      2 * (3 * (2 * 88 + 17) * 2 * b + (2 * 96 + 18) * b) + 3 * (2 * 96 + 18) * b +
      3 * (2 * 88 + 17) * b;
  CHECK(j["flops"]["dense_total"] == 40 * dense_per_iter);
  const std::uint64_t sum_parts = j["flops"]["g_forward"].get<std::uint64_t>() +
                                  j["flops"]["g_backward"].get<std::uint64_t>() +
                                  j["flops"]["d_forward"].get<std::uint64_t>() +
                                  j["flops"]["d_backward"].get<std::uint64_t>();
  CHECK(j["flops"]["total"] == sum_parts);
  const double norm = j["flops"]["normalized"];
  CHECK(norm == doctest::Approx(static_cast<double>(40 * per_iter) /
                                static_cast<double>(40 * dense_per_iter))
                    .epsilon(1e-15));

  // The last CSV row carries the final ledger total.
  const std::string& last = lines.back();
  std::size_t comma = 0;
  for (int f = 0; f < 11; ++f) comma = last.find(',', comma) + 1;
  CHECK(last.substr(comma, last.find(',', comma) - comma) ==
        std::to_string(40 * per_iter));
}

TEST_CASE("same seed gives byte-identical logs, different seed does not") {
  const fs::path a = testutil::fresh_dir("harness_det_a");
  const fs::path b = testutil::fresh_dir("harness_det_b");
  const fs::path c = testutil::fresh_dir("harness_det_c");
  ExperimentConfig cfg =
      parse_config(tiny_run("sdst", "d_g = 0.3\niterations = 30\neval_interval = 10\nseed = 7\n"));
  RunOptions opts;
  opts.out_dir = a;
  run_experiment(cfg, opts);
  opts.out_dir = b;
  run_experiment(cfg, opts);
  CHECK(slurp(a / "log.csv") == slurp(b / "log.csv"));

  json ja = read_trailer(a), jb = read_trailer(b);
  ja.erase("wall_ms");
  jb.erase("wall_ms");
  CHECK(ja == jb);

  cfg.seed = 8;
  opts.out_dir = c;
  run_experiment(cfg, opts);
  CHECK(slurp(a / "log.csv") != slurp(c / "log.csv"));
}

TEST_CASE("a high balance ratio densifies the discriminator step by step") {
  const fs::path dir = testutil::fresh_dir("harness_dda_up");
  ExperimentConfig cfg = parse_config(
      tiny_run("dda", "d_g = 0.3\ndelta_d = 0.1\niterations = 50\neval_interval = 10\nseed = 3\n"));
  RunOptions opts;
  opts.out_dir = dir;
  opts.br_override = [](std::uint64_t) { return 1.0; };  // always above the band
  const RunResult res = run_experiment(cfg, opts);
  CHECK(!res.summary.failed);
  CHECK(res.summary.controller_boundaries == 5);
  CHECK(res.summary.density_events == 5);
  CHECK(res.summary.disc_dst_events == 0);

  REQUIRE(res.summary.events.size() == 5);
  double expect = 0.3;
  const std::size_t d_total = 88;  // 2x8 + 8x8 + 8x1
  for (std::size_t i = 0; i < 5; ++i) {
    const DensityEvent& e = res.summary.events[i];
    CHECK(e.iter == 10 * (i + 1));
    CHECK(e.type == DensityEvent::Type::SetDensity);
    CHECK(e.d_d_before == expect);
    expect = step_up(expect, 0.1, 1.0);
    CHECK(e.d_d_after == expect);
    CHECK(e.active_d == count_of(expect, d_total));
  }
  CHECK(res.summary.final_d_d == expect);
  CHECK(res.final_row.d_d == expect);
}

TEST_CASE("a low balance ratio sparsifies down to the floor and stays there") {
  const fs::path dir = testutil::fresh_dir("harness_dda_down");
  ExperimentConfig cfg = parse_config(
      tiny_run("dda", "d_g = 0.5\ndelta_d = 0.1\niterations = 60\neval_interval = 10\nseed = 3\n"));
  RunOptions opts;
  opts.out_dir = dir;
  opts.br_override = [](std::uint64_t) { return 0.0; };
  const RunResult res = run_experiment(cfg, opts);
  REQUIRE(res.summary.events.size() == 6);
  double expect = 0.5;
  for (std::size_t i = 0; i < 6; ++i) {
    expect = step_down(expect, 0.1, 0.1);
    CHECK(res.summary.events[i].d_d_after == expect);
  }
  CHECK(res.summary.final_d_d == 0.1);  // snapped exactly to d_min, then held
}

TEST_CASE("the strict controller swaps densification for topology moves at the cap") {
  const fs::path dir = testutil::fresh_dir("harness_strict");
  ExperimentConfig cfg = parse_config(tiny_run(
      "adapt_strict", "d_g = 0.5\nd_max = 0.5\niterations = 30\neval_interval = 10\nseed = 13\n"));
  CHECK(cfg.d_d_init == 0.5);  // starts at the cap
  RunOptions opts;
  opts.out_dir = dir;
  opts.br_override = [](std::uint64_t) { return 1.0; };
  const RunResult res = run_experiment(cfg, opts);
  CHECK(!res.summary.failed);
  CHECK(res.summary.controller_boundaries == 3);
  CHECK(res.summary.density_events == 0);
  CHECK(res.summary.disc_dst_events == 3);
  CHECK(res.summary.g_dst_events == 3);  // strict keeps generator DST running

  std::size_t disc_seen = 0;
  for (const DensityEvent& e : res.summary.events) {
    if (e.type != DensityEvent::Type::DiscDst) continue;
    ++disc_seen;
    CHECK(e.d_d_before == 0.5);
    CHECK(e.d_d_after == 0.5);
    const std::size_t expect_k = static_cast<std::size_t>(
        std::llround(decay_fraction(0.5, e.iter, 30) * 88.0 * 0.5));
    CHECK(e.k == expect_k);
  }
  CHECK(disc_seen == 3);
  CHECK(res.summary.final_d_d == 0.5);
}

TEST_CASE("posthoc trains dense, prunes once, then fine-tunes sparse") {
  const fs::path dir = testutil::fresh_dir("harness_posthoc");
  ExperimentConfig cfg = parse_config(
      tiny_run("posthoc", "d_g = 0.25\niterations = 40\neval_interval = 20\nseed = 2\n"));
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult res = run_experiment(cfg, opts);
  CHECK(!res.summary.failed);
  CHECK(res.summary.iterations_total == 60);
  CHECK(res.summary.iterations_run == 60);
  CHECK(res.summary.init_active_g == 96);  // dense main phase
  CHECK(res.summary.init_active_d == 88);

  REQUIRE(res.summary.events.size() == 1);
  const DensityEvent& prune = res.summary.events[0];
  CHECK(prune.type == DensityEvent::Type::Prune);
  CHECK(prune.iter == 40);
  CHECK(prune.active_g == 24);  // round(0.25 * 96)
  CHECK(prune.k == 96 - 24);
  CHECK(res.summary.final_active_g == 24);

  const auto lines = csv_lines(dir);
  REQUIRE(lines.size() == 4);  // header + 20, 40, 60

  // Fine-tune flops accrue against the frozen dense-phase baseline.
  const double norm = res.summary.normalized_flops;
  CHECK(norm > 1.0);
  CHECK(norm < 1.5);
}

TEST_CASE("runaway training fails the run but keeps partial output") {
  const fs::path dir = testutil::fresh_dir("harness_failed");
  ExperimentConfig cfg = parse_config(
      tiny_run("static", "d_g = 0.4\niterations = 30\neval_interval = 10\nlr = 1e280\nseed = 4\n"));
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult res = run_experiment(cfg, opts);
  CHECK(res.summary.failed);
  CHECK(!res.summary.error.empty());
  CHECK(res.summary.iterations_run < 30);
  const json j = read_trailer(dir);
  CHECK(j["status"] == "FAILED");
  CHECK(!j["error"].get<std::string>().empty());
  CHECK(fs::exists(dir / "log.csv"));
}

TEST_CASE("missing output directory is a configuration error") {
  ExperimentConfig cfg = parse_config(kBase);
  CHECK(cfg.out.empty());
  RunOptions opts;
  CHECK_THROWS_AS(run_experiment(cfg, opts), ConfigError);
}

namespace {

void fake_trailer(const fs::path& dir, const std::string& controller, double d_g,
                  bool failed, double best_fd, std::size_t covered, double d_d,
                  double normalized) {
  fs::create_directories(dir);
  json j;
  j["controller"] = controller;
  j["d_g"] = d_g;
  j["status"] = failed ? "FAILED" : "SUCCESS";
  j["final"] = {{"best_fd", best_fd}, {"covered_modes", covered}, {"d_d", d_d}};
  j["flops"] = {{"normalized", normalized}};
  std::ofstream(dir / "trailer.json") << j.dump(2);
}

}  // namespace

TEST_CASE("report aggregates runs per controller cell") {
  const fs::path root = testutil::fresh_dir("harness_report");
  fake_trailer(root / "a1", "static", 0.3, false, 1.0, 4, 0.3, 0.5);
  fake_trailer(root / "a2", "static", 0.3, false, 2.0, 6, 0.3, 0.7);
  fake_trailer(root / "a3", "static", 0.3, true, 0.0, 0, 0.0, 0.0);
  fake_trailer(root / "b1", "dda", 0.3, false, 3.0, 8, 0.55, 0.9);
  fs::create_directories(root / "missing");
  fs::create_directories(root / "corrupt");
  std::ofstream(root / "corrupt" / "trailer.json") << "{ not json";

  const std::vector<fs::path> dirs{root / "a1", root / "a2", root / "a3",
                                   root / "b1", root / "missing", root / "corrupt"};
  std::ostringstream text;
  const fs::path csv = root / "report.csv";
  const auto rows = write_report(dirs, text, csv);

  REQUIRE(rows.size() == 2);
  CHECK(rows[0].controller == "dda");
  CHECK(rows[0].runs == 1);
  CHECK(rows[0].failed == 0);
  CHECK(rows[0].best_fd_mean == 3.0);
  CHECK(rows[0].best_fd_std == 0.0);

  CHECK(rows[1].controller == "static");
  CHECK(rows[1].runs == 2);
  CHECK(rows[1].failed == 1);
  CHECK(rows[1].best_fd_mean == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rows[1].best_fd_std == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(rows[1].covered_mean == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(rows[1].normalized_flops_mean == doctest::Approx(0.6).epsilon(1e-12));

  CHECK(text.str().find("static") != std::string::npos);
  const auto csv_text = slurp(csv);
  CHECK(csv_text.find("controller,d_g,runs,failed") == 0);
  CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 3);
}

TEST_CASE("report with nothing readable is an error") {
  const fs::path root = testutil::fresh_dir("harness_report_empty");
  fs::create_directories(root / "empty");
  const std::vector<fs::path> dirs{root / "empty"};
  std::ostringstream text;
  CHECK_THROWS_AS(write_report(dirs, text, std::nullopt), ConfigError);
}
