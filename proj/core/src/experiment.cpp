#include "sparsegan/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "sparsegan/balance.hpp"
#include "sparsegan/error.hpp"
#include "sparsegan/metrics.hpp"

namespace sparsegan {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::size_t density_to_count(double density, std::size_t weight_total) {
  const auto n = std::llround(density * static_cast<double>(weight_total));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max<long long>(0, n)));
}

std::string format_row(const LogRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%llu,%.17g,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%zu,%.17g,%llu,%.3f",
                static_cast<unsigned long long>(r.iter), r.br, r.br_avg, r.d_d, r.active_g,
                r.active_d, r.loss_d, r.loss_g, r.fd, r.covered_modes, r.hq_fraction,
                static_cast<unsigned long long>(r.flops), r.wall_ms);
  return buf;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["controller"] = controller_name(cfg.controller);
  j["dataset"] = cfg.dataset.kind == DatasetSpec::Kind::Ring ? "ring" : "grid";
  j["dataset_count"] = cfg.dataset.count;
  j["dataset_scale"] = cfg.dataset.scale;
  j["dataset_sigma"] = cfg.dataset.sigma;
  j["latent_dim"] = cfg.latent_dim;
  j["g_widths"] = cfg.g_widths;
  j["d_widths"] = cfg.d_widths;
  j["loss"] = loss_name(cfg.loss);
  j["d_g"] = cfg.d_g;
  j["d_d_init"] = cfg.d_d_init;
  j["d_max"] = cfg.d_max;
  j["d_min"] = cfg.d_min;
  j["alloc_mode"] = alloc_mode_name(cfg.alloc_mode);
  j["grow_mode"] = grow_mode_name(cfg.grow_mode);
  j["density_strategy"] = cfg.density_strategy == DensityStrategy::Strong ? "strong" : "balance";
  j["delta_t_g"] = cfg.delta_t_g;
  j["delta_t_d"] = cfg.delta_t_d;
  j["delta_d"] = cfg.delta_d;
  j["gamma"] = cfg.gamma;
  j["b_lo"] = cfg.b_lo;
  j["b_hi"] = cfg.b_hi;
  j["br_window"] = cfg.br_window;
  j["br_eval_interval"] = cfg.br_eval_interval;
  j["lr"] = cfg.adam.lr;
  j["beta1"] = cfg.adam.beta1;
  j["beta2"] = cfg.adam.beta2;
  j["eps"] = cfg.adam.eps;
  j["n_dis"] = cfg.n_dis;
  j["batch_g"] = cfg.batch_g;
  j["batch_d"] = cfg.batch_d;
  j["iterations"] = cfg.iterations;
  j["ema_beta"] = cfg.ema_beta;
  j["seed"] = cfg.seed;
  j["eval_interval"] = cfg.eval_interval;
  j["metric_samples"] = cfg.metric_samples;
  return j;
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

void write_trailer(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const RunSummary& s) {
  nlohmann::json j;
  j["status"] = s.failed ? "FAILED" : "SUCCESS";
  if (s.failed) j["error"] = s.error;
  j["controller"] = controller_name(cfg.controller);
  j["d_g"] = cfg.d_g;
  j["seed"] = cfg.seed;
  j["iterations_run"] = s.iterations_run;
  j["iterations_total"] = s.iterations_total;

  nlohmann::json init;
  init["active_g"] = s.init_active_g;
  init["active_d"] = s.init_active_d;
  j["initial"] = init;

  nlohmann::json fin;
  fin["d_d"] = s.final_d_d;
  fin["active_g"] = s.final_active_g;
  fin["active_d"] = s.final_active_d;
  fin["br_avg"] = json_safe(s.final_br_avg);
  fin["br_avg_valid"] = std::isfinite(s.final_br_avg);
  fin["fd"] = json_safe(s.final_fd);
  fin["best_fd"] = json_safe(s.best_fd);
  fin["covered_modes"] = s.final_covered;
  fin["hq_fraction"] = s.final_hq;
  j["final"] = fin;

  nlohmann::json fl;
  fl["g_forward"] = s.g_forward_flops;
  fl["g_backward"] = s.g_backward_flops;
  fl["d_forward"] = s.d_forward_flops;
  fl["d_backward"] = s.d_backward_flops;
  fl["total"] = s.total_flops;
  fl["dense_total"] = s.dense_total_flops;
  fl["normalized"] = json_safe(s.normalized_flops);
  j["flops"] = fl;

  nlohmann::json cnt;
  cnt["controller_boundaries"] = s.controller_boundaries;
  cnt["density_events"] = s.density_events;
  cnt["disc_dst_events"] = s.disc_dst_events;
  cnt["g_dst_events"] = s.g_dst_events;
  j["counters"] = cnt;

  nlohmann::json events = nlohmann::json::array();
  for (const DensityEvent& e : s.events) {
    nlohmann::json je;
    je["iter"] = e.iter;
    je["type"] = density_event_name(e.type);
    je["d_d_before"] = e.d_d_before;
    je["d_d_after"] = e.d_d_after;
    je["active_g"] = e.active_g;
    je["active_d"] = e.active_d;
    je["k"] = e.k;
    events.push_back(je);
  }
  j["events"] = events;
  j["wall_ms"] = s.wall_ms;
  j["config"] = config_json(cfg);

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trailer: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

const char* log_header() {
  return "iter,br,br_avg,d_d,active_g,active_d,loss_d,loss_g,fd,covered_modes,hq_fraction,"
         "flops,wall_ms";
}

const char* density_event_name(DensityEvent::Type type) {
  switch (type) {
    case DensityEvent::Type::SetDensity: return "set_density";
    case DensityEvent::Type::DiscDst: return "disc_dst";
    case DensityEvent::Type::GenDst: return "gen_dst";
    case DensityEvent::Type::Prune: return "prune";
  }
  return "?";
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const std::filesystem::path out_dir = opts.out_dir.empty()
                                            ? std::filesystem::path(cfg.out)
                                            : opts.out_dir;
  if (out_dir.empty())
    throw ConfigError("run_experiment: no output directory (set 'out' in the config or --out)");
  std::filesystem::create_directories(out_dir);

  std::ofstream csv(out_dir / "log.csv");
  if (!csv) throw ConfigError("cannot write log: " + (out_dir / "log.csv").string());
  csv << log_header() << "\n";

  Rng data_rng = Rng::for_stream(cfg.seed, Stream::Data);
  Rng init_rng = Rng::for_stream(cfg.seed, Stream::Init);
  Rng dst_rng = Rng::for_stream(cfg.seed, Stream::Dst);
  Rng eval_rng = Rng::for_stream(cfg.seed, Stream::Eval);

  const bool posthoc = cfg.controller == ControllerKind::Posthoc;
  const bool g_dst_enabled = cfg.controller == ControllerKind::Sdst ||
                             cfg.controller == ControllerKind::DstBoth ||
                             cfg.controller == ControllerKind::AdaptRelax ||
                             cfg.controller == ControllerKind::AdaptStrict;
  const bool density_controlled = cfg.controller == ControllerKind::DdaStatic ||
                                  cfg.controller == ControllerKind::AdaptRelax ||
                                  cfg.controller == ControllerKind::AdaptStrict;

  // Networks. The generator starts dense for posthoc (pruned once at the end
  // of the main phase), at d_g otherwise; the discriminator starts at the
  // resolved d_d_init.
  GanPair pair;
  pair.latent_dim = cfg.latent_dim;
  pair.ema_beta = cfg.ema_beta;
  pair.generator = make_mlp(cfg.generator_dims());
  pair.discriminator = make_mlp(cfg.discriminator_dims());

  const auto apply_alloc = [&](Mlp& net, double density) {
    std::vector<LayerShape> shapes;
    for (const auto& p : net.layers) shapes.push_back({p.n_in(), p.n_out(), 1, 1});
    const DensityAllocation alloc = allocate_densities(shapes, density, cfg.alloc_mode);
    const std::vector<Matrix> masks = init_masks(alloc, shapes, init_rng);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      apply_mask_change(net.layers[l], masks[l], alloc.active[l]);
    }
  };
  apply_alloc(pair.generator, posthoc ? 1.0 : cfg.d_g);
  apply_alloc(pair.discriminator, cfg.d_d_init);
  init_weights(pair.generator, init_rng);
  init_weights(pair.discriminator, init_rng);
  pair.ema_generator = pair.generator;

  const LossSpec loss = LossSpec::make(cfg.loss);
  const std::size_t g_total = pair.generator.weight_count();
  const std::size_t d_total = pair.discriminator.weight_count();

  ControllerState state;
  state.kind = cfg.controller;
  state.d_d = cfg.d_d_init;
  state.d_min = cfg.d_min;
  state.d_max = cfg.d_max;
  state.delta_d = cfg.delta_d;
  state.b_lo = cfg.b_lo;
  state.b_hi = cfg.b_hi;
  state.interval = cfg.delta_t_d;

  BrWindow window(cfg.br_window);
  FlopsLedger ledger;

  const auto centers = dataset_centers(cfg.dataset);
  const Matrix ref_real = sample_dataset(cfg.dataset, cfg.metric_samples, eval_rng);
  const GaussianSummary ref_gauss = fit_gaussian(ref_real);

  RunResult res;
  RunSummary& sum = res.summary;
  sum.iterations_total = cfg.total_iterations();
  sum.best_fd = kNan;
  sum.final_br_avg = kNan;
  sum.final_fd = kNan;
  sum.init_active_g = pair.generator.active_weight_count();
  sum.init_active_d = pair.discriminator.active_weight_count();

  double last_br = kNan;
  double last_loss_d = kNan;
  double last_loss_g = kNan;
  bool any_row = false;

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  const auto log_event = [&](DensityEvent::Type type, std::uint64_t iter, double before,
                             double after, std::size_t k) {
    DensityEvent e;
    e.iter = iter;
    e.type = type;
    e.d_d_before = before;
    e.d_d_after = after;
    e.active_g = pair.generator.active_weight_count();
    e.active_d = pair.discriminator.active_weight_count();
    e.k = k;
    sum.events.push_back(e);
  };

  const auto d_scoring_grads = [&]() {
    const Matrix real = sample_dataset(cfg.dataset, cfg.batch_d, data_rng);
    const Matrix z = sample_latent(cfg.batch_d, cfg.latent_dim, data_rng);
    return discriminator_weight_grads(pair, loss, real, z);
  };

  try {
    for (std::uint64_t t = 1; t <= sum.iterations_total; ++t) {
      const bool main_phase = t <= cfg.iterations;

      // Discriminator steps. Each costs one D pass over real and fake rows
      // (2 * batch_d) forward and backward, plus the generator forward that
      // produced the fakes.
      for (std::uint64_t i = 0; i < cfg.n_dis; ++i) {
        const Matrix real = sample_dataset(cfg.dataset, cfg.batch_d, data_rng);
        const DiscUpdateReport rep = discriminator_update(pair, loss, real, cfg.adam, data_rng);
        last_loss_d = rep.loss_d;
        const auto dc = layer_costs(pair.discriminator);
        const auto gc = layer_costs(pair.generator);
        ledger.record(Component::Discriminator, Direction::Forward, dc, 2 * cfg.batch_d);
        ledger.record(Component::Discriminator, Direction::Backward, dc, 2 * cfg.batch_d);
        ledger.record(Component::Generator, Direction::Forward, gc, cfg.batch_d);
      }

      // Generator step: G forward/backward plus the discriminator pass the
      // generator loss flows through. The post-update scoring pass belongs to
      // the balance probe and is not charged.
      const Matrix z = sample_latent(cfg.batch_g, cfg.latent_dim, data_rng);
      const GenUpdateReport rep_g = generator_update(pair, loss, z, cfg.adam);
      last_loss_g = rep_g.loss_g;
      {
        const auto dc = layer_costs(pair.discriminator);
        const auto gc = layer_costs(pair.generator);
        ledger.record(Component::Generator, Direction::Forward, gc, cfg.batch_g);
        ledger.record(Component::Generator, Direction::Backward, gc, cfg.batch_g);
        ledger.record(Component::Discriminator, Direction::Forward, dc, cfg.batch_g);
        ledger.record(Component::Discriminator, Direction::Backward, dc, cfg.batch_g);
      }

      // Balance sample against a fresh real batch, same z, same D.
      if (t % cfg.br_eval_interval == 0) {
        const Matrix fresh_real = sample_dataset(cfg.dataset, cfg.batch_d, data_rng);
        const std::vector<double> s_real =
            score_column(mlp_forward(pair.discriminator, fresh_real));
        BrSample s = balance_ratio(s_real, rep_g.pre_scores, rep_g.post_scores);
        if (opts.br_override) {
          if (const std::optional<double> inj = opts.br_override(t)) {
            s.br = *inj;
            s.degenerate = false;
          }
        }
        window.push(s);
        if (!s.degenerate) last_br = s.br;
      }

      ema_step(pair);

      // Density controller at its boundary.
      if (density_controlled && t % cfg.delta_t_d == 0) {
        sum.controller_boundaries += 1;
        const ControlAction action = controller_tick(t, cfg.controller, window.average(), state);
        if (action.type == ControlAction::Type::SetDiscDensity) {
          const double before = state.d_d;
          const std::size_t new_total = density_to_count(action.density, d_total);
          std::vector<Matrix> grads;
          if (new_total > pair.discriminator.active_weight_count() &&
              cfg.grow_mode == GrowMode::Gradient) {
            grads = d_scoring_grads();
          }
          set_active_count(pair.discriminator.layers, grads, new_total, cfg.grow_mode, dst_rng);
          state.d_d = action.density;
          sum.density_events += 1;
          log_event(DensityEvent::Type::SetDensity, t, before, state.d_d, 0);
        } else if (action.type == ControlAction::Type::DiscDst) {
          const std::size_t k = static_cast<std::size_t>(std::llround(
              decay_fraction(cfg.gamma, std::min(t, cfg.iterations), cfg.iterations) *
              static_cast<double>(d_total) * state.d_d));
          std::vector<Matrix> grads;
          if (cfg.grow_mode == GrowMode::Gradient) grads = d_scoring_grads();
          dst_step(pair.discriminator.layers, grads, k, cfg.grow_mode, dst_rng);
          sum.disc_dst_events += 1;
          log_event(DensityEvent::Type::DiscDst, t, state.d_d, state.d_d, k);
        }
      }

      // DST on both nets: the discriminator follows its own timer.
      if (cfg.controller == ControllerKind::DstBoth && main_phase && t % cfg.delta_t_d == 0) {
        const std::size_t k = static_cast<std::size_t>(
            std::llround(decay_fraction(cfg.gamma, t, cfg.iterations) *
                         static_cast<double>(d_total) * state.d_d));
        std::vector<Matrix> grads;
        if (cfg.grow_mode == GrowMode::Gradient) grads = d_scoring_grads();
        dst_step(pair.discriminator.layers, grads, k, cfg.grow_mode, dst_rng);
        sum.disc_dst_events += 1;
        log_event(DensityEvent::Type::DiscDst, t, state.d_d, state.d_d, k);
      }

      // Generator topology update.
      if (g_dst_enabled && main_phase && t % cfg.delta_t_g == 0) {
        const std::size_t k = static_cast<std::size_t>(
            std::llround(decay_fraction(cfg.gamma, t, cfg.iterations) *
                         static_cast<double>(g_total) * cfg.d_g));
        std::vector<Matrix> grads;
        if (cfg.grow_mode == GrowMode::Gradient) {
          const Matrix zs = sample_latent(cfg.batch_g, cfg.latent_dim, data_rng);
          grads = generator_weight_grads(pair, loss, zs);
        }
        dst_step(pair.generator.layers, grads, k, cfg.grow_mode, dst_rng);
        sync_ema_mask(pair);
        sum.g_dst_events += 1;
        log_event(DensityEvent::Type::GenDst, t, state.d_d, state.d_d, k);
      }

      sum.iterations_run = t;

      // Metrics row.
      if (t % cfg.eval_interval == 0 || t == sum.iterations_total) {
        const Matrix z_eval = sample_latent(cfg.metric_samples, cfg.latent_dim, eval_rng);
        const Matrix samples = mlp_forward(pair.ema_generator, z_eval);
        if (!samples.all_finite()) throw NumericError("metrics: non-finite generated sample");
        const double fd = frechet_2d(fit_gaussian(samples), ref_gauss);
        const ModeStats ms = mode_stats(samples, centers, cfg.dataset.sigma);

        LogRow row;
        row.iter = t;
        row.br = last_br;
        row.br_avg = window.average().value_or(kNan);
        row.d_d = state.d_d;
        row.active_g = pair.generator.active_weight_count();
        row.active_d = pair.discriminator.active_weight_count();
        row.loss_d = last_loss_d;
        row.loss_g = last_loss_g;
        row.fd = fd;
        row.covered_modes = ms.covered;
        row.hq_fraction = ms.hq_fraction;
        row.flops = ledger.total();
        row.wall_ms = opts.timing ? elapsed_ms() : 0.0;
        csv << format_row(row) << "\n";
        csv.flush();
        res.final_row = row;
        any_row = true;
        if (!(fd >= 0.0)) throw NumericError("metrics: invalid frechet value");
        if (std::isnan(sum.best_fd) || fd < sum.best_fd) sum.best_fd = fd;
      }

      // Posthoc: one global magnitude prune at the end of the dense phase,
      // then fine-tuning accrues cost against the dense schedule's baseline.
      if (posthoc && t == cfg.iterations) {
        const std::size_t target = density_to_count(cfg.d_g, g_total);
        set_active_count(pair.generator.layers, {}, target, cfg.grow_mode, dst_rng);
        sync_ema_mask(pair);
        ledger.stop_baseline();
        log_event(DensityEvent::Type::Prune, t, state.d_d, state.d_d,
                  g_total - target);
      }

      if (!std::isfinite(last_loss_d) || !std::isfinite(last_loss_g))
        throw NumericError("training: non-finite loss");
    }
  } catch (const NumericError& err) {
    sum.failed = true;
    sum.error = err.what();
  }

  sum.final_d_d = state.d_d;
  sum.final_active_g = pair.generator.active_weight_count();
  sum.final_active_d = pair.discriminator.active_weight_count();
  sum.final_br_avg = window.average().value_or(kNan);
  if (any_row) {
    sum.final_fd = res.final_row.fd;
    sum.final_covered = res.final_row.covered_modes;
    sum.final_hq = res.final_row.hq_fraction;
  }
  sum.g_forward_flops = ledger.forward(Component::Generator);
  sum.g_backward_flops = ledger.backward(Component::Generator);
  sum.d_forward_flops = ledger.forward(Component::Discriminator);
  sum.d_backward_flops = ledger.backward(Component::Discriminator);
  sum.total_flops = ledger.total();
  sum.dense_total_flops = ledger.dense_total();
  sum.normalized_flops = ledger.dense_total() == 0 ? kNan : normalized_flops(ledger);
  sum.wall_ms = elapsed_ms();

  write_trailer(out_dir / "trailer.json", cfg, sum);
  return res;
}

}  // namespace sparsegan
