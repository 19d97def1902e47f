#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sparsegan/balance.hpp"
#include "sparsegan/dataset.hpp"
#include "sparsegan/gan.hpp"
#include "sparsegan/masked_param.hpp"
#include "sparsegan/sparsity.hpp"

namespace sparsegan {

/// How a fixed-density run picks the discriminator density when d_d_init is
/// not given explicitly: Balance matches the generator, Strong uses d_max.
enum class DensityStrategy { Balance, Strong };

struct ExperimentConfig {
  ControllerKind controller = ControllerKind::Static;

  DatasetSpec dataset;

  std::size_t latent_dim = 2;
  std::vector<std::size_t> g_widths{64, 64};
  std::vector<std::size_t> d_widths{64, 64};

  LossKind loss = LossKind::Hinge;

  double d_g = 0.0;        // required
  double d_d_init = 0.0;   // resolved from controller/strategy when absent
  double d_max = 1.0;
  double d_min = 0.0;      // defaults to delta_d
  AllocMode alloc_mode = AllocMode::Er;
  GrowMode grow_mode = GrowMode::Gradient;
  DensityStrategy density_strategy = DensityStrategy::Balance;

  std::uint64_t delta_t_g = 500;
  std::uint64_t delta_t_d = 1000;
  double delta_d = 0.05;
  double gamma = 0.5;
  double b_lo = 0.45;
  double b_hi = 0.55;
  std::size_t br_window = 1000;
  std::uint64_t br_eval_interval = 1;

  AdamConfig adam;          // lr 2e-4, beta1 0, beta2 0.9, eps 1e-8
  std::uint64_t n_dis = 5;
  std::size_t batch_g = 128;
  std::size_t batch_d = 64;
  std::uint64_t iterations = 20000;
  double ema_beta = 0.999;

  std::uint64_t seed = 1;
  std::uint64_t eval_interval = 500;
  std::size_t metric_samples = 4096;
  std::string out;

  /// Full layer dimension lists, including in/out dims (data is 2-D, the
  /// discriminator emits one raw score).
  std::vector<std::size_t> generator_dims() const;
  std::vector<std::size_t> discriminator_dims() const;

  /// Total iteration count including the post-pruning fine-tune phase run by
  /// the posthoc controller (iterations + iterations / 2), otherwise just
  /// `iterations`.
  std::uint64_t total_iterations() const;
};

/// Parses the flat `key = value` config format (# comments, [k, v] lists,
/// optional quotes on strings). Unknown keys, missing required keys, or
/// out-of-range values raise ConfigError with <name>:<line> context.
ExperimentConfig parse_config(std::string_view text, const std::string& name = "<config>");

ExperimentConfig load_config_file(const std::filesystem::path& path);

const char* controller_name(ControllerKind kind);
const char* loss_name(LossKind kind);
const char* alloc_mode_name(AllocMode mode);
const char* grow_mode_name(GrowMode mode);

}  // namespace sparsegan
