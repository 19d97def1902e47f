#pragma once

#include <span>
#include <vector>

#include "sparsegan/mlp.hpp"

namespace sparsegan {

enum class LossKind { Js, Wasserstein, Hinge };

/// Scalar loss family over raw discriminator scores. The discriminator loss
/// is mean(f1(real)) + mean(f2(fake)); the generator loss is mean(g1(fake)).
///   JS:          f1 = -log(sigmoid(x)), f2 = -log(1 - sigmoid(x)),
///                g1 = log(1 - sigmoid(x)), logits clamped to +-30 inside the
///                squash so the logs stay finite.
///   Wasserstein: f1 = -x, f2 = x, g1 = -x; discriminator weights are clipped
///                to +-0.05 after each update (see discriminator_update).
///   Hinge:       f1 = max(0, 1 - x), f2 = max(0, 1 + x), g1 = -x.
struct LossSpec {
  LossKind kind = LossKind::Hinge;

  double f1(double x) const;
  double f2(double x) const;
  double g1(double x) const;
  double df1(double x) const;
  double df2(double x) const;
  double dg1(double x) const;

  static LossSpec make(LossKind kind) { return LossSpec{kind}; }
};

/// Generator/discriminator pair plus an exponential moving average copy of
/// the generator used for evaluation. The EMA copy mirrors the generator's
/// masks: positions inactive in the generator are exactly zero in the EMA.
struct GanPair {
  Mlp generator;
  Mlp discriminator;
  Mlp ema_generator;
  std::size_t latent_dim = 2;
  double ema_beta = 0.999;
};

struct DiscUpdateReport {
  double loss_d = 0.0;
  double mean_real = 0.0;
  double mean_fake = 0.0;
};

struct GenUpdateReport {
  double loss_g = 0.0;
  std::vector<double> pre_scores;   // D(G_pre(z)), the training pass
  std::vector<double> post_scores;  // D(G_post(z)), same z, same D
};

double d_loss(const LossSpec& spec, std::span<const double> scores_real,
              std::span<const double> scores_fake);
double g_loss(const LossSpec& spec, std::span<const double> scores_fake);

Matrix sample_latent(std::size_t n, std::size_t dim, Rng& rng);

/// Flattens a batch x 1 score matrix into a vector.
std::vector<double> score_column(const Matrix& scores);

/// One discriminator step: fresh latents, one Adam update on D only. The fake
/// path is not backpropagated into the generator. Wasserstein mode clips all
/// discriminator parameters to +-0.05 afterwards.
DiscUpdateReport discriminator_update(GanPair& pair, const LossSpec& spec, const Matrix& real,
                                      const AdamConfig& adam, Rng& rng);

/// One generator step on the given latents. Records D(G(z)) before and after
/// the update, against the same unchanged discriminator, so the caller can
/// form a balance sample.
GenUpdateReport generator_update(GanPair& pair, const LossSpec& spec, const Matrix& z,
                                 const AdamConfig& adam);

/// ema <- beta * ema + (1 - beta) * live on active positions; inactive
/// positions are forced to exact zero. Biases are averaged unconditionally.
void ema_step(GanPair& pair);

/// Copies the generator's masks into the EMA net and zeroes EMA weights at
/// inactive positions. Call after any generator mask change.
void sync_ema_mask(GanPair& pair);

/// Dense weight gradients of the generator loss w.r.t. every generator
/// weight, from a scoring pass on z (no parameter update).
std::vector<Matrix> generator_weight_grads(const GanPair& pair, const LossSpec& spec,
                                           const Matrix& z);

/// Dense weight gradients of the discriminator loss w.r.t. every
/// discriminator weight, from a scoring pass (no parameter update).
std::vector<Matrix> discriminator_weight_grads(const GanPair& pair, const LossSpec& spec,
                                               const Matrix& real, const Matrix& z);

}  // namespace sparsegan
