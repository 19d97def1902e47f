#include "sparsegan/gan.hpp"

#include <algorithm>
#include <cmath>

#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

constexpr double kLogitClamp = 30.0;
constexpr double kWassersteinClip = 0.05;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamped_sigmoid(double x) { return sigmoid(std::clamp(x, -kLogitClamp, kLogitClamp)); }

void require_finite(std::span<const double> scores, const char* who) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError(std::string(who) + ": non-finite score");
  }
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Clips weights and biases to [-bound, bound]. Inactive weights are zero and
// stay zero.
void clip_params(Mlp& net, double bound) {
  for (auto& p : net.layers) {
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      double& w = p.weights.data()[k];
      w = std::clamp(w, -bound, bound);
    }
    for (double& b : p.bias) b = std::clamp(b, -bound, bound);
  }
}

// Applies one Adam update to every layer of `net` from a backward result.
void apply_update(Mlp& net, const BackwardResult& grads, const AdamConfig& adam) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_step(net.layers[l], grads.layers[l].weights, adam);
    adam_step_bias(net.layers[l], grads.layers[l].bias, adam);
  }
}

}  // namespace

double LossSpec::f1(double x) const {
  switch (kind) {
    case LossKind::Js: return -std::log(clamped_sigmoid(x));
    case LossKind::Wasserstein: return -x;
    case LossKind::Hinge: return std::max(0.0, 1.0 - x);
  }
  throw InternalError("LossSpec::f1: unknown kind");
}

double LossSpec::f2(double x) const {
  switch (kind) {
    case LossKind::Js: return -std::log(1.0 - clamped_sigmoid(x));
    case LossKind::Wasserstein: return x;
    case LossKind::Hinge: return std::max(0.0, 1.0 + x);
  }
  throw InternalError("LossSpec::f2: unknown kind");
}

double LossSpec::g1(double x) const {
  switch (kind) {
    case LossKind::Js: return std::log(1.0 - clamped_sigmoid(x));
    case LossKind::Wasserstein: return -x;
    case LossKind::Hinge: return -x;
  }
  throw InternalError("LossSpec::g1: unknown kind");
}

double LossSpec::df1(double x) const {
  switch (kind) {
    case LossKind::Js: return sigmoid(x) - 1.0;
    case LossKind::Wasserstein: return -1.0;
    case LossKind::Hinge: return (1.0 - x) > 0.0 ? -1.0 : 0.0;
  }
  throw InternalError("LossSpec::df1: unknown kind");
}

double LossSpec::df2(double x) const {
  switch (kind) {
    case LossKind::Js: return sigmoid(x);
    case LossKind::Wasserstein: return 1.0;
    case LossKind::Hinge: return (1.0 + x) > 0.0 ? 1.0 : 0.0;
  }
  throw InternalError("LossSpec::df2: unknown kind");
}

double LossSpec::dg1(double x) const {
  switch (kind) {
    case LossKind::Js: return -sigmoid(x);
    case LossKind::Wasserstein: return -1.0;
    case LossKind::Hinge: return -1.0;
  }
  throw InternalError("LossSpec::dg1: unknown kind");
}

double d_loss(const LossSpec& spec, std::span<const double> scores_real,
              std::span<const double> scores_fake) {
  if (scores_real.empty() || scores_fake.empty())
    throw InternalError("d_loss: empty score batch");
  require_finite(scores_real, "d_loss(real)");
  require_finite(scores_fake, "d_loss(fake)");
  double a = 0.0, b = 0.0;
  for (double s : scores_real) a += spec.f1(s);
  for (double s : scores_fake) b += spec.f2(s);
  return a / static_cast<double>(scores_real.size()) + b / static_cast<double>(scores_fake.size());
}

double g_loss(const LossSpec& spec, std::span<const double> scores_fake) {
  if (scores_fake.empty()) throw InternalError("g_loss: empty score batch");
  require_finite(scores_fake, "g_loss");
  double s = 0.0;
  for (double x : scores_fake) s += spec.g1(x);
  return s / static_cast<double>(scores_fake.size());
}

Matrix sample_latent(std::size_t n, std::size_t dim, Rng& rng) {
  Matrix z(n, dim);
  for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = rng.normal();
  return z;
}

std::vector<double> score_column(const Matrix& scores) {
  if (scores.cols() != 1) throw InternalError("score_column: expected a single-column matrix");
  return std::vector<double>(scores.data(), scores.data() + scores.rows());
}

DiscUpdateReport discriminator_update(GanPair& pair, const LossSpec& spec, const Matrix& real,
                                      const AdamConfig& adam, Rng& rng) {
  const std::size_t n = real.rows();
  const Matrix z = sample_latent(n, pair.latent_dim, rng);
  const Matrix fake = mlp_forward(pair.generator, z);

  ForwardCache cache_real, cache_fake;
  const Matrix s_real = mlp_forward(pair.discriminator, real, &cache_real);
  const Matrix s_fake = mlp_forward(pair.discriminator, fake, &cache_fake);
  const std::vector<double> v_real = score_column(s_real);
  const std::vector<double> v_fake = score_column(s_fake);

  DiscUpdateReport rep;
  rep.loss_d = d_loss(spec, v_real, v_fake);
  rep.mean_real = mean(v_real);
  rep.mean_fake = mean(v_fake);

  Matrix gy_real(n, 1), gy_fake(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    gy_real(i, 0) = spec.df1(v_real[i]) / static_cast<double>(n);
    gy_fake(i, 0) = spec.df2(v_fake[i]) / static_cast<double>(n);
  }
  BackwardResult g_real = mlp_backward(pair.discriminator, cache_real, gy_real);
  const BackwardResult g_fake = mlp_backward(pair.discriminator, cache_fake, gy_fake);
  for (std::size_t l = 0; l < g_real.layers.size(); ++l) {
    Matrix& acc = g_real.layers[l].weights;
    const Matrix& add = g_fake.layers[l].weights;
    for (std::size_t k = 0; k < acc.size(); ++k) acc.data()[k] += add.data()[k];
    for (std::size_t i = 0; i < g_real.layers[l].bias.size(); ++i)
      g_real.layers[l].bias[i] += g_fake.layers[l].bias[i];
  }
  apply_update(pair.discriminator, g_real, adam);
  if (spec.kind == LossKind::Wasserstein) clip_params(pair.discriminator, kWassersteinClip);
  return rep;
}

GenUpdateReport generator_update(GanPair& pair, const LossSpec& spec, const Matrix& z,
                                 const AdamConfig& adam) {
  ForwardCache cache_g, cache_d;
  const Matrix fake_pre = mlp_forward(pair.generator, z, &cache_g);
  const Matrix s_pre = mlp_forward(pair.discriminator, fake_pre, &cache_d);

  GenUpdateReport rep;
  rep.pre_scores = score_column(s_pre);
  rep.loss_g = g_loss(spec, rep.pre_scores);

  const std::size_t n = z.rows();
  Matrix gy(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    gy(i, 0) = spec.dg1(rep.pre_scores[i]) / static_cast<double>(n);
  }
  const BackwardResult through_d = mlp_backward(pair.discriminator, cache_d, gy);
  const BackwardResult g_grads = mlp_backward(pair.generator, cache_g, through_d.input);
  apply_update(pair.generator, g_grads, adam);

  const Matrix fake_post = mlp_forward(pair.generator, z);
  rep.post_scores = score_column(mlp_forward(pair.discriminator, fake_post));
  return rep;
}

void ema_step(GanPair& pair) {
  const double beta = pair.ema_beta;
  for (std::size_t l = 0; l < pair.generator.layers.size(); ++l) {
    const MaskedParam& live = pair.generator.layers[l];
    MaskedParam& ema = pair.ema_generator.layers[l];
    for (std::size_t k = 0; k < live.weights.size(); ++k) {
      if (live.mask.data()[k] == 1.0) {
        ema.weights.data()[k] = beta * ema.weights.data()[k] + (1.0 - beta) * live.weights.data()[k];
      } else {
        ema.weights.data()[k] = 0.0;
      }
    }
    for (std::size_t i = 0; i < live.bias.size(); ++i) {
      ema.bias[i] = beta * ema.bias[i] + (1.0 - beta) * live.bias[i];
    }
  }
}

void sync_ema_mask(GanPair& pair) {
  for (std::size_t l = 0; l < pair.generator.layers.size(); ++l) {
    const MaskedParam& live = pair.generator.layers[l];
    MaskedParam& ema = pair.ema_generator.layers[l];
    ema.mask = live.mask;
    ema.enforce_mask();
  }
}

std::vector<Matrix> generator_weight_grads(const GanPair& pair, const LossSpec& spec,
                                           const Matrix& z) {
  ForwardCache cache_g, cache_d;
  const Matrix fake = mlp_forward(pair.generator, z, &cache_g);
  const std::vector<double> scores = score_column(mlp_forward(pair.discriminator, fake, &cache_d));
  const std::size_t n = z.rows();
  Matrix gy(n, 1);
  for (std::size_t i = 0; i < n; ++i) gy(i, 0) = spec.dg1(scores[i]) / static_cast<double>(n);
  const BackwardResult through_d = mlp_backward(pair.discriminator, cache_d, gy);
  BackwardResult g = mlp_backward(pair.generator, cache_g, through_d.input);
  std::vector<Matrix> out;
  out.reserve(g.layers.size());
  for (auto& lg : g.layers) out.push_back(std::move(lg.weights));
  return out;
}

std::vector<Matrix> discriminator_weight_grads(const GanPair& pair, const LossSpec& spec,
                                               const Matrix& real, const Matrix& z) {
  const Matrix fake = mlp_forward(pair.generator, z);
  ForwardCache cache_real, cache_fake;
  const std::vector<double> v_real =
      score_column(mlp_forward(pair.discriminator, real, &cache_real));
  const std::vector<double> v_fake =
      score_column(mlp_forward(pair.discriminator, fake, &cache_fake));
  const std::size_t nr = real.rows(), nf = fake.rows();
  Matrix gy_real(nr, 1), gy_fake(nf, 1);
  for (std::size_t i = 0; i < nr; ++i) gy_real(i, 0) = spec.df1(v_real[i]) / static_cast<double>(nr);
  for (std::size_t i = 0; i < nf; ++i) gy_fake(i, 0) = spec.df2(v_fake[i]) / static_cast<double>(nf);
  BackwardResult acc = mlp_backward(pair.discriminator, cache_real, gy_real);
  const BackwardResult add = mlp_backward(pair.discriminator, cache_fake, gy_fake);
  std::vector<Matrix> out;
  out.reserve(acc.layers.size());
  for (std::size_t l = 0; l < acc.layers.size(); ++l) {
    Matrix& m = acc.layers[l].weights;
    for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] += add.layers[l].weights.data()[k];
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace sparsegan
