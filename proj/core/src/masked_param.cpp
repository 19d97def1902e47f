#include "sparsegan/masked_param.hpp"

#include <cmath>
#include <string>

#include "sparsegan/error.hpp"

namespace sparsegan {

MaskedParam::MaskedParam(std::size_t n_out, std::size_t n_in)
    : weights(n_out, n_in),
      mask(n_out, n_in, 1.0),
      moment1(n_out, n_in),
      moment2(n_out, n_in),
      bias(n_out, 0.0),
      bias_moment1(n_out, 0.0),
      bias_moment2(n_out, 0.0) {}

void MaskedParam::enforce_mask() {
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    for (std::size_t j = 0; j < weights.cols(); ++j) {
      if (mask(i, j) == 0.0) {
        weights(i, j) = 0.0;
        moment1(i, j) = 0.0;
        moment2(i, j) = 0.0;
      }
    }
  }
}

void adam_step(MaskedParam& p, const Matrix& dense_grad, const AdamConfig& cfg) {
  if (!dense_grad.same_shape(p.weights))
    throw InternalError("adam_step: gradient shape mismatch");
  if (!dense_grad.all_finite())
    throw NumericError("adam_step: non-finite weight gradient");

  p.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
  for (std::size_t i = 0; i < p.weights.rows(); ++i) {
    for (std::size_t j = 0; j < p.weights.cols(); ++j) {
      if (p.mask(i, j) == 0.0) continue;
      const double g = dense_grad(i, j);
      double& m = p.moment1(i, j);
      double& v = p.moment2(i, j);
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p.weights(i, j) -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void adam_step_bias(MaskedParam& p, std::span<const double> grad, const AdamConfig& cfg) {
  if (grad.size() != p.bias.size())
    throw InternalError("adam_step_bias: gradient size mismatch");
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("adam_step_bias: non-finite bias gradient");
  }

  p.bias_step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.bias_step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.bias_step));
  for (std::size_t i = 0; i < p.bias.size(); ++i) {
    const double g = grad[i];
    double& m = p.bias_moment1[i];
    double& v = p.bias_moment2[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    p.bias[i] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
  }
}

void apply_mask_change(MaskedParam& p, const Matrix& new_mask,
                       std::optional<std::size_t> expected_active) {
  if (!new_mask.same_shape(p.mask))
    throw InternalError("apply_mask_change: mask shape mismatch");
  for (std::size_t i = 0; i < new_mask.rows(); ++i) {
    for (std::size_t j = 0; j < new_mask.cols(); ++j) {
      const double m = new_mask(i, j);
      if (m != 0.0 && m != 1.0)
        throw InternalError("apply_mask_change: mask entries must be 0 or 1");
    }
  }
  if (expected_active && new_mask.popcount() != *expected_active)
    throw InternalError("apply_mask_change: declared active count " +
                        std::to_string(*expected_active) + " != mask popcount " +
                        std::to_string(new_mask.popcount()));

  for (std::size_t i = 0; i < new_mask.rows(); ++i) {
    for (std::size_t j = 0; j < new_mask.cols(); ++j) {
      const bool was = p.mask(i, j) == 1.0;
      const bool now = new_mask(i, j) == 1.0;
      if (was != now) {
        // Both directions reset the position: dropped weights are erased,
        // grown weights start from zero with fresh optimizer state.
        p.weights(i, j) = 0.0;
        p.moment1(i, j) = 0.0;
        p.moment2(i, j) = 0.0;
      }
      p.mask(i, j) = now ? 1.0 : 0.0;
    }
  }
}

}  // namespace sparsegan
