#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparsegan/matrix.hpp"

namespace sparsegan {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = 1e-8;
};

/// One linear layer's parameters plus its sparsity mask and optimizer state.
///
/// Closure invariant: wherever mask(i,j) == 0, weights, moment1 and moment2
/// hold exact 0.0. Every mutating operation in this library preserves it.
/// Biases are never masked and carry their own Adam state.
struct MaskedParam {
  Matrix weights;  // n_out x n_in
  Matrix mask;     // n_out x n_in, entries exactly 0.0 or 1.0
  Matrix moment1;  // Adam first moment, masked like weights
  Matrix moment2;  // Adam second moment, masked like weights
  std::uint64_t step = 0;

  std::vector<double> bias;  // n_out
  std::vector<double> bias_moment1;
  std::vector<double> bias_moment2;
  std::uint64_t bias_step = 0;

  MaskedParam() = default;
  MaskedParam(std::size_t n_out, std::size_t n_in);

  std::size_t n_out() const { return weights.rows(); }
  std::size_t n_in() const { return weights.cols(); }
  std::size_t weight_count() const { return weights.size(); }
  std::size_t active_count() const { return mask.popcount(); }

  /// Re-establishes the closure invariant after direct writes to weights or
  /// mask (used by initializers and tests).
  void enforce_mask();
};

/// One bias-corrected Adam update on the active weight positions. Inactive
/// positions are untouched and stay exactly zero. Throws NumericError on a
/// non-finite gradient entry.
void adam_step(MaskedParam& p, const Matrix& dense_grad, const AdamConfig& cfg);

/// Adam update for the (unmasked) bias vector.
void adam_step_bias(MaskedParam& p, std::span<const double> grad, const AdamConfig& cfg);

/// Installs a new mask. Newly inactive positions have weight and both moments
/// zeroed; newly active positions start at exact zero with zeroed moments;
/// surviving positions are untouched. When expected_active is given it is
/// checked against the new mask's popcount (bookkeeping guard).
void apply_mask_change(MaskedParam& p, const Matrix& new_mask,
                       std::optional<std::size_t> expected_active = std::nullopt);

}  // namespace sparsegan
