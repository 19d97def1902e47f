#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsegan/matrix.hpp"
#include "sparsegan/mlp.hpp"

namespace sparsegan {

/// Mean and covariance of a 2-D sample (covariance normalized by N).
struct GaussianSummary {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<std::array<double, 2>, 2> cov{{{0.0, 0.0}, {0.0, 0.0}}};
};

/// samples is N x 2 with N >= 2.
GaussianSummary fit_gaussian(const Matrix& samples);

/// Squared Fréchet distance between two 2-D Gaussians:
///   |mu_a - mu_b|^2 + tr(Ca) + tr(Cb) - 2 tr sqrt(Ca Cb),
/// with tr sqrt(C) = sqrt(tr C + 2 sqrt(det C)) for 2x2 and the inner
/// determinant clamped at zero against roundoff.
double frechet_2d(const GaussianSummary& a, const GaussianSummary& b);

struct ModeStats {
  std::size_t covered = 0;
  double hq_fraction = 0.0;
};

/// A sample is high quality when it lies within 3*sigma of its nearest
/// center; a center counts as covered when it is nearest center for at least
/// max(20, N / (10 K)) high-quality samples.
ModeStats mode_stats(const Matrix& samples, std::span<const std::array<double, 2>> centers,
                     double sigma);

enum class Component { Generator, Discriminator };
enum class Direction { Forward, Backward };

/// Per-layer cost inputs for one pass: the live active count, the output
/// width (bias adds), and the dense weight count of the layer.
struct LayerCost {
  std::size_t active = 0;
  std::size_t n_out = 0;
  std::size_t dense = 0;
};

/// Cumulative training FLOPs, split by component and direction, next to the
/// cost the same pass sequence would have at full density. A forward pass
/// costs (2 * active + n_out) * batch per layer; a backward pass twice that.
/// The dense side can be frozen (stop_baseline) so extra phases, e.g. a
/// post-pruning fine-tune, accrue against the original schedule's baseline.
class FlopsLedger {
 public:
  void record(Component comp, Direction dir, std::span<const LayerCost> layers,
              std::uint64_t batch);

  void stop_baseline() { baseline_active_ = false; }

  std::uint64_t forward(Component comp) const;
  std::uint64_t backward(Component comp) const;
  std::uint64_t total() const;
  std::uint64_t dense_total() const;

 private:
  std::uint64_t g_fwd_ = 0, g_bwd_ = 0, d_fwd_ = 0, d_bwd_ = 0;
  std::uint64_t dense_total_ = 0;
  bool baseline_active_ = true;
};

/// total / dense_total; requires a non-empty dense baseline.
double normalized_flops(const FlopsLedger& ledger);

/// The ledger cost description of a net's current state.
std::vector<LayerCost> layer_costs(const Mlp& net);

}  // namespace sparsegan
