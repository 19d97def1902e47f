#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsegan/masked_param.hpp"
#include "sparsegan/matrix.hpp"
#include "sparsegan/rng.hpp"

namespace sparsegan {

struct LayerShape {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t kernel_w = 1;  // 1 for fully connected layers
  std::size_t kernel_h = 1;

  std::size_t weight_count() const { return n_in * n_out * kernel_w * kernel_h; }
};

enum class AllocMode { Uniform, Er, Erk };

/// Per-layer density targets plus the integer active counts that realize them.
/// Invariant: sum(active) == llround(d * total weight count).
struct DensityAllocation {
  std::vector<double> density;      // real-valued per-layer targets
  std::vector<std::size_t> active;  // rounded per-layer counts, globally exact
  double target = 0.0;              // the requested global density d
};

/// Unnormalized density factor: 1 for uniform, (n_in+n_out)/(n_in*n_out) for
/// ER, (n_in+n_out+kw+kh)/(n_in*n_out*kw*kh) for ERK.
double raw_density_factor(const LayerShape& shape, AllocMode mode);

/// Scales the raw factors by a common epsilon so the expected active count is
/// d * total, capping any layer that would exceed density 1 and re-solving.
/// Per-layer counts are rounded; the global remainder is pushed into the
/// largest uncapped layers so the global count is exactly llround(d * total).
DensityAllocation allocate_densities(std::span<const LayerShape> shapes, double d, AllocMode mode);

/// One binary mask per layer (n_out rows, n_in*kw*kh cols) with exactly
/// alloc.active[l] ones, positions uniform without replacement.
std::vector<Matrix> init_masks(const DensityAllocation& alloc,
                               std::span<const LayerShape> shapes, Rng& rng);

/// Cosine-annealed adjusted fraction: (gamma/2) * (1 + cos(pi * t / T)).
/// Equals gamma at t=0, gamma/2 at t=T/2, 0 at t=T.
double decay_fraction(double gamma, std::uint64_t t, std::uint64_t total_iters);

enum class GrowMode { Random, Gradient };

struct Pos {
  std::size_t layer = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  auto operator<=>(const Pos&) const = default;
};

struct MaskDelta {
  std::vector<Pos> dropped;
  std::vector<Pos> grown;
};

/// One drop/grow round across all layers of a net: drops the k active weights
/// of smallest magnitude (global order, ties by position), then activates k
/// currently inactive positions, either those with the largest dense
/// gradient magnitude or uniformly at random. Grow candidates are positions
/// inactive before the drop, so the two sets never overlap and the global
/// active count is conserved. An infeasible k is clamped with a warning.
MaskDelta dst_step(std::span<MaskedParam> params, std::span<const Matrix> dense_grads,
                   std::size_t k, GrowMode mode, Rng& rng);

/// Moves the net's global active count to exactly new_total: grows by the
/// configured mode when increasing, drops smallest-magnitude weights when
/// decreasing. dense_grads may be empty unless growing in Gradient mode.
MaskDelta set_active_count(std::span<MaskedParam> params, std::span<const Matrix> dense_grads,
                           std::size_t new_total, GrowMode mode, Rng& rng);

}  // namespace sparsegan
