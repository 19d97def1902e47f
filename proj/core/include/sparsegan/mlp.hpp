#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsegan/masked_param.hpp"
#include "sparsegan/matrix.hpp"
#include "sparsegan/rng.hpp"

namespace sparsegan {

/// Feed-forward net: rectifier on hidden layers, identity on the last layer.
struct Mlp {
  std::vector<MaskedParam> layers;

  std::size_t input_dim() const { return layers.front().n_in(); }
  std::size_t output_dim() const { return layers.back().n_out(); }
  std::size_t weight_count() const;
  std::size_t active_weight_count() const;
};

/// Intermediate activations captured by mlp_forward for a later backward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;    // input to each layer, batch x n_in
  std::vector<Matrix> preacts;   // pre-activation of each layer, batch x n_out
  std::vector<std::size_t> dims; // layer fingerprint used to reject stale caches
};

struct LayerGrads {
  Matrix weights;            // same shape as the layer, dense: all positions
  std::vector<double> bias;
};

struct BackwardResult {
  std::vector<LayerGrads> layers;
  Matrix input;  // gradient w.r.t. the net input, batch x input_dim
};

/// dims = {n_in, h1, ..., n_out}; all masks start fully dense, weights zero.
Mlp make_mlp(std::span<const std::size_t> dims);

/// He-normal weight init (stddev sqrt(2 / n_in)), zero biases. Values are
/// drawn for every position, then the existing mask is re-applied, so the
/// surviving weights do not depend on the mask.
void init_weights(Mlp& net, Rng& rng);

/// x is batch x input_dim. Returns batch x output_dim. When cache is given it
/// is filled for mlp_backward.
Matrix mlp_forward(const Mlp& net, const Matrix& x, ForwardCache* cache = nullptr);

/// Backpropagates grad_y (batch x output_dim, the loss gradient w.r.t. the
/// net output). Weight gradients are reported at every position, including
/// inactive ones: this is the gradient w.r.t. the effective weight, which
/// gradient-based growth needs. The chain through the net itself uses the
/// masked weights, so active gradients match the true masked function.
BackwardResult mlp_backward(const Mlp& net, const ForwardCache& cache, const Matrix& grad_y);

}  // namespace sparsegan
