#include "sparsegan/mlp.hpp"

#include <cmath>

#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

// y = x * W^T + b; x: B x n_in, W: n_out x n_in.
Matrix linear_forward(const Matrix& x, const MaskedParam& p) {
  const std::size_t b = x.rows(), n_in = x.cols(), n_out = p.n_out();
  Matrix y(b, n_out);
  for (std::size_t r = 0; r < b; ++r) {
    const double* xr = x.data() + r * n_in;
    double* yr = y.data() + r * n_out;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wr = p.weights.data() + o * n_in;
      double s = p.bias[o];
      for (std::size_t i = 0; i < n_in; ++i) s += xr[i] * wr[i];
      yr[o] = s;
    }
  }
  return y;
}

}  // namespace

std::size_t Mlp::weight_count() const {
  std::size_t n = 0;
  for (const auto& p : layers) n += p.weight_count();
  return n;
}

std::size_t Mlp::active_weight_count() const {
  std::size_t n = 0;
  for (const auto& p : layers) n += p.active_count();
  return n;
}

Mlp make_mlp(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ConfigError("make_mlp: need at least input and output dims");
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("make_mlp: zero-width layer");
  }
  Mlp net;
  net.layers.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.layers.emplace_back(dims[l + 1], dims[l]);
  }
  return net;
}

void init_weights(Mlp& net, Rng& rng) {
  for (auto& p : net.layers) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(p.n_in()));
    for (std::size_t i = 0; i < p.weights.rows(); ++i) {
      for (std::size_t j = 0; j < p.weights.cols(); ++j) {
        p.weights(i, j) = rng.normal(0.0, stddev);
      }
    }
    for (double& b : p.bias) b = 0.0;
    p.enforce_mask();
  }
}

Matrix mlp_forward(const Mlp& net, const Matrix& x, ForwardCache* cache) {
  if (net.layers.empty()) throw InternalError("mlp_forward: empty net");
  if (x.cols() != net.input_dim())
    throw ConfigError("mlp_forward: input has " + std::to_string(x.cols()) +
                      " columns, net expects " + std::to_string(net.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->preacts.clear();
    cache->dims.clear();
    cache->dims.push_back(net.input_dim());
    for (const auto& p : net.layers) cache->dims.push_back(p.n_out());
  }

  Matrix cur = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (cache) cache->inputs.push_back(cur);
    Matrix pre = linear_forward(cur, net.layers[l]);
    if (cache) cache->preacts.push_back(pre);
    if (l + 1 < net.layers.size()) {
      for (std::size_t k = 0; k < pre.size(); ++k) {
        double& v = pre.data()[k];
        if (v < 0.0) v = 0.0;
      }
    }
    cur = std::move(pre);
  }
  return cur;
}

BackwardResult mlp_backward(const Mlp& net, const ForwardCache& cache, const Matrix& grad_y) {
  const std::size_t L = net.layers.size();
  if (cache.inputs.size() != L || cache.preacts.size() != L || cache.dims.size() != L + 1)
    throw InternalError("mlp_backward: cache does not match net");
  for (std::size_t l = 0; l < L; ++l) {
    if (cache.dims[l] != net.layers[l].n_in() || cache.dims[l + 1] != net.layers[l].n_out())
      throw InternalError("mlp_backward: stale cache (layer shape changed)");
  }
  const std::size_t batch = cache.inputs.front().rows();
  if (grad_y.rows() != batch || grad_y.cols() != net.output_dim())
    throw InternalError("mlp_backward: grad_y shape mismatch");

  BackwardResult out;
  out.layers.resize(L);

  Matrix delta = grad_y;  // gradient w.r.t. the current layer's pre-activation
  for (std::size_t l = L; l-- > 0;) {
    const MaskedParam& p = net.layers[l];
    const Matrix& input = cache.inputs[l];
    const std::size_t n_in = p.n_in(), n_out = p.n_out();

    LayerGrads& g = out.layers[l];
    g.weights = Matrix(n_out, n_in);
    g.bias.assign(n_out, 0.0);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* dr = delta.data() + r * n_out;
      const double* xr = input.data() + r * n_in;
      for (std::size_t o = 0; o < n_out; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        g.bias[o] += d;
        double* gw = g.weights.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) gw[i] += d * xr[i];
      }
    }

    // Gradient w.r.t. this layer's input, through the masked weights.
    Matrix dx(batch, n_in);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* dr = delta.data() + r * n_out;
      double* dxr = dx.data() + r * n_in;
      for (std::size_t o = 0; o < n_out; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        const double* wr = p.weights.data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) dxr[i] += d * wr[i];
      }
    }

    if (l == 0) {
      out.input = std::move(dx);
    } else {
      const Matrix& pre_prev = cache.preacts[l - 1];
      for (std::size_t k = 0; k < dx.size(); ++k) {
        if (pre_prev.data()[k] <= 0.0) dx.data()[k] = 0.0;
      }
      delta = std::move(dx);
    }
  }
  return out;
}

}  // namespace sparsegan
