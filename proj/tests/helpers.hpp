#pragma once

// Shared test utilities: sparse net construction, finite-difference gradient
// oracles, and the full-sort topology oracle the fuzz suites compare against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sparsegan/gan.hpp"
#include "sparsegan/mlp.hpp"
#include "sparsegan/rng.hpp"
#include "sparsegan/sparsity.hpp"

namespace testutil {

inline std::vector<sparsegan::LayerShape> net_shapes(const sparsegan::Mlp& net) {
  std::vector<sparsegan::LayerShape> shapes;
  for (const auto& p : net.layers) shapes.push_back({p.n_in(), p.n_out(), 1, 1});
  return shapes;
}

inline sparsegan::Mlp make_sparse_net(std::span<const std::size_t> dims, double density,
                                      sparsegan::AllocMode mode, sparsegan::Rng& rng) {
  sparsegan::Mlp net = sparsegan::make_mlp(dims);
  const auto shapes = net_shapes(net);
  const auto alloc = sparsegan::allocate_densities(shapes, density, mode);
  const auto masks = sparsegan::init_masks(alloc, shapes, rng);
  for (std::size_t l = 0; l < masks.size(); ++l)
    sparsegan::apply_mask_change(net.layers[l], masks[l], alloc.active[l]);
  sparsegan::init_weights(net, rng);
  return net;
}

// Smallest |pre-activation| over the hidden layers. Finite differences near a
// rectifier kink are garbage; callers reseed until this margin is comfortable.
inline double min_relu_margin(const sparsegan::Mlp& net, const sparsegan::Matrix& x) {
  sparsegan::ForwardCache cache;
  sparsegan::mlp_forward(net, x, &cache);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < cache.preacts.size(); ++l) {
    const auto& pre = cache.preacts[l];
    for (std::size_t k = 0; k < pre.size(); ++k)
      margin = std::min(margin, std::fabs(pre.data()[k]));
  }
  return margin;
}

// Central difference through an arbitrary scalar evaluation, perturbing one
// double in place.
inline double central_diff(double& slot, const std::function<double()>& eval, double h = 1e-6) {
  const double saved = slot;
  slot = saved + h;
  const double up = eval();
  slot = saved - h;
  const double down = eval();
  slot = saved;
  return (up - down) / (2.0 * h);
}

struct GradCheck {
  double max_rel_err = 0.0;
  std::size_t checked = 0;

  void feed(double analytic, double numeric, double scale) {
    const double err = std::fabs(analytic - numeric) / std::max(scale, 1e-12);
    max_rel_err = std::max(max_rel_err, err);
    ++checked;
  }
};

inline double grad_inf_norm(const sparsegan::BackwardResult& g) {
  double m = 0.0;
  for (const auto& lg : g.layers) {
    for (std::size_t k = 0; k < lg.weights.size(); ++k)
      m = std::max(m, std::fabs(lg.weights.data()[k]));
    for (double b : lg.bias) m = std::max(m, std::fabs(b));
  }
  return m;
}

// Checks every active weight, every bias, and every inactive weight of `net`
// against central differences of `eval` (which must read the net's current
// parameters). Inactive weights are probed by temporarily activating the
// position at value zero, which leaves the function unchanged.
inline GradCheck check_weight_grads(sparsegan::Mlp& net, const sparsegan::BackwardResult& grads,
                                    const std::function<double()>& eval) {
  GradCheck res;
  const double scale = grad_inf_norm(grads);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& p = net.layers[l];
    for (std::size_t i = 0; i < p.weights.rows(); ++i) {
      for (std::size_t j = 0; j < p.weights.cols(); ++j) {
        const bool active = p.mask(i, j) == 1.0;
        if (!active) p.mask(i, j) = 1.0;
        const double fd = central_diff(p.weights(i, j), eval);
        if (!active) {
          p.mask(i, j) = 0.0;
          p.weights(i, j) = 0.0;
        }
        res.feed(grads.layers[l].weights(i, j), fd, scale);
      }
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      const double fd = central_diff(p.bias[i], eval);
      res.feed(grads.layers[l].bias[i], fd, scale);
    }
  }
  return res;
}

// Independent selection oracle: full sort instead of nth_element, same total
// order (key ascending, then position).
struct OraclePick {
  double key = 0.0;
  sparsegan::Pos pos;
};

inline std::vector<sparsegan::Pos> sorted_take(std::vector<OraclePick> cand, std::size_t k) {
  std::sort(cand.begin(), cand.end(), [](const OraclePick& a, const OraclePick& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.pos < b.pos;
  });
  std::vector<sparsegan::Pos> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(cand[i].pos);
  return out;
}

inline std::vector<sparsegan::Pos> oracle_drops(std::span<const sparsegan::MaskedParam> params,
                                                std::size_t k) {
  std::vector<OraclePick> cand;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& p = params[l];
    for (std::size_t i = 0; i < p.mask.rows(); ++i)
      for (std::size_t j = 0; j < p.mask.cols(); ++j)
        if (p.mask(i, j) == 1.0) cand.push_back({std::fabs(p.weights(i, j)), {l, i, j}});
  }
  return sorted_take(std::move(cand), k);
}

inline std::vector<sparsegan::Pos> oracle_inactive(std::span<const sparsegan::MaskedParam> params) {
  std::vector<sparsegan::Pos> out;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& p = params[l];
    for (std::size_t i = 0; i < p.mask.rows(); ++i)
      for (std::size_t j = 0; j < p.mask.cols(); ++j)
        if (p.mask(i, j) == 0.0) out.push_back({l, i, j});
  }
  return out;
}

inline std::vector<sparsegan::Pos> oracle_grad_grows(std::span<const sparsegan::Pos> inactive,
                                                     std::span<const sparsegan::Matrix> grads,
                                                     std::size_t k) {
  std::vector<OraclePick> cand;
  for (const auto& p : inactive)
    cand.push_back({-std::fabs(grads[p.layer](p.row, p.col)), p});
  return sorted_take(std::move(cand), k);
}

// Replays the partial Fisher-Yates draw on a copy of the engine state, in the
// same candidate order the library enumerates (layer, row, column ascending).
inline std::vector<sparsegan::Pos> oracle_random_grows(std::vector<sparsegan::Pos> pool,
                                                       std::size_t k, sparsegan::Rng rng) {
  std::vector<sparsegan::Pos> out;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

inline std::vector<sparsegan::Pos> sorted_copy(std::vector<sparsegan::Pos> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Exact-zero closure at inactive positions; returns false on the first hole.
inline bool closure_holds(const sparsegan::Mlp& net) {
  for (const auto& p : net.layers) {
    for (std::size_t k = 0; k < p.mask.size(); ++k) {
      const double m = p.mask.data()[k];
      if (m != 0.0 && m != 1.0) return false;
      if (m == 0.0 && (p.weights.data()[k] != 0.0 || p.moment1.data()[k] != 0.0 ||
                       p.moment2.data()[k] != 0.0))
        return false;
    }
  }
  return true;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::current_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
