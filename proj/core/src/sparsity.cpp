#include "sparsegan/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Scored {
  double key = 0.0;  // sort key, ascending
  Pos pos;
  bool operator<(const Scored& o) const {
    if (key != o.key) return key < o.key;
    return pos < o.pos;
  }
};

std::vector<std::size_t> layer_actives(std::span<const MaskedParam> params) {
  std::vector<std::size_t> a(params.size());
  for (std::size_t l = 0; l < params.size(); ++l) a[l] = params[l].active_count();
  return a;
}

// Smallest-|weight| active positions, global order, ties by position.
std::vector<Pos> pick_drops(std::span<const MaskedParam> params, std::size_t k) {
  std::vector<Scored> cand;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& p = params[l];
    for (std::size_t i = 0; i < p.mask.rows(); ++i) {
      for (std::size_t j = 0; j < p.mask.cols(); ++j) {
        if (p.mask(i, j) == 1.0) cand.push_back({std::fabs(p.weights(i, j)), Pos{l, i, j}});
      }
    }
  }
  if (k > cand.size()) throw InternalError("pick_drops: k exceeds active count");
  std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  std::vector<Pos> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(cand[i].pos);
  return out;
}

// k grow positions among `inactive`, by largest |gradient| (ties by position)
// or uniformly at random.
std::vector<Pos> pick_grows(std::span<const Pos> inactive, std::span<const Matrix> dense_grads,
                            std::size_t k, GrowMode mode, Rng& rng) {
  if (k > inactive.size()) throw InternalError("pick_grows: k exceeds inactive count");
  std::vector<Pos> out;
  out.reserve(k);
  if (mode == GrowMode::Gradient) {
    if (dense_grads.empty())
      throw InternalError("pick_grows: gradient growth requires dense gradients");
    std::vector<Scored> cand;
    cand.reserve(inactive.size());
    for (const Pos& p : inactive) {
      cand.push_back({-std::fabs(dense_grads[p.layer](p.row, p.col)), p});
    }
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t i = 0; i < k; ++i) out.push_back(cand[i].pos);
  } else {
    std::vector<Pos> pool(inactive.begin(), inactive.end());
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  }
  return out;
}

// Installs a drop/grow delta through apply_mask_change, one layer at a time,
// with declared per-layer counts as a bookkeeping check.
void install_delta(std::span<MaskedParam> params, const MaskDelta& delta) {
  std::vector<Matrix> new_masks;
  new_masks.reserve(params.size());
  std::vector<std::size_t> declared = layer_actives(params);
  for (const auto& p : params) new_masks.push_back(p.mask);
  for (const Pos& p : delta.dropped) {
    new_masks[p.layer](p.row, p.col) = 0.0;
    declared[p.layer] -= 1;
  }
  for (const Pos& p : delta.grown) {
    new_masks[p.layer](p.row, p.col) = 1.0;
    declared[p.layer] += 1;
  }
  for (std::size_t l = 0; l < params.size(); ++l) {
    apply_mask_change(params[l], new_masks[l], declared[l]);
  }
}

std::vector<Pos> inactive_positions(std::span<const MaskedParam> params) {
  std::vector<Pos> out;
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& p = params[l];
    for (std::size_t i = 0; i < p.mask.rows(); ++i) {
      for (std::size_t j = 0; j < p.mask.cols(); ++j) {
        if (p.mask(i, j) == 0.0) out.push_back(Pos{l, i, j});
      }
    }
  }
  return out;
}

void check_grads(std::span<const MaskedParam> params, std::span<const Matrix> dense_grads) {
  if (dense_grads.size() != params.size())
    throw InternalError("dst: gradient list does not match layer list");
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (!dense_grads[l].same_shape(params[l].weights))
      throw InternalError("dst: gradient shape mismatch at layer " + std::to_string(l));
  }
}

}  // namespace

double raw_density_factor(const LayerShape& shape, AllocMode mode) {
  if (shape.n_in == 0 || shape.n_out == 0 || shape.kernel_w == 0 || shape.kernel_h == 0)
    throw ConfigError("raw_density_factor: zero-sized layer");
  switch (mode) {
    case AllocMode::Uniform:
      return 1.0;
    case AllocMode::Er:
      return static_cast<double>(shape.n_in + shape.n_out) /
             static_cast<double>(shape.n_in * shape.n_out);
    case AllocMode::Erk:
      return static_cast<double>(shape.n_in + shape.n_out + shape.kernel_w + shape.kernel_h) /
             static_cast<double>(shape.n_in * shape.n_out * shape.kernel_w * shape.kernel_h);
  }
  throw ConfigError("raw_density_factor: unknown mode");
}

DensityAllocation allocate_densities(std::span<const LayerShape> shapes, double d, AllocMode mode) {
  if (shapes.empty()) throw ConfigError("allocate_densities: no layers");
  if (!(d > 0.0) || d > 1.0) throw ConfigError("allocate_densities: density must be in (0, 1]");

  const std::size_t L = shapes.size();
  std::vector<std::size_t> sizes(L);
  std::size_t total = 0;
  for (std::size_t l = 0; l < L; ++l) {
    sizes[l] = shapes[l].weight_count();
    if (sizes[l] == 0) throw ConfigError("allocate_densities: zero-sized layer");
    total += sizes[l];
  }
  const auto target = static_cast<std::size_t>(std::llround(d * static_cast<double>(total)));

  DensityAllocation out;
  out.target = d;
  out.density.assign(L, 0.0);

  std::vector<bool> capped(L, false);
  if (mode == AllocMode::Uniform || L == 1) {
    // A single layer's solved density is exactly d in any mode.
    for (std::size_t l = 0; l < L; ++l) out.density[l] = d;
    if (d == 1.0) capped.assign(L, true);
  } else {
    std::vector<double> raw(L);
    for (std::size_t l = 0; l < L; ++l) raw[l] = raw_density_factor(shapes[l], mode);
    // Solve eps with iterative capping: density_l = min(1, eps * raw_l) and
    // the expected total stays d * total.
    for (;;) {
      double capped_mass = 0.0, denom = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        if (capped[l])
          capped_mass += static_cast<double>(sizes[l]);
        else
          denom += raw[l] * static_cast<double>(sizes[l]);
      }
      if (denom == 0.0) break;  // everything capped
      const double eps = (d * static_cast<double>(total) - capped_mass) / denom;
      if (eps < 0.0)
        throw ConfigError("allocate_densities: density target unreachable after capping");
      bool changed = false;
      for (std::size_t l = 0; l < L; ++l) {
        if (!capped[l] && eps * raw[l] >= 1.0) {
          capped[l] = true;
          changed = true;
        }
      }
      if (!changed) {
        for (std::size_t l = 0; l < L; ++l) {
          if (!capped[l]) out.density[l] = eps * raw[l];
        }
        break;
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (capped[l]) out.density[l] = 1.0;
    }
  }

  out.active.assign(L, 0);
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const auto n = capped[l]
                       ? sizes[l]
                       : static_cast<std::size_t>(std::llround(out.density[l] * static_cast<double>(sizes[l])));
    out.active[l] = std::min(n, sizes[l]);
    assigned += out.active[l];
  }

  // Push the rounding remainder into the largest uncapped layers.
  auto diff = static_cast<std::ptrdiff_t>(target) - static_cast<std::ptrdiff_t>(assigned);
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
    return a < b;
  });
  for (int pass = 0; pass < 2 && diff != 0; ++pass) {
    // First pass prefers uncapped layers; second may touch any layer.
    for (std::size_t idx : order) {
      if (diff == 0) break;
      if (pass == 0 && capped[idx]) continue;
      if (diff > 0) {
        const auto room = static_cast<std::ptrdiff_t>(sizes[idx] - out.active[idx]);
        const auto take = std::min(diff, room);
        out.active[idx] += static_cast<std::size_t>(take);
        diff -= take;
      } else {
        const auto room = static_cast<std::ptrdiff_t>(out.active[idx]);
        const auto take = std::min(-diff, room);
        out.active[idx] -= static_cast<std::size_t>(take);
        diff += take;
      }
    }
  }
  if (diff != 0) throw ConfigError("allocate_densities: could not realize global density target");
  return out;
}

std::vector<Matrix> init_masks(const DensityAllocation& alloc,
                               std::span<const LayerShape> shapes, Rng& rng) {
  if (alloc.active.size() != shapes.size())
    throw InternalError("init_masks: allocation does not match shape list");
  std::vector<Matrix> masks;
  masks.reserve(shapes.size());
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const std::size_t rows = shapes[l].n_out;
    const std::size_t cols = shapes[l].n_in * shapes[l].kernel_w * shapes[l].kernel_h;
    const std::size_t n = rows * cols;
    const std::size_t k = alloc.active[l];
    if (k > n) throw InternalError("init_masks: active count exceeds layer size");
    Matrix m(rows, cols);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_index(n - i);
      std::swap(idx[i], idx[j]);
      m.data()[idx[i]] = 1.0;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

double decay_fraction(double gamma, std::uint64_t t, std::uint64_t total_iters) {
  if (total_iters == 0) throw ConfigError("decay_fraction: total iteration count must be positive");
  if (t > total_iters) throw InternalError("decay_fraction: t exceeds total iterations");
  if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("decay_fraction: gamma must be in (0, 1]");
  const double ratio = static_cast<double>(t) / static_cast<double>(total_iters);
  return gamma / 2.0 * (1.0 + std::cos(kPi * ratio));
}

MaskDelta dst_step(std::span<MaskedParam> params, std::span<const Matrix> dense_grads,
                   std::size_t k, GrowMode mode, Rng& rng) {
  if (params.empty()) throw InternalError("dst_step: no layers");
  if (mode == GrowMode::Gradient) check_grads(params, dense_grads);

  const std::vector<Pos> inactive = inactive_positions(params);
  std::size_t active_total = 0;
  for (const auto& p : params) active_total += p.active_count();

  std::size_t k_eff = std::min(k, std::min(active_total, inactive.size()));
  if (k_eff < k) {
    std::fprintf(stderr, "[sparsegan] warning: dst_step clamped k from %zu to %zu\n", k, k_eff);
  }

  MaskDelta delta;
  if (k_eff > 0) {
    delta.dropped = pick_drops(params, k_eff);
    delta.grown = pick_grows(inactive, dense_grads, k_eff, mode, rng);
  }
  install_delta(params, delta);
  return delta;
}

MaskDelta set_active_count(std::span<MaskedParam> params, std::span<const Matrix> dense_grads,
                           std::size_t new_total, GrowMode mode, Rng& rng) {
  if (params.empty()) throw InternalError("set_active_count: no layers");
  std::size_t weight_total = 0, active_total = 0;
  for (const auto& p : params) {
    weight_total += p.weight_count();
    active_total += p.active_count();
  }
  if (new_total == 0) throw ConfigError("set_active_count: active count must stay positive");
  if (new_total > weight_total)
    throw ConfigError("set_active_count: requested count exceeds parameter count");

  MaskDelta delta;
  if (new_total > active_total) {
    if (mode == GrowMode::Gradient) check_grads(params, dense_grads);
    const std::vector<Pos> inactive = inactive_positions(params);
    delta.grown = pick_grows(inactive, dense_grads, new_total - active_total, mode, rng);
  } else if (new_total < active_total) {
    delta.dropped = pick_drops(params, active_total - new_total);
  }
  install_delta(params, delta);
  return delta;
}

}  // namespace sparsegan
