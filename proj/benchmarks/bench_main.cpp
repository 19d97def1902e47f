// Microbenchmarks for the hot paths of a training iteration: the dense-gradient
// forward/backward pair, the global drop/grow step, and the 2d Frechet distance.

#include <benchmark/benchmark.h>

#include <array>
#include <cstddef>
#include <vector>

#include "sparsegan/gan.hpp"
#include "sparsegan/metrics.hpp"
#include "sparsegan/mlp.hpp"
#include "sparsegan/rng.hpp"
#include "sparsegan/sparsity.hpp"

namespace {

sparsegan::Mlp make_net(std::size_t width, double density, sparsegan::Rng& rng) {
  const std::array<std::size_t, 4> dims{2, width, width, 2};
  sparsegan::Mlp net = sparsegan::make_mlp(dims);
  std::vector<sparsegan::LayerShape> shapes;
  for (const auto& layer : net.layers) shapes.push_back({layer.n_in(), layer.n_out()});
  const auto alloc = sparsegan::allocate_densities(shapes, density, sparsegan::AllocMode::Erk);
  const auto masks = sparsegan::init_masks(alloc, shapes, rng);
  for (std::size_t l = 0; l < masks.size(); ++l)
    sparsegan::apply_mask_change(net.layers[l], masks[l], alloc.active[l]);
  sparsegan::init_weights(net, rng);
  return net;
}

sparsegan::Matrix random_batch(std::size_t rows, std::size_t cols, sparsegan::Rng& rng) {
  sparsegan::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_ForwardBackward(benchmark::State& state) {
  sparsegan::Rng rng = sparsegan::Rng::for_stream(7, sparsegan::Stream::Init);
  sparsegan::Mlp net = make_net(static_cast<std::size_t>(state.range(0)), 0.3, rng);
  const sparsegan::Matrix x = random_batch(128, 2, rng);
  sparsegan::Matrix gy(128, 2);
  gy.fill(1.0 / 128.0);
  for (auto _ : state) {
    sparsegan::ForwardCache cache;
    const sparsegan::Matrix y = sparsegan::mlp_forward(net, x, &cache);
    benchmark::DoNotOptimize(y.data());
    const sparsegan::BackwardResult back = sparsegan::mlp_backward(net, cache, gy);
    benchmark::DoNotOptimize(back.input.data());
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256);

void BM_DstStep(benchmark::State& state) {
  sparsegan::Rng rng = sparsegan::Rng::for_stream(7, sparsegan::Stream::Init);
  sparsegan::Mlp net = make_net(static_cast<std::size_t>(state.range(0)), 0.3, rng);
  std::vector<sparsegan::Matrix> grads;
  for (const auto& layer : net.layers)
    grads.push_back(random_batch(layer.n_out(), layer.n_in(), rng));
  sparsegan::Rng dst_rng = sparsegan::Rng::for_stream(7, sparsegan::Stream::Dst);
  const std::size_t k = net.active_weight_count() / 10;
  for (auto _ : state) {
    sparsegan::dst_step(net.layers, grads, k, sparsegan::GrowMode::Gradient, dst_rng);
    benchmark::DoNotOptimize(net.layers.front().weights.data());
  }
}
BENCHMARK(BM_DstStep)->Arg(64)->Arg(256);

void BM_Frechet(benchmark::State& state) {
  sparsegan::Rng rng = sparsegan::Rng::for_stream(7, sparsegan::Stream::Eval);
  const sparsegan::Matrix a = random_batch(2048, 2, rng);
  const sparsegan::Matrix b = random_batch(2048, 2, rng);
  for (auto _ : state) {
    const auto ga = sparsegan::fit_gaussian(a);
    const auto gb = sparsegan::fit_gaussian(b);
    benchmark::DoNotOptimize(sparsegan::frechet_2d(ga, gb));
  }
}
BENCHMARK(BM_Frechet);

}  // namespace

BENCHMARK_MAIN();
