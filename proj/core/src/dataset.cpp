#include "sparsegan/dataset.hpp"

#include <cmath>

#include "sparsegan/error.hpp"

namespace sparsegan {

std::vector<std::array<double, 2>> dataset_centers(const DatasetSpec& spec) {
  if (spec.count == 0) throw ConfigError("dataset: center count must be positive");
  if (!(spec.scale > 0.0)) throw ConfigError("dataset: scale must be positive");
  if (!(spec.sigma > 0.0)) throw ConfigError("dataset: sigma must be positive");

  std::vector<std::array<double, 2>> centers;
  if (spec.kind == DatasetSpec::Kind::Ring) {
    centers.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
      const double a = 2.0 * 3.141592653589793238462643 * static_cast<double>(i) /
                       static_cast<double>(spec.count);
      centers.push_back({spec.scale * std::cos(a), spec.scale * std::sin(a)});
    }
  } else {
    centers.reserve(spec.count * spec.count);
    const double off = (static_cast<double>(spec.count) - 1.0) / 2.0;
    for (std::size_t i = 0; i < spec.count; ++i) {
      for (std::size_t j = 0; j < spec.count; ++j) {
        centers.push_back({(static_cast<double>(i) - off) * spec.scale,
                           (static_cast<double>(j) - off) * spec.scale});
      }
    }
  }
  return centers;
}

Matrix sample_dataset(const DatasetSpec& spec, std::size_t n, Rng& rng) {
  const auto centers = dataset_centers(spec);
  Matrix out(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centers[rng.uniform_index(centers.size())];
    out(i, 0) = c[0] + rng.normal(0.0, spec.sigma);
    out(i, 1) = c[1] + rng.normal(0.0, spec.sigma);
  }
  return out;
}

}  // namespace sparsegan
