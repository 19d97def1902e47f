#pragma once

#include <array>
#include <vector>

#include "sparsegan/matrix.hpp"
#include "sparsegan/rng.hpp"

namespace sparsegan {

/// Synthetic 2-D Gaussian mixtures.
///   Ring: k centers at radius * (cos 2*pi*i/k, sin 2*pi*i/k).
///   Grid: m x m lattice centered on the origin with the given spacing.
/// Each draw picks a center uniformly and adds N(0, sigma^2 I) noise.
struct DatasetSpec {
  enum class Kind { Ring, Grid };
  Kind kind = Kind::Ring;
  std::size_t count = 8;    // ring: number of centers; grid: side length m
  double scale = 2.0;       // ring: radius; grid: spacing
  double sigma = 0.05;

  std::size_t mode_count() const {
    return kind == Kind::Ring ? count : count * count;
  }
};

std::vector<std::array<double, 2>> dataset_centers(const DatasetSpec& spec);

/// n draws, one per row.
Matrix sample_dataset(const DatasetSpec& spec, std::size_t n, Rng& rng);

}  // namespace sparsegan
