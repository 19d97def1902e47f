#include "sparsegan/rng.hpp"

#include <cmath>

#include "sparsegan/error.hpp"

namespace sparsegan {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw InternalError("uniform_index: n must be positive");
  const std::uint64_t span = n;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % span);
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 in (0, 1] keeps log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

}  // namespace sparsegan
