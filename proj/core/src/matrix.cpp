#include "sparsegan/matrix.hpp"

#include <cmath>

namespace sparsegan {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::size_t Matrix::popcount() const {
  std::size_t n = 0;
  for (double v : data_) {
    if (v == 1.0) ++n;
  }
  return n;
}

}  // namespace sparsegan
