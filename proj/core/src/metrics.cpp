#include "sparsegan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsegan/error.hpp"

namespace sparsegan {

GaussianSummary fit_gaussian(const Matrix& samples) {
  const std::size_t n = samples.rows();
  if (n < 2) throw ConfigError("fit_gaussian: need at least 2 samples");
  if (samples.cols() != 2) throw ConfigError("fit_gaussian: samples must be N x 2");
  if (!samples.all_finite()) throw NumericError("fit_gaussian: non-finite sample");

  GaussianSummary g;
  for (std::size_t i = 0; i < n; ++i) {
    g.mean[0] += samples(i, 0);
    g.mean[1] += samples(i, 1);
  }
  g.mean[0] /= static_cast<double>(n);
  g.mean[1] /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = samples(i, 0) - g.mean[0];
    const double dy = samples(i, 1) - g.mean[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  g.cov[0][0] = sxx / static_cast<double>(n);
  g.cov[0][1] = sxy / static_cast<double>(n);
  g.cov[1][0] = g.cov[0][1];
  g.cov[1][1] = syy / static_cast<double>(n);
  return g;
}

double frechet_2d(const GaussianSummary& a, const GaussianSummary& b) {
  const double dx = a.mean[0] - b.mean[0];
  const double dy = a.mean[1] - b.mean[1];
  const double mean_term = dx * dx + dy * dy;

  // C = cov_a * cov_b
  const double c00 = a.cov[0][0] * b.cov[0][0] + a.cov[0][1] * b.cov[1][0];
  const double c01 = a.cov[0][0] * b.cov[0][1] + a.cov[0][1] * b.cov[1][1];
  const double c10 = a.cov[1][0] * b.cov[0][0] + a.cov[1][1] * b.cov[1][0];
  const double c11 = a.cov[1][0] * b.cov[0][1] + a.cov[1][1] * b.cov[1][1];
  const double tr_c = c00 + c11;
  double det_c = c00 * c11 - c01 * c10;
  if (det_c < 0.0) det_c = 0.0;
  double inner = tr_c + 2.0 * std::sqrt(det_c);
  if (inner < 0.0) inner = 0.0;
  const double tr_sqrt_c = std::sqrt(inner);

  const double fd = mean_term + a.cov[0][0] + a.cov[1][1] + b.cov[0][0] + b.cov[1][1] -
                    2.0 * tr_sqrt_c;
  return fd < 0.0 ? 0.0 : fd;
}

ModeStats mode_stats(const Matrix& samples, std::span<const std::array<double, 2>> centers,
                     double sigma) {
  if (centers.empty()) throw ConfigError("mode_stats: no centers");
  if (samples.cols() != 2) throw ConfigError("mode_stats: samples must be N x 2");
  if (!(sigma > 0.0)) throw ConfigError("mode_stats: sigma must be positive");

  const std::size_t n = samples.rows();
  const std::size_t k = centers.size();
  const double r2 = 9.0 * sigma * sigma;  // (3 sigma)^2
  std::vector<std::size_t> hq_counts(k, 0);
  std::size_t hq_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = samples(i, 0), y = samples(i, 1);
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double ddx = x - centers[c][0];
      const double ddy = y - centers[c][1];
      const double d2 = ddx * ddx + ddy * ddy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    if (best_d2 <= r2) {
      ++hq_counts[best];
      ++hq_total;
    }
  }

  const double threshold =
      std::max(20.0, static_cast<double>(n) / (10.0 * static_cast<double>(k)));
  ModeStats st;
  for (std::size_t c = 0; c < k; ++c) {
    if (static_cast<double>(hq_counts[c]) >= threshold) ++st.covered;
  }
  st.hq_fraction = n == 0 ? 0.0 : static_cast<double>(hq_total) / static_cast<double>(n);
  return st;
}

void FlopsLedger::record(Component comp, Direction dir, std::span<const LayerCost> layers,
                         std::uint64_t batch) {
  std::uint64_t live = 0, dense = 0;
  for (const LayerCost& lc : layers) {
    live += (2 * static_cast<std::uint64_t>(lc.active) + lc.n_out) * batch;
    dense += (2 * static_cast<std::uint64_t>(lc.dense) + lc.n_out) * batch;
  }
  if (dir == Direction::Backward) {
    live *= 2;
    dense *= 2;
  }
  switch (comp) {
    case Component::Generator:
      (dir == Direction::Forward ? g_fwd_ : g_bwd_) += live;
      break;
    case Component::Discriminator:
      (dir == Direction::Forward ? d_fwd_ : d_bwd_) += live;
      break;
  }
  if (baseline_active_) dense_total_ += dense;
}

std::uint64_t FlopsLedger::forward(Component comp) const {
  return comp == Component::Generator ? g_fwd_ : d_fwd_;
}

std::uint64_t FlopsLedger::backward(Component comp) const {
  return comp == Component::Generator ? g_bwd_ : d_bwd_;
}

std::uint64_t FlopsLedger::total() const { return g_fwd_ + g_bwd_ + d_fwd_ + d_bwd_; }

std::uint64_t FlopsLedger::dense_total() const { return dense_total_; }

double normalized_flops(const FlopsLedger& ledger) {
  if (ledger.dense_total() == 0)
    throw ConfigError("normalized_flops: empty dense baseline");
  return static_cast<double>(ledger.total()) / static_cast<double>(ledger.dense_total());
}

std::vector<LayerCost> layer_costs(const Mlp& net) {
  std::vector<LayerCost> out;
  out.reserve(net.layers.size());
  for (const auto& p : net.layers) {
    out.push_back({p.active_count(), p.n_out(), p.weight_count()});
  }
  return out;
}

}  // namespace sparsegan
