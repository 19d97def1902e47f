#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sparsegan {

/// One balance-ratio observation.
///   alpha = mean(D(G_post(z))) - mean(D(G_pre(z)))   (same z, same D)
///   beta  = mean(D(x_real))    - mean(D(G_pre(z)))
///   br    = alpha / beta, degenerate when |beta| <= 1e-8.
struct BrSample {
  double alpha = 0.0;
  double beta = 0.0;
  double br = 0.0;
  bool degenerate = false;
};

BrSample balance_ratio(std::span<const double> scores_real,
                       std::span<const double> scores_fake_pre,
                       std::span<const double> scores_fake_post);

/// Fixed-capacity ring of the most recent valid balance ratios. Degenerate
/// samples are never stored.
class BrWindow {
 public:
  explicit BrWindow(std::size_t capacity = 1000);

  void push(double br);
  void push(const BrSample& s) {
    if (!s.degenerate) push(s.br);
  }

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return buf_.size(); }

  /// Mean of the retained samples; empty window yields nullopt.
  std::optional<double> average() const;

 private:
  std::vector<double> buf_;
  std::size_t head_ = 0;   // next write slot
  std::size_t count_ = 0;  // number of valid entries, <= capacity
};

enum class ControllerKind { Static, Sdst, DstBoth, DdaStatic, AdaptRelax, AdaptStrict, Posthoc };

/// Discriminator-density controller state. d_d moves in delta_d increments
/// and is clamped to [d_min, d_max]; a clamp lands exactly on the bound so
/// at-cap comparisons stay exact.
struct ControllerState {
  ControllerKind kind = ControllerKind::Static;
  double d_d = 0.0;
  double d_min = 0.05;
  double d_max = 1.0;
  double delta_d = 0.05;
  double b_lo = 0.45;
  double b_hi = 0.55;
  std::uint64_t interval = 1000;  // boundary spacing in iterations
};

struct ControlAction {
  enum class Type { NoOp, SetDiscDensity, DiscDst };
  Type type = Type::NoOp;
  double density = 0.0;  // target d_d, only for SetDiscDensity

  static ControlAction noop() { return {}; }
  static ControlAction set_density(double d) { return {Type::SetDiscDensity, d}; }
  static ControlAction disc_dst() { return {Type::DiscDst, 0.0}; }
};

/// Density adjustment: br above the band raises d_d one increment (clamped to
/// d_max), below the band lowers it (clamped to d_min), inside the band holds.
ControlAction dda_decide(double br_avg, const ControllerState& state);

/// Same branch structure as dda_decide; the discriminator may densify all the
/// way to 1.0.
ControlAction adapt_relax_decide(double br_avg, const ControllerState& state);

/// Like adapt_relax_decide, but when br is above the band and d_d already sits
/// at d_max the discriminator gets a topology update instead of more density.
ControlAction adapt_strict_decide(double br_avg, const ControllerState& state);

/// Timer gate plus dispatch: NoOp away from boundaries, NoOp for kinds without
/// a density controller, NoOp when no balance average is available yet.
ControlAction controller_tick(std::uint64_t t, ControllerKind kind,
                              std::optional<double> br_avg, const ControllerState& state);

}  // namespace sparsegan
