#include "sparsegan/balance.hpp"

#include <cmath>

#include "sparsegan/error.hpp"

namespace sparsegan {
namespace {

constexpr double kDegenerateBeta = 1e-8;
// Densities accumulate in delta_d increments; this tolerance snaps a step
// that lands within rounding error of a bound onto the bound itself.
constexpr double kSnap = 1e-9;

double mean(std::span<const double> xs, const char* who) {
  if (xs.empty()) throw InternalError(std::string(who) + ": empty score batch");
  double s = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericError(std::string(who) + ": non-finite score");
    s += x;
  }
  return s / static_cast<double>(xs.size());
}

double step_up(const ControllerState& st) {
  const double cand = st.d_d + st.delta_d;
  return cand >= st.d_max - kSnap ? st.d_max : cand;
}

double step_down(const ControllerState& st) {
  const double cand = st.d_d - st.delta_d;
  return cand <= st.d_min + kSnap ? st.d_min : cand;
}

bool at_cap(const ControllerState& st) { return st.d_d >= st.d_max - kSnap; }

ControlAction banded_decide(double br_avg, const ControllerState& st, bool strict) {
  if (!std::isfinite(br_avg)) throw NumericError("controller: non-finite balance average");
  if (br_avg > st.b_hi) {
    if (strict && at_cap(st)) return ControlAction::disc_dst();
    return ControlAction::set_density(step_up(st));
  }
  if (br_avg < st.b_lo) return ControlAction::set_density(step_down(st));
  return ControlAction::noop();
}

}  // namespace

BrSample balance_ratio(std::span<const double> scores_real,
                       std::span<const double> scores_fake_pre,
                       std::span<const double> scores_fake_post) {
  BrSample s;
  const double m_real = mean(scores_real, "balance_ratio(real)");
  const double m_pre = mean(scores_fake_pre, "balance_ratio(pre)");
  const double m_post = mean(scores_fake_post, "balance_ratio(post)");
  s.alpha = m_post - m_pre;
  s.beta = m_real - m_pre;
  if (std::fabs(s.beta) <= kDegenerateBeta) {
    s.degenerate = true;
    s.br = 0.0;
  } else {
    s.br = s.alpha / s.beta;
  }
  return s;
}

BrWindow::BrWindow(std::size_t capacity) : buf_(capacity, 0.0) {
  if (capacity == 0) throw ConfigError("BrWindow: capacity must be positive");
}

void BrWindow::push(double br) {
  if (!std::isfinite(br)) throw NumericError("BrWindow::push: non-finite balance ratio");
  buf_[head_] = br;
  head_ = (head_ + 1) % buf_.size();
  if (count_ < buf_.size()) ++count_;
}

std::optional<double> BrWindow::average() const {
  if (count_ == 0) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = 0; i < count_; ++i) s += buf_[i];
  return s / static_cast<double>(count_);
}

ControlAction dda_decide(double br_avg, const ControllerState& state) {
  return banded_decide(br_avg, state, /*strict=*/false);
}

ControlAction adapt_relax_decide(double br_avg, const ControllerState& state) {
  return banded_decide(br_avg, state, /*strict=*/false);
}

ControlAction adapt_strict_decide(double br_avg, const ControllerState& state) {
  return banded_decide(br_avg, state, /*strict=*/true);
}

ControlAction controller_tick(std::uint64_t t, ControllerKind kind,
                              std::optional<double> br_avg, const ControllerState& state) {
  if (state.interval == 0) throw ConfigError("controller_tick: interval must be positive");
  if (t == 0 || t % state.interval != 0) return ControlAction::noop();
  switch (kind) {
    case ControllerKind::Static:
    case ControllerKind::Sdst:
    case ControllerKind::DstBoth:
    case ControllerKind::Posthoc:
      return ControlAction::noop();
    case ControllerKind::DdaStatic:
      return br_avg ? dda_decide(*br_avg, state) : ControlAction::noop();
    case ControllerKind::AdaptRelax:
      return br_avg ? adapt_relax_decide(*br_avg, state) : ControlAction::noop();
    case ControllerKind::AdaptStrict:
      return br_avg ? adapt_strict_decide(*br_avg, state) : ControlAction::noop();
  }
  throw ConfigError("controller_tick: unknown controller kind");
}

}  // namespace sparsegan
