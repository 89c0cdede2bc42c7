#pragma once

// Step clocks and the periodic contact schedule.
//
// Time is quantized to a fixed control tick and the step duration must be a
// whole number of ticks, so step boundaries fall on exact ticks. Parity n
// counts steps from the start of the run: even n plans the left foot (right
// foot in stance), odd n plans the right foot. The two-step clock t' starts
// with the right-stance step, i.e. t' = t for even n and t' = t + Ts for odd n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace liprint {

enum class Side { left, right };

inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

inline constexpr double kDefaultTick = 0.01;

class GaitParams {
public:
  explicit GaitParams(double step_duration, double tick = kDefaultTick)
      : step_duration_(step_duration), tick_(tick)
  {
    if (!(tick > 0.0) || !(step_duration > 0.0)) {
      throw std::invalid_argument("GaitParams: step duration and tick must be positive");
    }
    const double ratio = step_duration / tick;
    ticks_per_step_ = std::llround(ratio);
    if (ticks_per_step_ < 1 || std::abs(ratio - static_cast<double>(ticks_per_step_)) > 1e-9 * ratio) {
      throw std::invalid_argument("GaitParams: step duration " + std::to_string(step_duration) +
                                  " is not an integer multiple of the tick " + std::to_string(tick));
    }
  }

  double step_duration() const { return step_duration_; }
  double tick() const { return tick_; }
  std::int64_t ticks_per_step() const { return ticks_per_step_; }

  /// Converts a duration to a whole tick count; throws if it is not one.
  std::int64_t to_ticks(double duration) const
  {
    const double ratio = duration / tick_;
    const auto k = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(k)) > 1e-6) {
      throw std::invalid_argument("duration " + std::to_string(duration) + " is not a multiple of the tick");
    }
    return k;
  }

private:
  double step_duration_;
  double tick_;
  std::int64_t ticks_per_step_ = 0;
};

struct GaitAdvance;

class GaitState {
public:
  explicit GaitState(GaitParams params) : params_(params) {}

  /// State `t` seconds into step number `parity`. `t` is rounded to the nearest tick.
  static GaitState at(GaitParams params, double t, std::int64_t parity = 0)
  {
    GaitState g(params);
    const auto k = std::llround(t / params.tick());
    if (k < 0 || k >= params.ticks_per_step()) {
      throw std::invalid_argument("GaitState::at: t must lie in [0, Ts)");
    }
    if (parity < 0) throw std::invalid_argument("GaitState::at: parity must be non-negative");
    g.step_ticks_ = k;
    g.parity_ = parity;
    return g;
  }

  const GaitParams& params() const { return params_; }
  std::int64_t parity() const { return parity_; }
  std::int64_t step_ticks() const { return step_ticks_; }

  /// Ticks since the start of the current right-stance step, in [0, 2 N).
  std::int64_t cycle_ticks() const { return step_ticks_ + (parity_ % 2) * params_.ticks_per_step(); }

  double t() const { return static_cast<double>(step_ticks_) * params_.tick(); }
  double t_prime() const { return static_cast<double>(cycle_ticks()) * params_.tick(); }

  /// Phase of the two-step cycle, in [0, 1).
  double phase() const
  {
    return static_cast<double>(cycle_ticks()) / static_cast<double>(2 * params_.ticks_per_step());
  }

private:
  friend GaitAdvance advance_ticks(const GaitState&, std::int64_t);

  GaitParams params_;
  std::int64_t step_ticks_ = 0;
  std::int64_t parity_ = 0;
};

struct GaitAdvance {
  GaitState state;
  bool step_boundary;
};

inline GaitAdvance advance_ticks(const GaitState& g, std::int64_t ticks)
{
  const auto n = g.params_.ticks_per_step();
  if (ticks <= 0 || ticks >= n) {
    throw std::invalid_argument("advance: the clock must tick faster than one step (got " +
                                std::to_string(ticks) + " ticks, step is " + std::to_string(n) + ")");
  }
  GaitState out = g;
  out.step_ticks_ += ticks;
  bool boundary = false;
  if (out.step_ticks_ >= n) {
    out.step_ticks_ -= n;
    ++out.parity_;
    boundary = true;
  }
  return {out, boundary};
}

inline GaitAdvance advance(const GaitState& g, double dt)
{
  if (!(dt > 0.0) || !(dt < g.params().step_duration())) {
    throw std::invalid_argument("advance: dt must lie in (0, Ts), got " + std::to_string(dt));
  }
  return advance_ticks(g, g.params().to_ticks(dt));
}

/// delta T = Ts - t, in (0, Ts].
inline double remaining_time(const GaitState& g)
{
  return static_cast<double>(g.params().ticks_per_step() - g.step_ticks()) * g.params().tick();
}

/// C(phi) = sin(2 pi phi) / sqrt(sin^2(2 pi phi) + 0.04). Positive while the right foot should be down.
inline double contact_schedule_at_phase(double phase)
{
  // Reduce before sin() so the zeros at phase 0 and 0.5 are exact and the
  // half-period antisymmetry holds bit for bit.
  double f = phase - std::floor(phase);
  double sign = 1.0;
  if (f >= 0.5) {
    f -= 0.5;
    sign = -1.0;
  }
  const double s = sign * std::sin(2.0 * std::numbers::pi * std::min(f, 0.5 - f));
  return s / std::sqrt(s * s + 0.04);
}

inline double contact_schedule(const GaitState& g) { return contact_schedule_at_phase(g.phase()); }

struct PhaseClock {
  double sin;
  double cos;
};

inline PhaseClock phase_clock_at_phase(double phase)
{
  const double a = 2.0 * std::numbers::pi * phase;
  return {std::sin(a), std::cos(a)};
}

inline PhaseClock phase_clock(const GaitState& g) { return phase_clock_at_phase(g.phase()); }

inline Side swing_foot(const GaitState& g) { return g.parity() % 2 == 0 ? Side::left : Side::right; }

inline Side stance_foot(const GaitState& g) { return g.parity() % 2 == 0 ? Side::right : Side::left; }

}  // namespace liprint
