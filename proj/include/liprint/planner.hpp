#pragma once

// Capture-point step pattern generator.
//
// Given the current CoM state, the stance foot and the remaining time dT of the
// current step, the planner predicts where the capture point will be at the end
// of the step (xi_f) and places the swing foot at a constant offset b from it:
//
//     s_d = |v| dT                     b_x = s_d / (e^{w dT} - 1)
//     w_d = |w_cmd| dT / Ts            b_y = w_d / (e^{w dT} + 1)
//     p_d = xi_f + R(gamma) (-b_x, (-1)^n b_y)
//
// With the foot at p_d the next step of equal duration advances the capture
// point by exactly s_d along the heading, and the lateral capture-point offset
// settles to +-b_y.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "liprint/gait.hpp"
#include "liprint/lip_core.hpp"

namespace liprint {

/// Commands below this speed are treated as "step in place" and keep the previous heading.
inline constexpr double kStandingSpeed = 1e-6;

struct StepCommand {
  Vec2 velocity = Vec2::Zero();
  double step_width = 0.3;
  /// Heading used while |velocity| < kStandingSpeed.
  double held_heading = 0.0;

  void validate() const
  {
    if (!velocity.allFinite()) throw std::invalid_argument("StepCommand: non-finite velocity");
    if (!(step_width > 0.0) || !std::isfinite(step_width)) {
      throw std::invalid_argument("StepCommand: step width must be positive");
    }
  }
};

struct PlannedStep {
  Vec2 position = Vec2::Zero();
  double z = 0.0;
  double heading = 0.0;
  std::int64_t parity = 0;

  FootPosition foot() const { return {position, z}; }
};

struct OffsetVector {
  Vec2 b = Vec2::Zero();
};

/// Maps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

inline Eigen::Matrix2d rotation(double angle) { return Eigen::Rotation2Dd(angle).toRotationMatrix(); }

inline double desired_step_length(const StepCommand& cmd, double remaining)
{
  return cmd.velocity.norm() * remaining;
}

inline double desired_step_width(double width_command, double remaining, double step_duration)
{
  return std::abs(width_command) * remaining / step_duration;
}

inline IcpPoint predict_final_icp(const IcpPoint& xi0, const FootPosition& stance, double omega0, double remaining)
{
  return icp_trajectory(xi0, stance, omega0, remaining);
}

/// Constant offset between the predicted final capture point and the next foothold.
///
/// At dT == 0 a non-zero step length has no finite offset and is rejected; use
/// command_offsets() to evaluate the limit of a velocity command instead.
inline OffsetVector offsets(double step_length, double step_width, double omega0, double remaining)
{
  if (!(remaining >= 0.0)) {
    throw std::domain_error("offsets: negative remaining time " + std::to_string(remaining));
  }
  const double x = omega0 * remaining;
  if (x == 0.0) {
    if (step_length != 0.0) {
      throw std::domain_error("offsets: non-zero step length with zero remaining time");
    }
    return {Vec2(0.0, 0.5 * step_width)};
  }
  return {Vec2(step_length / std::expm1(x), step_width / (std::exp(x) + 1.0))};
}

/// Offsets for a velocity/width command over a horizon `remaining`. Equals
/// offsets(desired_step_length, desired_step_width, ...) for remaining > 0 and
/// takes the analytic limit b -> (|v| / omega0, 0) as remaining -> 0.
inline OffsetVector command_offsets(const StepCommand& cmd, double omega0, double remaining, double step_duration)
{
  if (!(remaining >= 0.0)) {
    throw std::domain_error("command_offsets: negative remaining time " + std::to_string(remaining));
  }
  if (remaining == 0.0) return {Vec2(cmd.velocity.norm() / omega0, 0.0)};
  return offsets(desired_step_length(cmd, remaining),
                 desired_step_width(cmd.step_width, remaining, step_duration), omega0, remaining);
}

/// Full-quadrant heading of the command, or the held heading when standing.
inline double turning_angle(const StepCommand& cmd)
{
  if (cmd.velocity.norm() < kStandingSpeed) return normalize_angle(cmd.held_heading);
  return std::atan2(cmd.velocity.y(), cmd.velocity.x());
}

/// Intermediate quantities of one planning pass.
struct StepPlan {
  IcpPoint initial_icp;
  IcpPoint final_icp;
  OffsetVector offset;
  double remaining = 0.0;
  double step_length = 0.0;
  double step_width = 0.0;
  double omega0 = 0.0;
  PlannedStep step;
};

/// Places the foot from a prediction over `prediction_horizon` with offsets
/// evaluated over `offset_horizon`. plan_step() uses dT for both.
inline StepPlan plan_step_with_horizons(const LipState& state, const FootPosition& stance, const StepCommand& cmd,
                                        const GaitState& gait, double prediction_horizon, double offset_horizon)
{
  const double ts = gait.params().step_duration();
  const double w = state.params.omega0();

  StepPlan plan;
  plan.remaining = prediction_horizon;
  plan.omega0 = w;
  plan.initial_icp = icp_of(state);
  plan.final_icp = predict_final_icp(plan.initial_icp, stance, w, prediction_horizon);
  plan.step_length = desired_step_length(cmd, offset_horizon);
  plan.step_width = desired_step_width(cmd.step_width, offset_horizon, ts);
  plan.offset = command_offsets(cmd, w, offset_horizon, ts);

  const double gamma = turning_angle(cmd);
  const double lateral_sign = gait.parity() % 2 == 0 ? 1.0 : -1.0;
  const Vec2 local(-plan.offset.b.x(), lateral_sign * plan.offset.b.y());
  const Vec2 world = rotation(gamma) * local;

  plan.step.position = plan.final_icp.xi + world;
  plan.step.z = stance.z;
  plan.step.heading = normalize_angle(gamma);
  plan.step.parity = gait.parity();
  return plan;
}

inline StepPlan plan_step_detailed(const LipState& state, const FootPosition& stance, const StepCommand& cmd,
                                   const GaitState& gait)
{
  const double dt = remaining_time(gait);
  return plan_step_with_horizons(state, stance, cmd, gait, dt, dt);
}

inline PlannedStep plan_step(const LipState& state, const FootPosition& stance, const StepCommand& cmd,
                             const GaitState& gait)
{
  return plan_step_detailed(state, stance, cmd, gait).step;
}

}  // namespace liprint
