#pragma once

// Locomotion reward terms as pure evaluators over robot samples.
//
// The four task terms reward constant base height, heading, velocity tracking
// and conformance to the contact schedule; the regularization table penalizes
// effort, joint limits, jerky actions and unwanted base motion, and adds a
// large termination penalty. All exponentials share one shaping scale sigma.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "liprint/gait.hpp"
#include "liprint/lip_core.hpp"

namespace liprint {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;

struct RobotSample {
  double base_height = 0.0;
  double base_heading = 0.0;
  Vec2 base_velocity = Vec2::Zero();  // world frame, horizontal
  double base_velocity_z = 0.0;
  Vec3 base_angular_velocity = Vec3::Zero();
  Vec3 projected_gravity = Vec3(0.0, 0.0, -1.0);  // gravity direction in the base frame

  VecX joint_pos;
  VecX joint_vel;
  VecX joint_torque;
  VecX action;
  VecX action_prev;
  VecX action_prev2;
  VecX hip_xz;  // hip yaw and abduction positions

  Vec2 left_foot = Vec2::Zero();
  Vec2 right_foot = Vec2::Zero();
  bool left_contact = false;
  bool right_contact = false;
  bool self_collision = false;
};

/// Desired ground position of each foot: the swing foot's planned step, the stance foot's touchdown.
struct FootTargets {
  Vec2 left = Vec2::Zero();
  Vec2 right = Vec2::Zero();
};

struct RegularizationWeights {
  double joint_torques = 1e-4;
  double torque_limits = 1e-2;
  double joint_velocity = 1e-3;
  double joint_limits = 10.0;
  double action_smoothness_1 = 1e-3;
  double action_smoothness_2 = 1e-4;
  double hip_regularization = 1.25;
  double base_roll_pitch_velocity = 1e-2;
  double base_z_velocity = 1e-1;
  double base_tilting = 1.0;
  double termination = 100.0;
};

struct RewardParams {
  double sigma = 0.25;
  double target_base_height = 0.62;
  double target_heading = 0.0;
  Vec2 velocity_command = Vec2::Zero();
  /// Per-joint limits; a single entry applies to every joint.
  VecX torque_limits;
  VecX joint_limits;
  double action_dt = 0.01;
  RegularizationWeights weights;

  void validate() const
  {
    if (!(sigma > 0.0)) throw std::invalid_argument("RewardParams: sigma must be positive");
    if (!(action_dt > 0.0)) throw std::invalid_argument("RewardParams: action dt must be positive");
  }
};

inline double r_base_height(const RobotSample& s, const RewardParams& p)
{
  const double e = p.target_base_height - s.base_height;
  return std::exp(-e * e / p.sigma);
}

/// sigma divides an absolute angle here, not a square.
inline double r_base_orientation(const RobotSample& s, const RewardParams& p)
{
  return 2.0 * std::exp(-std::abs(p.target_heading - s.base_heading) / p.sigma);
}

inline double r_velocity_tracking(const RobotSample& s, const RewardParams& p)
{
  const Vec2 e = (p.velocity_command - s.base_velocity) / (1.0 + p.velocity_command.norm());
  return 4.0 * std::exp(-e.squaredNorm() / p.sigma);
}

/// 9 (1_r - 1_l) C exp(-err / sigma) for a given schedule value C and placement error.
inline double contact_schedule_reward(bool right_contact, bool left_contact, double schedule, double placement_error,
                                      double sigma)
{
  const double indicator = (right_contact ? 1.0 : 0.0) - (left_contact ? 1.0 : 0.0);
  return 9.0 * indicator * schedule * std::exp(-placement_error / sigma);
}

/// Placement error is taken on the foot the schedule wants on the ground (right for C >= 0).
inline double r_contact_schedule(const RobotSample& s, const RewardParams& p, double schedule,
                                 const FootTargets& targets)
{
  const double err = schedule >= 0.0 ? (targets.right - s.right_foot).norm() : (targets.left - s.left_foot).norm();
  return contact_schedule_reward(s.right_contact, s.left_contact, schedule, err, p.sigma);
}

inline double r_contact_schedule(const RobotSample& s, const RewardParams& p, const GaitState& gait,
                                 const FootTargets& targets)
{
  return r_contact_schedule(s, p, contact_schedule(gait), targets);
}

struct RewardTerm {
  std::string name;
  double value;
};

using RewardBreakdown = std::vector<RewardTerm>;

struct TerminationConditions {
  bool self_collision = false;
  bool base_speed = false;
  bool base_spin = false;
  bool base_tilt = false;
  bool base_low = false;

  bool any() const { return self_collision || base_speed || base_spin || base_tilt || base_low; }
};

inline TerminationConditions termination_conditions(const RobotSample& s)
{
  TerminationConditions t;
  t.self_collision = s.self_collision;
  const Vec3 v(s.base_velocity.x(), s.base_velocity.y(), s.base_velocity_z);
  t.base_speed = v.norm() >= 10.0;
  t.base_spin = s.base_angular_velocity.norm() >= 5.0;
  t.base_tilt = std::abs(s.projected_gravity.x()) >= 0.7 || std::abs(s.projected_gravity.y()) >= 0.7;
  t.base_low = s.base_height < 0.3;
  return t;
}

namespace detail {

inline VecX broadcast_limits(const VecX& limits, Eigen::Index n, const char* what)
{
  if (n == 0) return VecX(0);
  if (limits.size() == 1) return VecX::Constant(n, limits[0]);
  if (limits.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " limits, got " +
                                std::to_string(limits.size()));
  }
  return limits;
}

inline void require_same_size(const VecX& a, const VecX& b, const char* what)
{
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": vector sizes differ");
}

}  // namespace detail

/// Weighted regularization terms, in table order.
inline RewardBreakdown regularization(const RobotSample& s, const RewardParams& p)
{
  p.validate();
  const auto& w = p.weights;
  RewardBreakdown out;
  out.reserve(11);

  out.push_back({"joint_torques", w.joint_torques * -s.joint_torque.squaredNorm()});

  const VecX tau_max = detail::broadcast_limits(p.torque_limits, s.joint_torque.size(), "torque limits");
  const double over_torque = (s.joint_torque.cwiseAbs() - 0.9 * tau_max).cwiseMax(0.0).sum();
  out.push_back({"torque_limits", w.torque_limits * -over_torque});

  out.push_back({"joint_velocity", w.joint_velocity * -s.joint_vel.squaredNorm()});

  const VecX q_max = detail::broadcast_limits(p.joint_limits, s.joint_pos.size(), "joint limits");
  const double over_limit = (s.joint_pos.cwiseAbs() - 0.9 * q_max).cwiseMax(0.0).cwiseMin(1.0).sum();
  out.push_back({"joint_limits", w.joint_limits * -over_limit});

  detail::require_same_size(s.action, s.action_prev, "action smoothness");
  detail::require_same_size(s.action, s.action_prev2, "action smoothness");
  const double rate = ((s.action - s.action_prev) / p.action_dt).squaredNorm();
  const double accel = ((s.action - 2.0 * s.action_prev + s.action_prev2) / p.action_dt).squaredNorm();
  out.push_back({"action_smoothness_1", w.action_smoothness_1 * -rate});
  out.push_back({"action_smoothness_2", w.action_smoothness_2 * -accel});

  out.push_back({"hip_regularization", w.hip_regularization * std::exp(-s.hip_xz.squaredNorm() / p.sigma)});

  const Vec3& om = s.base_angular_velocity;
  out.push_back({"base_roll_pitch_velocity", w.base_roll_pitch_velocity * -(om.x() * om.x() + om.y() * om.y())});
  out.push_back({"base_z_velocity", w.base_z_velocity * -(s.base_velocity_z * s.base_velocity_z)});

  const Vec3& g = s.projected_gravity;
  out.push_back({"base_tilting", w.base_tilting * std::exp(-(g.x() * g.x() + g.y() * g.y()) / p.sigma)});

  out.push_back({"termination", w.termination * (termination_conditions(s).any() ? -1.0 : 0.0)});
  return out;
}

/// tau = Kp (q_ref + dq - q) + Kd (0 - qdot), with diagonal gains given as vectors.
inline VecX pd_torque(const VecX& q_ref, const VecX& dq_action, const VecX& q, const VecX& qdot, const VecX& kp,
                      const VecX& kd)
{
  const auto n = q.size();
  if (q_ref.size() != n || dq_action.size() != n || qdot.size() != n || kp.size() != n || kd.size() != n) {
    throw std::invalid_argument("pd_torque: vector sizes differ");
  }
  return kp.cwiseProduct(q_ref + dq_action - q) + kd.cwiseProduct(-qdot);
}

struct RewardReport {
  double total = 0.0;
  RewardBreakdown terms;
};

/// Sum of the four task terms and the regularization table; `total` is the
/// left-to-right sum of `terms`.
inline RewardReport total_reward(const RobotSample& s, const RewardParams& p, double schedule,
                                 const FootTargets& targets)
{
  p.validate();
  RewardReport r;
  r.terms.push_back({"base_height", r_base_height(s, p)});
  r.terms.push_back({"base_orientation", r_base_orientation(s, p)});
  r.terms.push_back({"velocity_tracking", r_velocity_tracking(s, p)});
  r.terms.push_back({"contact_schedule", r_contact_schedule(s, p, schedule, targets)});
  for (auto& t : regularization(s, p)) r.terms.push_back(std::move(t));
  for (const auto& t : r.terms) r.total += t.value;
  return r;
}

inline RewardReport total_reward(const RobotSample& s, const RewardParams& p, const GaitState& gait,
                                 const FootTargets& targets)
{
  return total_reward(s, p, contact_schedule(gait), targets);
}

}  // namespace liprint
