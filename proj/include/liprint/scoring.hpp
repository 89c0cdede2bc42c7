#pragma once

// Offline scoring of logged trajectories with the reward evaluators.
//
// Each trajectory row becomes one RobotSample. The LIP log carries the planar
// base state, the stance foot and the swing target; whole-body quantities come
// from an optional joint log with one row per trajectory row:
//
//   tau_<i>, q_<i>, qd_<i>, a_<i>, qhip_<i>           per-joint vectors
//   base_z, heading, vel_z, omega_x, omega_y, omega_z,
//   grav_x, grav_y, grav_z, self_collision             base-state overrides
//
// Without a joint log the base is taken to hold the commanded height and face
// the planned heading, and every joint-space term sees empty vectors.

#include <optional>
#include <string>
#include <vector>

#include "liprint/io.hpp"
#include "liprint/metrics.hpp"

namespace liprint {

namespace detail {

struct JointColumns {
  std::vector<std::size_t> tau, q, qd, a, qhip;
  std::ptrdiff_t base_z = -1, heading = -1, vel_z = -1, omega_x = -1, omega_y = -1, omega_z = -1;
  std::ptrdiff_t grav_x = -1, grav_y = -1, grav_z = -1, self_collision = -1;
};

inline bool take_indexed(const std::string& name, const std::string& prefix, std::size_t col,
                         std::vector<std::size_t>& into)
{
  if (name.rfind(prefix, 0) != 0) return false;
  const std::string idx = name.substr(prefix.size());
  if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) return false;
  if (std::stoul(idx) != into.size()) {
    throw io::FormatError("joint log: column '" + name + "' out of order");
  }
  into.push_back(col);
  return true;
}

inline JointColumns map_joint_columns(const std::vector<std::string>& header)
{
  JointColumns m;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    const auto col = static_cast<std::ptrdiff_t>(i);
    if (take_indexed(h, "tau_", i, m.tau) || take_indexed(h, "qd_", i, m.qd) ||
        take_indexed(h, "qhip_", i, m.qhip) || take_indexed(h, "q_", i, m.q) || take_indexed(h, "a_", i, m.a)) {
      continue;
    }
    if (h == "base_z") m.base_z = col;
    else if (h == "heading") m.heading = col;
    else if (h == "vel_z") m.vel_z = col;
    else if (h == "omega_x") m.omega_x = col;
    else if (h == "omega_y") m.omega_y = col;
    else if (h == "omega_z") m.omega_z = col;
    else if (h == "grav_x") m.grav_x = col;
    else if (h == "grav_y") m.grav_y = col;
    else if (h == "grav_z") m.grav_z = col;
    else if (h == "self_collision") m.self_collision = col;
    else throw io::FormatError("joint log: unknown column '" + h + "'");
  }
  return m;
}

inline VecX gather(const std::vector<double>& row, const std::vector<std::size_t>& cols)
{
  VecX v(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[cols[i]];
  return v;
}

}  // namespace detail

/// Sample reconstructed from one LIP trajectory row. Parity even means right stance.
inline RobotSample sample_from_trajectory(const TrajectorySample& row, const RewardParams& params,
                                          FootTargets& targets)
{
  RobotSample s;
  s.base_height = params.target_base_height;
  s.base_heading = row.target.heading;
  s.base_velocity = row.com_vel;
  const bool right_stance = row.parity % 2 == 0;
  s.right_contact = right_stance;
  s.left_contact = !right_stance;
  if (right_stance) {
    s.right_foot = row.stance.p;
    s.left_foot = row.target.position;
  } else {
    s.left_foot = row.stance.p;
    s.right_foot = row.target.position;
  }
  targets.left = s.left_foot;
  targets.right = s.right_foot;
  return s;
}

/// Scores every trajectory row. Throws io::FormatError on a malformed or mismatched joint log.
inline std::vector<RewardReport> score_trajectory(const std::vector<TrajectorySample>& rows,
                                                  const std::optional<io::CsvTable>& joint_log,
                                                  const RewardParams& params)
{
  std::optional<detail::JointColumns> cols;
  if (joint_log) {
    if (joint_log->rows.size() != rows.size()) {
      throw io::FormatError("joint log has " + std::to_string(joint_log->rows.size()) + " rows, trajectory has " +
                            std::to_string(rows.size()));
    }
    cols = detail::map_joint_columns(joint_log->header);
  }

  std::vector<RewardReport> out;
  out.reserve(rows.size());
  VecX prev_action, prev2_action;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    FootTargets targets;
    RobotSample s = sample_from_trajectory(rows[i], params, targets);
    if (cols) {
      const auto& r = joint_log->rows[i];
      auto opt = [&](std::ptrdiff_t c, double fallback) { return c >= 0 ? r[static_cast<std::size_t>(c)] : fallback; };
      s.joint_torque = detail::gather(r, cols->tau);
      s.joint_pos = detail::gather(r, cols->q);
      s.joint_vel = detail::gather(r, cols->qd);
      s.hip_xz = detail::gather(r, cols->qhip);
      s.action = detail::gather(r, cols->a);
      // Actions before the first logged row are taken equal to the first one.
      s.action_prev = i >= 1 ? prev_action : s.action;
      s.action_prev2 = i >= 2 ? prev2_action : s.action_prev;
      prev2_action = s.action_prev;
      prev_action = s.action;
      s.base_height = opt(cols->base_z, s.base_height);
      s.base_heading = opt(cols->heading, s.base_heading);
      s.base_velocity_z = opt(cols->vel_z, 0.0);
      s.base_angular_velocity = {opt(cols->omega_x, 0.0), opt(cols->omega_y, 0.0), opt(cols->omega_z, 0.0)};
      s.projected_gravity = {opt(cols->grav_x, 0.0), opt(cols->grav_y, 0.0), opt(cols->grav_z, -1.0)};
      s.self_collision = opt(cols->self_collision, 0.0) != 0.0;
    }
    try {
      out.push_back(total_reward(s, params, rows[i].contact_schedule, targets));
    } catch (const std::invalid_argument& e) {
      throw io::FormatError(std::string("row ") + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<std::string> reward_columns(const RewardParams& params)
{
  std::vector<std::string> names{"time"};
  const RobotSample probe;
  for (const auto& t : total_reward(probe, params, 0.0, FootTargets{}).terms) names.push_back(t.name);
  names.push_back("total");
  return names;
}

inline void write_reward_csv(std::ostream& out, const std::vector<TrajectorySample>& rows,
                             const std::vector<RewardReport>& reports, const RewardParams& params)
{
  io::write_csv_header(out, reward_columns(params));
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::vector<double> v{rows[i].time};
    for (const auto& t : reports[i].terms) v.push_back(t.value);
    v.push_back(reports[i].total);
    io::write_csv_row(out, v);
  }
}

}  // namespace liprint
