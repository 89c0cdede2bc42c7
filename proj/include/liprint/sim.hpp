#pragma once

// Closed-loop stepping simulator on the LIP itself.
//
// The plant is the linear inverted pendulum; swing legs are massless and
// support transfers instantaneously at step boundaries, so the realized
// touchdown is exactly the (terrain-adjusted) plan of the last tick of the
// step. The pendulum keeps the commanded base height above the ground under
// the CoM, measured from the stance foot:
//
//     z0 = base_height + ground(com) - stance.z
//
// On flat ground z0 is constant. On rough ground omega0 changes at touchdown
// and drifts inside a step, which is the model error that per-tick replanning
// corrects.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "liprint/gait.hpp"
#include "liprint/lip_core.hpp"
#include "liprint/planner.hpp"
#include "liprint/terrain.hpp"

namespace liprint {

enum class ReplanMode {
  /// Plan once per step at t = 0.
  step_start,
  /// Replan every tick: final capture point predicted over the live dT, offsets
  /// evaluated for a full step Ts.
  every_tick,
  /// Replan every tick with dT in every term, offsets included.
  every_tick_literal,
};

inline const char* to_string(ReplanMode m)
{
  switch (m) {
    case ReplanMode::step_start: return "step-start";
    case ReplanMode::every_tick: return "every-tick";
    case ReplanMode::every_tick_literal: return "every-tick-literal";
  }
  return "?";
}

inline ReplanMode parse_replan_mode(const std::string& s)
{
  if (s == "step-start") return ReplanMode::step_start;
  if (s == "every-tick") return ReplanMode::every_tick;
  if (s == "every-tick-literal") return ReplanMode::every_tick_literal;
  throw std::invalid_argument("unknown replan mode '" + s + "' (step-start | every-tick | every-tick-literal)");
}

/// Velocity command taking effect from `time` on.
struct CommandChange {
  double time = 0.0;
  Vec2 velocity = Vec2::Zero();
};

struct SimConfig {
  StepCommand command;
  GaitParams gait{0.35};
  double gravity = 9.81;
  double base_height = 0.62;
  double total_duration = 10.0;
  ReplanMode replan = ReplanMode::step_start;
  /// Null means flat ground at z = 0 everywhere.
  std::shared_ptr<const Heightmap> terrain;
  FootholdParams foothold;
  double reach_limit = 0.6;
  std::vector<CommandChange> command_changes;

  double dt() const { return gait.tick(); }

  void validate() const
  {
    command.validate();
    natural_frequency(gravity, base_height);
    if (!(total_duration > 0.0)) throw std::invalid_argument("SimConfig: total duration must be positive");
    if (!(reach_limit > 0.0)) throw std::invalid_argument("SimConfig: reach limit must be positive");
    for (const auto& c : command_changes) {
      if (!(c.time >= 0.0) || !c.velocity.allFinite()) throw std::invalid_argument("SimConfig: bad command change");
    }
  }
};

struct InitialCondition {
  Vec2 com_pos = Vec2::Zero();
  Vec2 com_vel = Vec2::Zero();
  /// Right foot; the first planned step is the left one.
  Vec2 stance = Vec2::Zero();
};

/// CoM at rest above the midpoint of the feet, right foot in stance half a step width to the right.
inline InitialCondition default_initial(const SimConfig& config)
{
  const double gamma = turning_angle(config.command);
  InitialCondition ic;
  ic.stance = rotation(gamma) * Vec2(0.0, -0.5 * config.command.step_width);
  return ic;
}

struct TrajectorySample {
  double time = 0.0;
  Vec2 com_pos = Vec2::Zero();
  Vec2 com_vel = Vec2::Zero();
  Vec2 icp = Vec2::Zero();
  FootPosition stance;
  PlannedStep target;
  std::int64_t parity = 0;
  double contact_schedule = 0.0;
  PhaseClock phase{0.0, 1.0};
  double omega0 = 0.0;
  bool failed = false;
};

struct StepEvent {
  double time = 0.0;
  /// Plan before terrain adjustment.
  PlannedStep planned;
  /// Foothold the foot actually landed on.
  FootPosition realized;
  /// Capture point at the instant of touchdown.
  Vec2 icp = Vec2::Zero();
};

struct Outcome {
  bool completed = true;
  std::string reason;
  double time = 0.0;
};

struct SimResult {
  std::vector<TrajectorySample> samples;
  Outcome outcome;
  std::vector<StepEvent> step_events;
};

namespace detail {

inline double ground_height(const SimConfig& cfg, const Vec2& p)
{
  if (!cfg.terrain) return 0.0;
  return height_at(*cfg.terrain, p);
}

}  // namespace detail

inline SimResult run(const SimConfig& config, const InitialCondition& initial)
{
  config.validate();
  const double dt = config.dt();
  const GaitParams& gp = config.gait;
  const double ts = gp.step_duration();
  const auto total_ticks = static_cast<std::int64_t>(std::llround(config.total_duration / dt));

  std::optional<FootholdMap> footholds;
  if (config.terrain) footholds.emplace(config.terrain, config.foothold);

  SimResult result;
  result.samples.reserve(static_cast<std::size_t>(total_ticks));

  StepCommand cmd = config.command;
  std::vector<CommandChange> changes = config.command_changes;
  std::stable_sort(changes.begin(), changes.end(),
                   [](const CommandChange& a, const CommandChange& b) { return a.time < b.time; });
  std::size_t next_change = 0;

  GaitState gait(gp);
  LipState state{initial.com_pos, initial.com_vel, LipParams(config.gravity, config.base_height)};
  FootPosition stance{initial.stance, 0.0};
  PlannedStep raw_plan;
  PlannedStep target;

  auto fail = [&](std::int64_t tick, std::string reason) {
    result.outcome = {false, std::move(reason), static_cast<double>(tick) * dt};
  };

  try {
    stance.z = detail::ground_height(config, stance.p);
  } catch (const std::out_of_range&) {
    fail(0, "initial stance foot outside the terrain");
    return result;
  }

  for (std::int64_t k = 0; k < total_ticks; ++k) {
    const double time = static_cast<double>(k) * dt;
    bool boundary = false;

    while (next_change < changes.size() && changes[next_change].time <= time + 0.5 * dt) {
      cmd.velocity = changes[next_change].velocity;
      ++next_change;
    }
    if (cmd.velocity.norm() >= kStandingSpeed) cmd.held_heading = std::atan2(cmd.velocity.y(), cmd.velocity.x());

    auto record = [&](bool failed) {
      TrajectorySample s;
      s.time = time;
      s.com_pos = state.com_pos;
      s.com_vel = state.com_vel;
      s.icp = icp_of(state).xi;
      s.stance = stance;
      s.target = target;
      s.parity = gait.parity();
      s.contact_schedule = contact_schedule(gait);
      s.phase = phase_clock(gait);
      s.omega0 = state.params.omega0();
      s.failed = failed;
      result.samples.push_back(s);
    };

    if (k > 0) {
      const auto adv = advance_ticks(gait, 1);
      gait = adv.state;
      boundary = adv.step_boundary;
    }

    if (boundary) {
      const Vec2 xi = icp_of(state).xi;
      StepEvent ev{time, raw_plan, target.foot(), xi};
      result.step_events.push_back(ev);
      stance = target.foot();
      if ((xi - stance.p).norm() > config.reach_limit) {
        record(true);
        fail(k, "capture point " + std::to_string((xi - stance.p).norm()) + " m from the new stance foot exceeds reach limit");
        return result;
      }
    }

    double ground = 0.0;
    try {
      ground = detail::ground_height(config, state.com_pos);
    } catch (const std::out_of_range&) {
      record(true);
      fail(k, "CoM left the terrain map");
      return result;
    }
    const double z0 = config.base_height + ground - stance.z;
    if (!(z0 > 0.0)) {
      record(true);
      fail(k, "pendulum height collapsed");
      return result;
    }
    state.params = state.params.with_height(z0);

    const bool plan_now = k == 0 || boundary || config.replan != ReplanMode::step_start;
    if (plan_now) {
      const double remaining = remaining_time(gait);
      const double offset_horizon = config.replan == ReplanMode::every_tick ? ts : remaining;
      const StepPlan plan = plan_step_with_horizons(state, stance, cmd, gait, remaining, offset_horizon);
      raw_plan = plan.step;
      target = plan.step;
      if (footholds) {
        try {
          target.position = footholds->nearest_steppable(plan.step.position);
          target.z = height_at(*config.terrain, target.position);
        } catch (const PlanningError& e) {
          record(true);
          fail(k, std::string("terrain snapping failed: ") + e.what());
          return result;
        }
      }
    }

    if (!state.finite() || !target.position.allFinite()) {
      record(true);
      fail(k, "non-finite state");
      return result;
    }

    record(false);
    state = com_trajectory(state, stance, dt);
  }
  result.outcome = {true, "", static_cast<double>(total_ticks) * dt};
  return result;
}

inline SimResult run(const SimConfig& config) { return run(config, default_initial(config)); }

/// Runs `config` and rotates the velocity command by `turn_angle` at `switch_time`.
inline SimResult turn_maneuver(SimConfig config, double turn_angle, double switch_time = 3.0)
{
  if (turn_angle != 0.0) {
    config.command_changes.push_back({switch_time, rotation(turn_angle) * config.command.velocity});
  }
  return run(config);
}

/// Mean CoM velocity over samples with time in [from, to).
inline Vec2 mean_velocity(const SimResult& r, double from, double to)
{
  Vec2 sum = Vec2::Zero();
  std::size_t n = 0;
  for (const auto& s : r.samples) {
    if (s.time >= from - 1e-9 && s.time < to - 1e-9) {
      sum += s.com_vel;
      ++n;
    }
  }
  if (n == 0) return Vec2::Constant(std::nan(""));
  return sum / static_cast<double>(n);
}

/// Completed over the last `window` seconds with a mean forward velocity within
/// `tolerance` (relative) of the command.
inline bool success_metric(const SimResult& r, double vx_command, double window, double tolerance = 0.1)
{
  if (!r.outcome.completed || r.samples.empty()) return false;
  const double end = r.outcome.time;
  if (window > end + 1e-9) return false;
  const double mean = mean_velocity(r, end - window, end).x();
  if (!std::isfinite(mean)) return false;
  const double allowed = vx_command == 0.0 ? tolerance : tolerance * std::abs(vx_command);
  return std::abs(mean - vx_command) <= allowed;
}

/// Number of touchdowns after `switch_time` until the CoM displacement over every
/// following two-step window points within `tolerance` of `heading`. Empty if never.
inline std::optional<int> steps_to_heading(const SimResult& r, double heading, double switch_time, double tolerance)
{
  std::vector<const StepEvent*> after;
  std::vector<Vec2> com_at;
  for (const auto& ev : r.step_events) {
    if (ev.time < switch_time) continue;
    after.push_back(&ev);
  }
  auto com_at_time = [&](double t) {
    for (const auto& s : r.samples) {
      if (std::abs(s.time - t) < 1e-9) return s.com_pos;
    }
    return Vec2(Vec2::Constant(std::nan("")));
  };
  for (const auto* ev : after) com_at.push_back(com_at_time(ev->time));
  if (com_at.size() < 3) return std::nullopt;

  std::optional<int> settled;
  for (std::size_t i = 2; i < com_at.size(); ++i) {
    const Vec2 d = com_at[i] - com_at[i - 2];
    const double err = std::abs(normalize_angle(std::atan2(d.y(), d.x()) - heading));
    if (err <= tolerance) {
      if (!settled) settled = static_cast<int>(i);
    } else {
      settled.reset();
    }
  }
  return settled;
}

/// Bounding box of the straight-line path the command schedule asks for, padded by `margin`.
inline Extent terrain_extent(const SimConfig& config, double margin = 1.5)
{
  std::vector<CommandChange> changes = config.command_changes;
  std::stable_sort(changes.begin(), changes.end(),
                   [](const CommandChange& a, const CommandChange& b) { return a.time < b.time; });
  Vec2 p = Vec2::Zero();
  Vec2 lo = p;
  Vec2 hi = p;
  Vec2 v = config.command.velocity;
  double t = 0.0;
  for (const auto& c : changes) {
    const double until = std::min(c.time, config.total_duration);
    if (until > t) {
      p += v * (until - t);
      t = until;
    }
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    v = c.velocity;
  }
  p += v * std::max(0.0, config.total_duration - t);
  lo = lo.cwiseMin(p);
  hi = hi.cwiseMax(p);
  return {lo - Vec2::Constant(margin), hi + Vec2::Constant(margin)};
}

// --- batch experiments ------------------------------------------------------

struct SweepCase {
  SimConfig config;
  TerrainSpec terrain = FlatTerrain{};
  double terrain_resolution = 0.02;
  double window = 5.0;
  double tolerance = 0.1;
};

struct SweepRow {
  std::size_t case_index = 0;
  int trials = 0;
  int successes = 0;

  double success_rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

/// Seed of trial `trial`; the same for every case so that cases are compared on identical terrain.
inline std::uint64_t trial_seed(std::uint64_t base_seed, int trial)
{
  return detail::splitmix64(base_seed ^ detail::splitmix64(static_cast<std::uint64_t>(trial)));
}

inline bool run_trial(const SweepCase& c, std::uint64_t seed)
{
  SimConfig cfg = c.config;
  if (!std::holds_alternative<FlatTerrain>(c.terrain)) {
    cfg.terrain = std::make_shared<const Heightmap>(
        generate(with_seed(c.terrain, seed), terrain_extent(cfg), c.terrain_resolution));
  }
  const SimResult r = run(cfg);
  return success_metric(r, cfg.command.velocity.x(), c.window, c.tolerance);
}

/// Success table, one row per case. Runs trials concurrently; the result does not
/// depend on scheduling. Zero trials yields an empty table.
inline std::vector<SweepRow> sweep(const std::vector<SweepCase>& cases, int trials, std::uint64_t base_seed,
                                   unsigned workers = std::thread::hardware_concurrency())
{
  std::vector<SweepRow> rows;
  if (trials <= 0) return rows;
  const std::size_t jobs = cases.size() * static_cast<std::size_t>(trials);
  std::vector<char> ok(jobs, 0);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs)));

  std::vector<std::future<void>> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t j = w; j < jobs; j += workers) {
        const std::size_t ci = j / static_cast<std::size_t>(trials);
        const int trial = static_cast<int>(j % static_cast<std::size_t>(trials));
        ok[j] = run_trial(cases[ci], trial_seed(base_seed, trial)) ? 1 : 0;
      }
    }));
  }
  for (auto& f : pool) f.get();

  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    SweepRow row{ci, trials, 0};
    for (int t = 0; t < trials; ++t) row.successes += ok[ci * static_cast<std::size_t>(trials) + t];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace liprint
