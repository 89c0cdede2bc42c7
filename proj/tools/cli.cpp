#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "liprint/io.hpp"
#include "liprint/planner.hpp"
#include "liprint/scoring.hpp"
#include "liprint/sim.hpp"
#include "liprint/terrain.hpp"

namespace liprint::cli {
namespace {

using json = nlohmann::json;

// Verbosity from LIPRINT_LOG: quiet | error | info | debug (default error).
enum class LogLevel { quiet = 0, error = 1, info = 2, debug = 3 };

LogLevel log_level()
{
  const char* env = std::getenv("LIPRINT_LOG");
  if (!env) return LogLevel::error;
  const std::string v(env);
  if (v == "quiet" || v == "off") return LogLevel::quiet;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::error;
}

class Log {
public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}

  void error(const std::string& m) const { emit(LogLevel::error, "error", m); }
  void info(const std::string& m) const { emit(LogLevel::info, "info", m); }
  void debug(const std::string& m) const { emit(LogLevel::debug, "debug", m); }

private:
  void emit(LogLevel l, const char* tag, const std::string& m) const
  {
    if (static_cast<int>(l) <= static_cast<int>(level_)) err_ << "liprint: " << tag << ": " << m << '\n';
  }

  std::ostream& err_;
  LogLevel level_;
};

// Usage errors detected after parsing.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  double vx = 0.0;
  double vy = 0.0;
  double width = 0.3;
  double step_duration = 0.35;
  double tick = 0.01;
  double base_height = 0.62;
  double gravity = 9.81;

  void add_to(CLI::App& app, bool require_vx)
  {
    auto* o = app.add_option("--vx", vx, "forward velocity command [m/s]");
    if (require_vx) o->required();
    app.add_option("--vy", vy, "lateral velocity command [m/s]")->capture_default_str();
    app.add_option("--width", width, "step width command [m]")->capture_default_str();
    app.add_option("--ts", step_duration, "step duration [s]")->capture_default_str();
    app.add_option("--dt", tick, "control tick [s]")->capture_default_str();
    app.add_option("--base-height", base_height, "commanded base height [m]")->capture_default_str();
    app.add_option("--gravity", gravity, "gravity [m/s^2]")->capture_default_str();
  }

  StepCommand command() const
  {
    StepCommand c;
    c.velocity = Vec2(vx, vy);
    c.step_width = width;
    c.validate();
    return c;
  }

  json to_json() const
  {
    return {{"vx", vx}, {"vy", vy}, {"width", width}, {"ts", step_duration}, {"dt", tick},
            {"base_height", base_height}, {"gravity", gravity}};
  }
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << content;
}

// Terrain from the command line grammar, including `file:<path>`.
struct TerrainChoice {
  std::optional<TerrainSpec> spec;
  std::shared_ptr<const Heightmap> loaded;
  std::string text;
};

TerrainChoice parse_terrain_flag(const std::string& text)
{
  TerrainChoice c;
  c.text = text;
  if (text.rfind("file:", 0) == 0) {
    try {
      c.loaded = std::make_shared<const Heightmap>(io::heightmap_from_json(json::parse(read_file(text.substr(5)))));
    } catch (const json::exception& e) {
      throw UsageError(std::string("terrain file: ") + e.what());
    } catch (const io::FormatError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
  try {
    c.spec = parse_terrain_spec(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

double mean_forward_velocity(const SimResult& r, double skip)
{
  return mean_velocity(r, skip, r.outcome.time).x();
}

// --- simulate -------------------------------------------------------------------------------

struct SimulateOptions {
  ModelFlags model;
  double duration = 10.0;
  std::string replan = "auto";
  std::string terrain = "flat";
  double terrain_resolution = 0.02;
  double reach = 0.6;
  double turn_angle_deg = 0.0;
  double turn_time = 3.0;
  std::optional<std::uint64_t> seed;
  std::string out = "trajectory.csv";
  std::string events;
  std::string manifest;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out, const Log& log)
{
  SimConfig cfg;
  try {
    cfg.command = o.model.command();
    cfg.gait = GaitParams(o.model.step_duration, o.model.tick);
    cfg.gravity = o.model.gravity;
    cfg.base_height = o.model.base_height;
    cfg.total_duration = o.duration;
    if (o.replan == "auto") {
      cfg.replan = o.terrain == "flat" ? ReplanMode::step_start : ReplanMode::every_tick;
    } else {
      cfg.replan = parse_replan_mode(o.replan);
    }
    cfg.reach_limit = o.reach;
    if (o.turn_angle_deg != 0.0) {
      const double a = o.turn_angle_deg * std::numbers::pi / 180.0;
      cfg.command_changes.push_back({o.turn_time, rotation(a) * cfg.command.velocity});
    }
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }

  TerrainChoice terrain = parse_terrain_flag(o.terrain);
  std::uint64_t seed = 0;
  if (terrain.loaded) {
    cfg.terrain = terrain.loaded;
  } else if (!std::holds_alternative<FlatTerrain>(*terrain.spec)) {
    TerrainSpec spec = *terrain.spec;
    if (auto* r = std::get_if<RoughTerrain>(&spec)) {
      if (o.seed) r->seed = *o.seed;
      seed = r->seed;
    }
    if (!(o.terrain_resolution > 0.0)) throw UsageError("--terrain-resolution must be positive");
    cfg.terrain = std::make_shared<const Heightmap>(generate(spec, terrain_extent(cfg), o.terrain_resolution));
    log.debug("generated terrain " + to_string(spec));
  }
  if (o.seed && !terrain.spec) seed = *o.seed;

  log.info("simulating " + std::to_string(o.duration) + " s, replan " + to_string(cfg.replan));
  const SimResult r = run(cfg);

  const std::string events_path = o.events.empty() ? o.out + ".events.json" : o.events;
  const std::string manifest_path = o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;

  std::ostringstream csv;
  io::write_trajectory_csv(csv, r);
  write_file(o.out, csv.str());
  write_file(events_path, io::step_events_json(r).dump(2) + "\n");

  json manifest = {
      {"tool", "liprint"},
      {"version", kVersion},
      {"command", "simulate"},
      {"config",
       {{"model", o.model.to_json()},
        {"duration", o.duration},
        {"replan", to_string(cfg.replan)},
        {"terrain", o.terrain},
        {"terrain_resolution", o.terrain_resolution},
        {"reach", o.reach},
        {"turn_angle_deg", o.turn_angle_deg},
        {"turn_time", o.turn_time}}},
      {"seed", seed},
      {"artifacts", {{"trajectory", o.out}, {"events", events_path}}},
      {"outcome",
       {{"completed", r.outcome.completed},
        {"reason", r.outcome.reason},
        {"time", r.outcome.time},
        {"samples", r.samples.size()},
        {"steps", r.step_events.size()}}}};
  if (r.outcome.completed) {
    manifest["outcome"]["mean_vel_x_after_1s"] = mean_forward_velocity(r, 1.0);
  }
  write_file(manifest_path, manifest.dump(2) + "\n");

  if (r.outcome.completed) {
    out << "completed " << r.samples.size() << " ticks, " << r.step_events.size() << " steps -> " << o.out << '\n';
    return kOk;
  }
  out << "failed at t=" << io::format_double(r.outcome.time) << ": " << r.outcome.reason << '\n';
  log.error("simulation failed: " + r.outcome.reason);
  return kSimulatedFailure;
}

// --- sweep ---------------------------------------------------------------------------------

struct SweepOptions {
  ModelFlags model;
  std::vector<double> vx{0.5, 1.0, 1.5, 2.0};
  std::string terrain_kind = "flat";
  std::vector<double> severity{0.0};
  double correlation = 0.5;
  double gap_period = 0.8;
  double gap_offset = 1.0;
  std::vector<std::string> replan{"step-start"};
  int trials = 20;
  std::uint64_t seed = 0;
  double duration = 8.0;
  double window = 5.0;
  double tolerance = 0.1;
  double reach = 0.6;
  double terrain_resolution = 0.02;
  unsigned threads = 0;
  std::string out;
};

int cmd_sweep(const SweepOptions& o, std::ostream& out, const Log& log)
{
  if (o.trials < 0) throw UsageError("--trials must be non-negative");
  if (o.terrain_kind != "flat" && o.terrain_kind != "rough" && o.terrain_kind != "gap") {
    throw UsageError("--terrain-kind must be flat, rough or gap");
  }
  struct Key {
    double vx;
    double severity;
    std::string replan;
  };
  std::vector<SweepCase> cases;
  std::vector<Key> keys;
  const std::vector<double> severities = o.terrain_kind == "flat" ? std::vector<double>{0.0} : o.severity;
  try {
    for (const auto& mode : o.replan) {
      for (double sev : severities) {
        for (double vx : o.vx) {
          SweepCase c;
          ModelFlags m = o.model;
          m.vx = vx;
          c.config.command = m.command();
          c.config.gait = GaitParams(m.step_duration, m.tick);
          c.config.gravity = m.gravity;
          c.config.base_height = m.base_height;
          c.config.total_duration = o.duration;
          c.config.replan = parse_replan_mode(mode);
          c.config.reach_limit = o.reach;
          c.config.validate();
          if (o.terrain_kind == "rough") {
            c.terrain = RoughTerrain{sev, o.correlation, 0};
          } else if (o.terrain_kind == "gap") {
            c.terrain = GapTerrain{sev, o.gap_period, o.gap_offset};
          }
          validate(c.terrain);
          c.terrain_resolution = o.terrain_resolution;
          c.window = o.window;
          c.tolerance = o.tolerance;
          cases.push_back(std::move(c));
          keys.push_back({vx, sev, mode});
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }

  log.info("sweeping " + std::to_string(cases.size()) + " cases x " + std::to_string(o.trials) + " trials");
  const unsigned workers = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
  const auto rows = sweep(cases, o.trials, o.seed, workers);

  std::ostringstream csv;
  csv << "vx,terrain,severity,replan,trials,successes,success_rate\n";
  for (const auto& row : rows) {
    const Key& k = keys[row.case_index];
    csv << io::format_double(k.vx) << ',' << o.terrain_kind << ',' << io::format_double(k.severity) << ','
        << k.replan << ',' << row.trials << ',' << row.successes << ',' << io::format_double(row.success_rate())
        << '\n';
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_file(o.out, csv.str());
  }
  return kOk;
}

// --- plan ----------------------------------------------------------------------------------

struct PlanOptions {
  ModelFlags model;
  std::string state;
  std::string state_file;
  double t = 0.0;
  std::int64_t parity = 0;
  std::string out;
};

Vec2 vec2_field(const json& j, const char* key, Vec2 fallback)
{
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw UsageError(std::string("state: '") + key + "' must have two entries");
  return {v[0], v[1]};
}

int cmd_plan(const PlanOptions& o, std::ostream& out)
{
  json state_json = json::object();
  const std::string text = !o.state_file.empty() ? read_file(o.state_file) : o.state;
  if (!text.empty()) {
    try {
      state_json = json::parse(text);
    } catch (const json::exception& e) {
      throw UsageError(std::string("malformed state JSON: ") + e.what());
    }
    if (!state_json.is_object()) throw UsageError("state JSON must be an object");
  }

  StepPlan plan;
  FootPosition stance;
  try {
    stance.p = vec2_field(state_json, "stance", Vec2::Zero());
    if (state_json.contains("stance_z")) stance.z = state_json.at("stance_z").get<double>();
    LipState s{vec2_field(state_json, "com", stance.p), vec2_field(state_json, "vel", Vec2::Zero()),
               LipParams(o.model.gravity, o.model.base_height)};
    if (!s.finite() || !stance.p.allFinite()) throw UsageError("state must be finite");
    const GaitState gait = GaitState::at(GaitParams(o.model.step_duration, o.model.tick), o.t, o.parity);
    plan = plan_step_detailed(s, stance, o.model.command(), gait);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed state JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }

  const json result = {
      {"omega0", plan.omega0},
      {"remaining", plan.remaining},
      {"step_length", plan.step_length},
      {"step_width", plan.step_width},
      {"xi0", {plan.initial_icp.xi.x(), plan.initial_icp.xi.y()}},
      {"xi_f", {plan.final_icp.xi.x(), plan.final_icp.xi.y()}},
      {"offset", {plan.offset.b.x(), plan.offset.b.y()}},
      {"p_d", {plan.step.position.x(), plan.step.position.y()}},
      {"z", plan.step.z},
      {"heading", plan.step.heading},
      {"parity", plan.step.parity},
      {"swing_foot", to_string(swing_foot(GaitState::at(GaitParams(o.model.step_duration, o.model.tick), o.t, o.parity)))}};
  if (o.out.empty()) {
    out << result.dump(2) << '\n';
  } else {
    write_file(o.out, result.dump(2) + "\n");
  }
  return kOk;
}

// --- score ---------------------------------------------------------------------------------

struct ScoreOptions {
  std::string trajectory;
  std::string joint_log;
  double vx = 0.0;
  double vy = 0.0;
  double base_height = 0.62;
  double sigma = 0.25;
  std::vector<double> torque_limits;
  std::vector<double> joint_limits;
  double action_dt = 0.01;
  std::string out;
};

int cmd_score(const ScoreOptions& o, std::ostream& out)
{
  const std::string text = read_file(o.trajectory);
  std::ostringstream csv;
  if (!text.empty()) {
    RewardParams params;
    params.sigma = o.sigma;
    params.target_base_height = o.base_height;
    params.velocity_command = Vec2(o.vx, o.vy);
    StepCommand cmd;
    cmd.velocity = params.velocity_command;
    params.target_heading = turning_angle(cmd);
    params.torque_limits = Eigen::Map<const VecX>(o.torque_limits.data(), static_cast<Eigen::Index>(o.torque_limits.size()));
    params.joint_limits = Eigen::Map<const VecX>(o.joint_limits.data(), static_cast<Eigen::Index>(o.joint_limits.size()));
    params.action_dt = o.action_dt;
    try {
      params.validate();
      std::istringstream in(text);
      const auto rows = io::read_trajectory_csv(in);
      std::optional<io::CsvTable> joints;
      if (!o.joint_log.empty()) {
        std::istringstream jin(read_file(o.joint_log));
        joints = io::read_csv(jin);
      }
      const auto reports = score_trajectory(rows, joints, params);
      write_reward_csv(csv, rows, reports, params);
    } catch (const io::FormatError& e) {
      throw UsageError(e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.out.empty()) {
    out << csv.str();
  } else {
    write_file(o.out, csv.str());
  }
  return kOk;
}

// --- terrain gen ---------------------------------------------------------------------------

struct TerrainGenOptions {
  std::string spec;
  std::vector<double> extent{-1.0, -1.5, 12.0, 1.5};
  double resolution = 0.02;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
};

int cmd_terrain_gen(const TerrainGenOptions& o, std::ostream& out)
{
  if (o.extent.size() != 4) throw UsageError("--extent expects x0,y0,x1,y1");
  TerrainSpec spec;
  try {
    spec = parse_terrain_spec(o.spec);
    if (o.seed_set) spec = with_seed(spec, o.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Heightmap map = [&] {
    try {
      return generate(spec, Extent{Vec2(o.extent[0], o.extent[1]), Vec2(o.extent[2], o.extent[3])}, o.resolution);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  const std::string text = io::heightmap_to_json(map).dump() + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  const Log log(err);
  CLI::App app{"liprint: capture-point footstep planning on the linear inverted pendulum"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key = value file with option defaults");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "closed-loop stepping simulation; writes a trajectory CSV");
  sim.model.add_to(*simulate, true);
  simulate->add_option("--duration", sim.duration, "simulated time [s]")->capture_default_str();
  simulate->add_option("--replan", sim.replan, "auto | step-start | every-tick | every-tick-literal (auto: every-tick off flat ground)")
      ->capture_default_str();
  simulate->add_option("--terrain", sim.terrain, "flat | rough:<amp>:<corr>:<seed> | gap:<width>:<period>[:<offset>] | file:<path>")
      ->capture_default_str();
  simulate->add_option("--terrain-resolution", sim.terrain_resolution, "generated heightmap cell size [m]")
      ->capture_default_str();
  simulate->add_option("--reach", sim.reach, "capture point reach limit at touchdown [m]")->capture_default_str();
  simulate->add_option("--turn-angle", sim.turn_angle_deg, "rotate the velocity command by this angle [deg]")
      ->capture_default_str();
  simulate->add_option("--turn-time", sim.turn_time, "time of the command rotation [s]")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "terrain seed (overrides the seed in a rough terrain spec)");
  simulate->add_option("--out", sim.out, "trajectory CSV path")->capture_default_str();
  simulate->add_option("--events", sim.events, "step-event JSON path (default <out>.events.json)");
  simulate->add_option("--manifest", sim.manifest, "run manifest path (default <out>.manifest.json)");

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "success-rate table over speeds, terrain severities and trials");
  sw.model.add_to(*sweep_cmd, false);
  sweep_cmd->remove_option(sweep_cmd->get_option("--vx"));
  sweep_cmd->add_option("--vx-list", sw.vx, "forward velocity commands")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--terrain-kind", sw.terrain_kind, "flat | rough | gap")->capture_default_str();
  sweep_cmd->add_option("--severity", sw.severity, "rough amplitudes or gap widths [m]")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--corr", sw.correlation, "rough terrain correlation length [m]")->capture_default_str();
  sweep_cmd->add_option("--gap-period", sw.gap_period, "gap period [m]")->capture_default_str();
  sweep_cmd->add_option("--gap-offset", sw.gap_offset, "x of the first gap [m]")->capture_default_str();
  sweep_cmd->add_option("--replan", sw.replan, "replan modes")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--trials", sw.trials, "trials per case")->capture_default_str();
  sweep_cmd->add_option("--seed", sw.seed, "base seed")->capture_default_str();
  sweep_cmd->add_option("--duration", sw.duration, "simulated time per trial [s]")->capture_default_str();
  sweep_cmd->add_option("--window", sw.window, "success window at the end of the run [s]")->capture_default_str();
  sweep_cmd->add_option("--tolerance", sw.tolerance, "relative velocity tolerance")->capture_default_str();
  sweep_cmd->add_option("--reach", sw.reach, "capture point reach limit [m]")->capture_default_str();
  sweep_cmd->add_option("--terrain-resolution", sw.terrain_resolution, "heightmap cell size [m]")->capture_default_str();
  sweep_cmd->add_option("--threads", sw.threads, "worker threads (0 = hardware)")->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "results CSV path (default stdout)");

  PlanOptions pl;
  auto* plan = app.add_subcommand("plan", "one planning step; prints the intermediate quantities as JSON");
  pl.model.add_to(*plan, false);
  plan->add_option("--state", pl.state, R"(JSON {"com":[x,y],"vel":[x,y],"stance":[x,y],"stance_z":z})");
  plan->add_option("--state-file", pl.state_file, "file holding the state JSON");
  plan->add_option("--t", pl.t, "elapsed time in the current step [s]")->capture_default_str();
  plan->add_option("--parity", pl.parity, "step counter n")->capture_default_str();
  plan->add_option("--out", pl.out, "output path (default stdout)");

  ScoreOptions sc;
  auto* score = app.add_subcommand("score", "reward terms for every row of a trajectory CSV");
  score->add_option("--trajectory", sc.trajectory, "trajectory CSV")->required();
  score->add_option("--joint-log", sc.joint_log, "joint log CSV with one row per trajectory row");
  score->add_option("--vx", sc.vx, "forward velocity command [m/s]")->capture_default_str();
  score->add_option("--vy", sc.vy, "lateral velocity command [m/s]")->capture_default_str();
  score->add_option("--base-height", sc.base_height, "commanded base height [m]")->capture_default_str();
  score->add_option("--sigma", sc.sigma, "reward shaping scale")->capture_default_str();
  score->add_option("--torque-limit", sc.torque_limits, "torque limits, one or per joint")->delimiter(',');
  score->add_option("--joint-limit", sc.joint_limits, "joint position limits, one or per joint")->delimiter(',');
  score->add_option("--action-dt", sc.action_dt, "policy period for action smoothness [s]")->capture_default_str();
  score->add_option("--out", sc.out, "reward CSV path (default stdout)");

  TerrainGenOptions tg;
  auto* terrain = app.add_subcommand("terrain", "terrain utilities");
  terrain->require_subcommand(1);
  auto* gen = terrain->add_subcommand("gen", "generate a heightmap JSON");
  gen->add_option("--spec", tg.spec, "flat | rough:<amp>:<corr>:<seed> | gap:<width>:<period>[:<offset>]")->required();
  gen->add_option("--extent", tg.extent, "x0,y0,x1,y1 [m]")->delimiter(',')->capture_default_str();
  gen->add_option("--resolution", tg.resolution, "cell size [m]")->capture_default_str();
  auto* seed_opt = gen->add_option("--seed", tg.seed, "override the rough terrain seed");
  gen->add_option("--out", tg.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out, log);
    if (*sweep_cmd) return cmd_sweep(sw, out, log);
    if (*plan) return cmd_plan(pl, out);
    if (*score) return cmd_score(sc, out);
    if (*gen) {
      tg.seed_set = seed_opt->count() > 0;
      return cmd_terrain_gen(tg, out);
    }
  } catch (const UsageError& e) {
    err << "liprint: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace liprint::cli
