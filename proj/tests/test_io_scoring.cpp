#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "liprint/io.hpp"
#include "liprint/scoring.hpp"

using namespace liprint;

TEST(FormatDouble, RoundTripsBitExactly)
{
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 3.9777607576576663, 1e-300, -2.5e17,
                   std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
    const double back = io::parse_double(io::format_double(v));
    EXPECT_EQ(std::signbit(back), std::signbit(v));
    EXPECT_EQ(back, v) << io::format_double(v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(10.0), "10");
}

TEST(ParseDouble, Rejects)
{
  EXPECT_THROW(io::parse_double(""), io::FormatError);
  EXPECT_THROW(io::parse_double("1.0x"), io::FormatError);
  EXPECT_THROW(io::parse_double("abc"), io::FormatError);
  EXPECT_EQ(io::parse_double("+2"), 2.0);
}

TEST(ReadCsv, Basics)
{
  std::istringstream empty("");
  EXPECT_TRUE(io::read_csv(empty).header.empty());

  std::istringstream in("a,b\r\n1,2\n\n3,4\n");
  const auto t = io::read_csv(in);
  ASSERT_EQ(t.header.size(), 2u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][1], 4.0);
  EXPECT_EQ(t.column("b"), 1);
  EXPECT_EQ(t.column("c"), -1);

  std::istringstream bad("a,b\n1,2,3\n");
  EXPECT_THROW(io::read_csv(bad), io::FormatError);
}

TEST(TrajectoryCsv, RoundTrip)
{
  SimConfig c;
  c.command.velocity = Vec2(0.8, 0.3);
  c.total_duration = 2.0;
  const SimResult r = run(c);
  std::ostringstream out;
  io::write_trajectory_csv(out, r);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "time,com_x,com_y,vel_x,vel_y,icp_x,icp_y,stance_x,stance_y,stance_z,target_x,target_y,target_z,"
            "target_heading,parity,contact_schedule,phase_sin,phase_cos,outcome_flag");

  std::istringstream in(text);
  const auto rows = io::read_trajectory_csv(in);
  ASSERT_EQ(rows.size(), r.samples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(io::trajectory_row(rows[i]), io::trajectory_row(r.samples[i]));
  }

  std::istringstream wrong("time,com_x\n0,0\n");
  EXPECT_THROW(io::read_trajectory_csv(wrong), io::FormatError);
}

TEST(HeightmapJson, RoundTrip)
{
  const Heightmap h = generate(GapTerrain{0.2, 0.5, 0.3}, Extent{Vec2(-0.5, -0.25), Vec2(1.0, 0.25)}, 0.05);
  const Heightmap r = generate(RoughTerrain{0.05, 0.4, 3}, Extent{Vec2(-0.5, -0.25), Vec2(1.0, 0.25)}, 0.05);
  for (const Heightmap* m : {&h, &r}) {
    const auto j = io::heightmap_to_json(*m);
    const Heightmap back = io::heightmap_from_json(io::json::parse(j.dump()));
    EXPECT_EQ(back.origin(), m->origin());
    EXPECT_EQ(back.resolution(), m->resolution());
    EXPECT_EQ(back.rows(), m->rows());
    EXPECT_EQ(back.cols(), m->cols());
    EXPECT_EQ(back.heights(), m->heights());
    EXPECT_EQ(back.gap_mask(), m->gap_mask());
  }
  EXPECT_THROW(io::heightmap_from_json(io::json::parse(R"({"origin":[0,0],"resolution":1,"rows":2,"cols":2,"heights":[0]})")),
               io::FormatError);
  EXPECT_THROW(io::heightmap_from_json(io::json::parse(R"({"origin":[0],"resolution":1,"rows":1,"cols":1,"heights":[0]})")),
               io::FormatError);
}

TEST(StepEventsJson, Shape)
{
  SimConfig c;
  c.command.velocity = Vec2(1.0, 0.0);
  c.total_duration = 1.0;
  const auto j = io::step_events_json(run(c));
  EXPECT_EQ(j.at("events").size(), 2u);
  EXPECT_TRUE(j.at("outcome").at("completed").get<bool>());
  EXPECT_EQ(j.at("events")[0].at("parity").get<int>(), 0);
}

namespace {

TrajectorySample ideal_row(double time)
{
  TrajectorySample s;
  s.time = time;
  s.com_vel = Vec2(1.0, 0.0);
  s.stance = {Vec2(0.0, -0.15), 0.0};
  s.target.position = Vec2(0.35, 0.15);
  s.parity = 0;
  s.contact_schedule = 1.0;
  return s;
}

RewardParams forward_params()
{
  RewardParams p;
  p.velocity_command = Vec2(1.0, 0.0);
  return p;
}

}  // namespace

TEST(Scoring, IdealSyntheticTrajectory)
{
  const std::vector<TrajectorySample> rows{ideal_row(0.0), ideal_row(0.01)};
  const auto reports = score_trajectory(rows, std::nullopt, forward_params());
  ASSERT_EQ(reports.size(), 2u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.terms[0].value, 1.0);
    EXPECT_EQ(r.terms[1].value, 2.0);
    EXPECT_EQ(r.terms[2].value, 4.0);
    EXPECT_EQ(r.terms[3].value, 9.0);
    EXPECT_EQ(r.total, 18.25);
  }
}

TEST(Scoring, OddParityMeansLeftStance)
{
  TrajectorySample row = ideal_row(0.0);
  row.parity = 1;
  row.contact_schedule = -1.0;
  const auto r = score_trajectory({row}, std::nullopt, forward_params());
  EXPECT_EQ(r[0].terms[3].value, 9.0);
}

TEST(Scoring, JointLog)
{
  const std::vector<TrajectorySample> rows{ideal_row(0.0), ideal_row(0.01), ideal_row(0.02)};
  std::istringstream jl(
      "tau_0,tau_1,q_0,q_1,qd_0,qd_1,a_0,a_1,qhip_0,base_z,self_collision\n"
      "1,2,0,0,0,0,0.1,0.1,0,0.62,0\n"
      "1,2,0,0,0,0,0.2,0.1,0,0.62,0\n"
      "1,2,0,0,0,0,0.2,0.1,0,0.2,1\n");
  RewardParams p = forward_params();
  p.torque_limits = VecX::Constant(1, 100.0);
  p.joint_limits = VecX::Constant(1, 1.0);
  const auto reports = score_trajectory(rows, io::read_csv(jl), p);
  ASSERT_EQ(reports.size(), 3u);
  auto value = [&](std::size_t i, const std::string& name) {
    for (const auto& t : reports[i].terms) {
      if (t.name == name) return t.value;
    }
    return std::nan("");
  };
  EXPECT_NEAR(value(0, "joint_torques"), -1e-4 * 5.0, 1e-15);
  EXPECT_EQ(value(0, "action_smoothness_1"), 0.0);
  EXPECT_NEAR(value(1, "action_smoothness_1"), -1e-3 * 100.0, 1e-12);
  EXPECT_NEAR(value(1, "action_smoothness_2"), -1e-4 * 100.0, 1e-12);
  EXPECT_NEAR(value(2, "action_smoothness_2"), -1e-4 * 100.0, 1e-12);
  EXPECT_EQ(value(1, "termination"), 0.0);
  EXPECT_EQ(value(2, "termination"), -100.0);
}

TEST(Scoring, JointLogErrors)
{
  const std::vector<TrajectorySample> rows{ideal_row(0.0)};
  std::istringstream unknown("tau_0,bogus\n1,2\n");
  EXPECT_THROW(score_trajectory(rows, io::read_csv(unknown), forward_params()), io::FormatError);
  std::istringstream gap("tau_1\n1\n");
  EXPECT_THROW(score_trajectory(rows, io::read_csv(gap), forward_params()), io::FormatError);
  std::istringstream count("tau_0\n1\n2\n");
  EXPECT_THROW(score_trajectory(rows, io::read_csv(count), forward_params()), io::FormatError);
}

TEST(Scoring, SimulationRoundTrip)
{
  SimConfig c;
  c.command.velocity = Vec2(1.0, 0.0);
  c.total_duration = 3.0;
  const SimResult r = run(c);
  std::ostringstream out;
  io::write_trajectory_csv(out, r);
  std::istringstream in(out.str());
  const auto rows = io::read_trajectory_csv(in);
  const RewardParams p = forward_params();
  const auto reports = score_trajectory(rows, std::nullopt, p);
  EXPECT_EQ(reports.size(), rows.size());
  std::ostringstream csv;
  write_reward_csv(csv, rows, reports, p);
  std::istringstream back(csv.str());
  const auto table = io::read_csv(back);
  EXPECT_EQ(table.rows.size(), rows.size());
  EXPECT_EQ(table.header, reward_columns(p));
  EXPECT_EQ(table.header.front(), "time");
  EXPECT_EQ(table.header.back(), "total");
}
