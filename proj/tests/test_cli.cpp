#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "liprint");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = liprint::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s)
{
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("liprint_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesTrajectoryAndManifest)
{
  const auto r = cli({"simulate", "--vx", "1.0", "--duration", "10", "--out", path("t.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(slurp(path("t.csv"))), 1001u);
  const json m = json::parse(slurp(path("t.csv.manifest.json")));
  EXPECT_TRUE(m.at("outcome").at("completed").get<bool>());
  EXPECT_EQ(m.at("config").at("replan"), "step-start");
  EXPECT_EQ(m.at("version"), liprint::cli::kVersion);
  EXPECT_TRUE(fs::exists(path("t.csv.events.json")));
}

TEST_F(Cli, SimulateImpassableGapExitsTwo)
{
  const auto r = cli({"simulate", "--vx", "1.0", "--terrain", "gap:2.0:0.1", "--out", path("g.csv"), "--manifest",
                      path("g.json")});
  EXPECT_EQ(r.code, 2);
  const json m = json::parse(slurp(path("g.json")));
  EXPECT_FALSE(m.at("outcome").at("completed").get<bool>());
  EXPECT_FALSE(m.at("outcome").at("reason").get<std::string>().empty());
  EXPECT_EQ(m.at("config").at("replan"), "every-tick");
}

TEST_F(Cli, UsageErrorsExitOne)
{
  EXPECT_EQ(cli({"simulate", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"simulate", "--vx", "abc"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--vx", "1", "--terrain", "bumpy", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"simulate", "--vx", "1", "--ts", "0.355", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"simulate", "--vx", "1", "--replan", "sometimes", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"simulate", "--vx", "1", "--terrain", "file:" + path("missing.json"), "--out", path("x.csv")}).code,
            1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST_F(Cli, SimulateIsByteDeterministic)
{
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto r = cli({"simulate", "--vx", "1.2", "--terrain", "rough:0.05:0.5:0", "--seed", "17", "--duration", "4",
                        "--out", path(name)});
    EXPECT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv.manifest.json")).size(), slurp(path("b.csv.manifest.json")).size());
  const json m = json::parse(slurp(path("a.csv.manifest.json")));
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 17u);
}

TEST_F(Cli, TerrainGenFeedsSimulate)
{
  const auto g = cli({"terrain", "gen", "--spec", "gap:0.15:0.8", "--extent", "-1.5,-1.5,11.5,1.5", "--resolution",
                      "0.02", "--out", path("map.json")});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto from_file = cli({"simulate", "--vx", "1", "--terrain", "file:" + path("map.json"), "--out", path("f.csv")});
  const auto generated = cli({"simulate", "--vx", "1", "--terrain", "gap:0.15:0.8", "--out", path("s.csv")});
  EXPECT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(generated.code, 0) << generated.err;
  EXPECT_EQ(slurp(path("f.csv")), slurp(path("s.csv")));
  EXPECT_EQ(cli({"terrain", "gen", "--spec", "rough:0.1:0.5:1", "--extent", "0,0,1"}).code, 1);
}

TEST_F(Cli, SweepFlatAllSucceedAndDeterministic)
{
  const auto a = cli({"sweep", "--vx-list", "0.5,1.0,1.5,2.0", "--trials", "2", "--seed", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream in(a.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "vx,terrain,severity,replan,trials,successes,success_rate");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
  }
  EXPECT_EQ(rows, 4);

  const auto r1 = cli({"sweep", "--vx-list", "1.0", "--terrain-kind", "rough", "--severity", "0.1,0.2", "--replan",
                       "step-start,every-tick", "--trials", "3", "--seed", "9", "--duration", "6"});
  const auto r2 = cli({"sweep", "--vx-list", "1.0", "--terrain-kind", "rough", "--severity", "0.1,0.2", "--replan",
                       "step-start,every-tick", "--trials", "3", "--seed", "9", "--duration", "6", "--threads", "1"});
  EXPECT_EQ(r1.code, 0);
  EXPECT_EQ(r1.out, r2.out);

  const auto zero = cli({"sweep", "--trials", "0"});
  EXPECT_EQ(zero.code, 0);
  EXPECT_EQ(count_lines(zero.out), 1u);
  EXPECT_EQ(cli({"sweep", "--terrain-kind", "lumpy"}).code, 1);
}

TEST_F(Cli, PlanPrintsIntermediates)
{
  const auto r = cli({"plan", "--vx", "1.0", "--state", R"({"com":[0,0],"vel":[0,0],"stance":[0,0]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j.at("offset")[0].get<double>(), 0.115750, 1e-6);
  EXPECT_NEAR(j.at("offset")[1].get<double>(), 0.059716, 1e-6);
  EXPECT_NEAR(j.at("omega0").get<double>(), 3.97776, 1e-5);
  EXPECT_EQ(j.at("swing_foot"), "left");

  const auto still = cli({"plan", "--vx", "0", "--state", R"({"com":[0,0],"vel":[0,0],"stance":[0,0]})"});
  ASSERT_EQ(still.code, 0);
  EXPECT_EQ(json::parse(still.out).at("offset")[0].get<double>(), 0.0);

  EXPECT_EQ(cli({"plan", "--vx", "1", "--state", "{com:"}).code, 1);
  EXPECT_EQ(cli({"plan", "--vx", "1", "--state", R"({"com":[0]})"}).code, 1);
  EXPECT_EQ(cli({"plan", "--vx", "1", "--state", R"({"com":"x"})"}).code, 1);
  EXPECT_EQ(cli({"plan", "--vx", "1", "--state", "[]"}).code, 1);
  EXPECT_EQ(cli({"plan", "--vx", "1", "--t", "0.35"}).code, 1);
}

TEST_F(Cli, ScoreRoundTripAndErrors)
{
  ASSERT_EQ(cli({"simulate", "--vx", "1", "--duration", "2", "--out", path("t.csv")}).code, 0);
  const auto s = cli({"score", "--trajectory", path("t.csv"), "--vx", "1", "--out", path("r.csv")});
  EXPECT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(count_lines(slurp(path("r.csv"))), count_lines(slurp(path("t.csv"))));

  std::ofstream(path("empty.csv")).close();
  const auto e = cli({"score", "--trajectory", path("empty.csv")});
  EXPECT_EQ(e.code, 0);
  EXPECT_TRUE(e.out.empty());

  std::ofstream(path("bad.csv")) << "time,com_x\n0,1\n";
  EXPECT_EQ(cli({"score", "--trajectory", path("bad.csv")}).code, 1);
  std::ofstream(path("ragged.csv")) << slurp(path("t.csv")) << "1,2,3\n";
  EXPECT_EQ(cli({"score", "--trajectory", path("ragged.csv")}).code, 1);
  std::ofstream(path("joints.csv")) << "tau_0\n1\n";
  EXPECT_EQ(cli({"score", "--trajectory", path("t.csv"), "--joint-log", path("joints.csv")}).code, 1);
}

TEST_F(Cli, ConfigFileSuppliesDefaults)
{
  std::ofstream(path("run.ini")) << "[simulate]\nvx = 0.5\nduration = 1\nout = " << path("c.csv") << "\n";
  const auto r = cli({"--config", path("run.ini"), "simulate"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(slurp(path("c.csv"))), 101u);
}
