#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pulselab.hpp"

using namespace pulselab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string config_message(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("pulselab_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int cli(const std::string& args) {
    const std::string cmd = std::string(PULSELAB_CLI) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, MinimalConfigTakesDefaults) {
  const auto c = parse_config_text(R"({ "experiment": {"type": "stationary"} })");
  RunConfig d;
  d.experiment.type = "stationary";
  EXPECT_EQ(c, d);
  EXPECT_EQ(c.model.eta, 5.0);
  EXPECT_EQ(c.n_points, 2048u);
  EXPECT_EQ(c.effective_half_width(), 40.0);
}

TEST(Config, NegativeBetaNamesConstraint) {
  const auto msg = config_message(R"({ "model": {"beta": -1} })");
  EXPECT_NE(msg.find("beta > 0"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsRejected) {
  const auto msg = config_message(R"({ "modle": {} })");
  EXPECT_NE(msg.find("unknown key 'modle'"), std::string::npos) << msg;
  const auto nested = config_message(R"({ "model": {"etta": 3} })");
  EXPECT_NE(nested.find("model.etta"), std::string::npos) << nested;
}

TEST(Config, TypeMismatchIsRejected) {
  const auto msg = config_message(R"({ "model": {"eta": "five"} })");
  EXPECT_NE(msg.find("model.eta"), std::string::npos) << msg;
  EXPECT_NE(msg.find("number"), std::string::npos) << msg;
  EXPECT_FALSE(config_message(R"({ "grid": {"n_points": 2.5} })").empty());
  EXPECT_FALSE(config_message(R"({ "grid": {"n_points": 1000} })").empty());
  EXPECT_FALSE(config_message("{ not json").empty());
}

TEST(Config, PerturbationBudgetIsEnforced) {
  const auto msg = config_message(
      R"({ "experiment": {"perturbation": {"shape": "gaussian", "amplitude": 0.5}} })");
  EXPECT_NE(msg.find("budget"), std::string::npos) << msg;
}

TEST(Config, HalfWidthDefaultFollowsBeta) {
  auto c = parse_config_text(R"({ "model": {"beta": 0.5} })");
  EXPECT_EQ(c.effective_half_width(), 40.0);
  c = parse_config_text(R"({ "model": {"beta": 0.25} })");
  EXPECT_EQ(c.effective_half_width(), 80.0);
}

TEST(Manifest, RoundTripEqualsEffectiveConfig) {
  const auto dir = fs::temp_directory_path() / ("pulselab_manifest_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto c = parse_config_text(R"({
    "model": {"eta": 3.25, "epsilon": 0.01},
    "step": {"dt": 0.002},
    "experiment": {"type": "stability", "T": 7.5, "snapshot_times": [1, 2.5],
                   "perturbation": {"shape": "random", "amplitude": 0.01}},
    "seed": 17 })");
  Manifest m;
  m.command = "stability";
  m.config = effective(c);
  m.artifacts = {"a.csv"};
  m.write(dir);
  const auto back = config_from_manifest(dir / "manifest.json");
  EXPECT_EQ(back, effective(c));
  const auto j = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 17u);
  EXPECT_TRUE(j.contains("tolerances"));
  EXPECT_TRUE(j.contains("code_version"));
  fs::remove_all(dir);
}

TEST(Csv, FullPrecisionNumbers) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(CsvWriter::to_text(true), "true");
  EXPECT_EQ(CsvWriter::to_text(std::size_t{7}), "7");
}

TEST_F(CliTest, ThresholdColumnDecreasesToLimit) {
  ASSERT_EQ(cli("threshold --out " + dir_.string()), 0);
  const auto rows = read_csv(dir_ / "threshold.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][0], "epsilon");
  for (std::size_t i = 2; i < rows.size(); ++i)
    EXPECT_LT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
  EXPECT_NEAR(std::stod(rows.back()[1]), 4.0, 1e-2);
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
}

TEST_F(CliTest, PulseBelowThreshold) {
  const auto cfg = write_config("c.json", R"({ "model": {"eta": 2} })");
  ASSERT_EQ(cli("pulse --config " + cfg.string() + " --out " + dir_.string()), 0);
  const auto summary = slurp(dir_ / "summary.csv");
  EXPECT_NE(summary.find("below_threshold,true"), std::string::npos) << summary;
  EXPECT_FALSE(fs::exists(dir_ / "profile.csv"));
}

TEST_F(CliTest, PulseAboveThresholdWritesProfile) {
  ASSERT_EQ(cli("pulse --out " + dir_.string()), 0);
  const auto summary = slurp(dir_ / "summary.csv");
  EXPECT_NE(summary.find("v_c,1.4941293"), std::string::npos) << summary;
  EXPECT_EQ(read_csv(dir_ / "profile.csv").size(), 202u);
}

TEST_F(CliTest, SimulateFromStationaryStaysPut) {
  const auto cfg = write_config("c.json", R"({
    "grid": {"n_points": 1024},
    "experiment": {"type": "simulate", "initial": "stationary", "T": 2, "snapshot_times": [1]} })");
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + dir_.string()), 0);
  const auto rows = read_csv(dir_ / "trajectory.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "x_c", "v_c", "s_tot", "norm_inf", "norm_w1"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::abs(std::stod(rows[i][1])), 1e-8);
  EXPECT_TRUE(fs::exists(dir_ / "snapshot_0.csv"));
  const auto j = json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("command"), "simulate");
  EXPECT_TRUE(j.at("diagnostics").at("mass_ok").get<bool>());
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("simulate --config /nonexistent/x.json"), 1);
  const auto bad = write_config("bad.json", R"({ "model": {"beta": -1} })");
  EXPECT_EQ(cli("simulate --config " + bad.string() + " --out " + dir_.string()), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("beta > 0"), std::string::npos);
}

TEST_F(CliTest, IdenticalRunsAreByteIdentical) {
  const auto cfg = write_config("c.json", R"({
    "grid": {"n_points": 1024},
    "experiment": {"type": "stability", "T": 2,
                   "perturbation": {"shape": "random", "amplitude": 0.01}},
    "seed": 5 })");
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir_ / "b").string()), 0);
  for (const char* f : {"trajectory.csv", "timeseries.csv", "fits.csv", "manifest.json"}) {
    const auto a = slurp(dir_ / "a" / f), b = slurp(dir_ / "b" / f);
    EXPECT_FALSE(a.empty()) << f;
    if (std::string(f) == "manifest.json") continue;  // records the output path
    EXPECT_EQ(a, b) << f;
  }
}

TEST_F(CliTest, FailedAssertionExitsTwo) {
  // Too short for the kicked points to reach their pulse speed.
  const auto cfg = write_config("c.json", R"({
    "grid": {"n_points": 1024},
    "experiment": {"type": "sweep", "T": 1, "eta_grid": [2, 6]} })");
  EXPECT_EQ(cli("run --config " + cfg.string() + " --out " + dir_.string()), 2);
  const auto j = json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(j.at("status"), "assertion_failure");
  EXPECT_EQ(read_csv(dir_ / "bifurcation.csv").size(), 3u);
}

TEST_F(CliTest, OracleAllRowsPass) {
  ASSERT_EQ(cli("oracle --out " + dir_.string()), 0);
  const auto rows = read_csv(dir_ / "oracle.csv");
  ASSERT_GT(rows.size(), 20u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].back(), "true") << rows[i][0];
}
