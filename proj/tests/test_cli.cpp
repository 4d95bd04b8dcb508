#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "vsgosc/config.hpp"
#include "vsgosc/engine.hpp"
#include "vsgosc/equivalent_circuit.hpp"

namespace fs = std::filesystem;
using namespace vsgosc;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(VSGOSC_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) { return std::string(VSGOSC_SCENARIO_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("vsgosc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string out() const { return "--out " + dir.string(); }
  std::size_t file_count() const {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
  }

  fs::path dir;
};

double first_number_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) return std::nan("");
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace

TEST_F(Cli, SimulateWritesCsvAndMetrics) {
  const auto r = run(out() + " simulate " + scenario("sa_load_step.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir / "sa_load_step.csv");
  ASSERT_TRUE(in);
  const TimeSeries ts = read_csv(in);
  // Steady shares 1:2:3 of the 700 W step.
  const double t_step = 5.0;
  std::size_t before = 0;
  while (ts.t()[before + 1] < t_step) ++before;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& P = ts.unit(i, "P_W");
    const double want = 700.0 * static_cast<double>(i + 1) / 6.0;
    EXPECT_NEAR(P.back() - P[before], want, 0.01 * want);
  }
  std::ifstream mj(dir / "sa_load_step_metrics.json");
  ASSERT_TRUE(mj);
  const auto j = nlohmann::json::parse(mj);
  EXPECT_LT(j.at("sharing_error_pct").get<double>(), 1.0);
  EXPECT_TRUE(j.at("signals").contains("unit1_P_W"));
}

TEST_F(Cli, SimulateGcOvershoot) {
  ASSERT_EQ(run(out() + " simulate " + scenario("gc_ref_step_strong.json")).code, 0);
  ASSERT_EQ(run(out() + " simulate " + scenario("gc_ref_step_strong_adaptive_inertia.json")).code, 0);
  auto overshoot = [&](const std::string& stem) {
    std::ifstream in(dir / (stem + "_metrics.json"));
    return nlohmann::json::parse(in).at("signals").at("unit1_P_W").at("overshoot_pct").get<double>();
  };
  EXPECT_GT(overshoot("gc_ref_step_strong"), 50.0);
  EXPECT_LT(overshoot("gc_ref_step_strong_adaptive_inertia"), 10.0);
}

TEST_F(Cli, MalformedConfigWritesNothing) {
  const fs::path bad = dir / "in" / "bad.json";
  fs::create_directories(bad.parent_path());
  std::ofstream(bad) << "{\"omega0_rad_s\": 314,\n \"units\": [ }";
  const fs::path out_dir = dir / "out";
  fs::create_directories(out_dir);
  const auto r = run("--out " + out_dir.string() + " simulate " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("line 2"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::is_empty(out_dir));
  EXPECT_EQ(run("--out " + out_dir.string() + " simulate " + (dir / "missing.json").string()).code, 1);
  EXPECT_TRUE(fs::is_empty(out_dir));
}

TEST_F(Cli, BodeReportsPeaks) {
  const auto mism = run(out() + " bode " + scenario("bode_mismatched.json") + " --which sa");
  ASSERT_EQ(mism.code, 0) << mism.out;
  const double w = first_number_after(mism.out, "resonance peak at ");
  EXPECT_GE(w, 8.0);
  EXPECT_LE(w, 12.0);
  EXPECT_TRUE(fs::exists(dir / "bode_mismatched_bode_sa_unit1.csv"));
  EXPECT_TRUE(fs::exists(dir / "bode_mismatched_bode_sa_unit2.csv"));

  const auto prop = run(out() + " bode " + scenario("bode_proportional.json") + " --which sa");
  ASSERT_EQ(prop.code, 0) << prop.out;
  EXPECT_NE(prop.out.find("no interior peak"), std::string::npos) << prop.out;
  EXPECT_EQ(prop.out.find("resonance peak at"), std::string::npos) << prop.out;

  // A lone unit takes the whole load step, so its SA share is flat; its own
  // swing resonance shows in the reference-step response.
  const auto single_sa = run(out() + " bode " + scenario("single_unit.json") + " --which sa");
  ASSERT_EQ(single_sa.code, 0);
  EXPECT_NE(single_sa.out.find("no interior peak"), std::string::npos) << single_sa.out;
  const auto single = run(out() + " bode " + scenario("single_unit.json") + " --which gc");
  ASSERT_EQ(single.code, 0) << single.out;
  EXPECT_NEAR(first_number_after(single.out, "resonance peak at "), 9.306, 0.01);
  const auto gc = run(out() + " bode " + scenario("gc_ref_step_strong.json") + " --which gc");
  ASSERT_EQ(gc.code, 0) << gc.out;
  EXPECT_GT(first_number_after(gc.out, "resonance peak at "), 0.0);
}

TEST_F(Cli, BodeCsvLayout) {
  ASSERT_EQ(run(out() + " bode " + scenario("bode_mismatched.json") + " --points 50").code, 0);
  std::ifstream in(dir / "bode_mismatched_bode_sa_unit1.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "omega_rad_s,mag_db,phase_deg");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 50);
}

TEST_F(Cli, DesignTable) {
  const auto r = run(out() + " design --dp-max 300 --rocof-max 1 --dw-max 1 --k-hp 10 --rho 0.05 --nq-l2-h0 5");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir / "design.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("J0").get<double>(), 300);
  EXPECT_EQ(j.at("D0").get<double>(), 300);
  EXPECT_DOUBLE_EQ(j.at("tau").get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(j.at("mu").get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(j.at("k_v").get<double>(), 0.01);
  EXPECT_NE(r.out.find("dP_max / RoCoF_max"), std::string::npos);
}

TEST_F(Cli, DesignConsensusOnly) {
  const auto r = run(out() + " design --rho 0.05 --nq-l2-h0 5");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir / "design.json");
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(in).at("k_v").get<double>(), 0.01);
}

TEST_F(Cli, DesignErrors) {
  const auto zero = run(out() + " design --dp-max 300 --rocof-max 0 --dw-max 1");
  EXPECT_EQ(zero.code, 1);
  EXPECT_NE(zero.out.find("rocof-max must be positive"), std::string::npos) << zero.out;
  const auto missing = run(out() + " design --dp-max 300");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("--rocof-max"), std::string::npos) << missing.out;
  EXPECT_NE(missing.out.find("--dw-max"), std::string::npos) << missing.out;
  EXPECT_EQ(file_count(), 0u);
}

TEST_F(Cli, CheckSuggestionClosesTheGap) {
  const auto r = run(out() + " check " + scenario("sa_load_step.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(first_number_after(r.out, "proportionality residual: "), 0.444, 5e-4);
  const auto fixed = load_model_file((dir / "sa_load_step_proportional.json").string());
  EXPECT_LT(proportionality_residual(fixed.model), 1e-9);
  const auto again = run(out() + " check " + (dir / "sa_load_step_proportional.json").string());
  EXPECT_NE(again.out.find("suggestion: none needed"), std::string::npos) << again.out;
}

TEST_F(Cli, CheckProportionalAndSingle) {
  const auto p = run(out() + " check " + scenario("bode_proportional.json"));
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(first_number_after(p.out, "proportionality residual: "), 0.0);
  EXPECT_NE(p.out.find("suggestion: none needed"), std::string::npos);
  const auto s = run(out() + " check " + scenario("single_unit.json"));
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(first_number_after(s.out, "proportionality residual: "), 0.0);
}

TEST_F(Cli, SweepRunsInParallel) {
  const auto r = run(out() + " --jobs 3 sweep " + scenario("single_unit.json") + " " +
                     scenario("bode_mismatched.json") + " " + scenario("bode_proportional.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* stem : {"single_unit", "bode_mismatched", "bode_proportional"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string(stem) + ".csv"))) << stem;
  }
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("bode " + scenario("single_unit.json") + " --which xx").code, 0);
}
