#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dtc/device_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string binary() {
  const char* p = std::getenv("DTCSIM");
  return p ? p : "dtcsim";
}

Result run(const std::string& args) {
  std::string cmd = binary() + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<double> fields(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  return v;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dtcsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  // L subsystem of the shipped device at a small truncation.
  std::string l_config() {
    return write("l.json", R"(// small spectrum runs
{
  "schema": "dtc-run/1",
  "subsystem": "L",
  "truncation": {"Q1": 3, "Cb10": 3, "Cp1A": 3, "Cp1B": 3},
  "spectrum": {"k": 12},
  "sweep": {"channel": 1, "grid1": {"points": [0.3]}, "grid2": {"points": [0.3]}},
  "workers": 1
})");
  }

  // Two qubits joined by one flux-tunable coupler pair.
  std::string toy_config() {
    write("toy_device.json", R"({
  "schema": "dtc-device/1",
  "name": "toy",
  "modes": [
    {"id": "QA", "kind": "transmon", "E_C": 0.22, "E_J": 12.0, "dim": 3},
    {"id": "QB", "kind": "transmon", "E_C": 0.22, "E_J": 13.0, "dim": 3},
    {"id": "C1", "kind": "transmon", "E_C": 0.3, "E_J": 14.0, "dim": 3},
    {"id": "C2", "kind": "transmon", "E_C": 0.3, "E_J": 14.0, "dim": 3}
  ],
  "edges": [
    {"a": "QA", "b": "C1", "J": 0.15},
    {"a": "C1", "b": "C2", "J": 0.02},
    {"a": "C2", "b": "QB", "J": 0.15}
  ],
  "loops": [{"a": "C1", "b": "C2", "E_J": 1.96, "channel": 1}],
  "qubits": ["QA", "QB"]
})");
    return write("toy.json", R"({
  "schema": "dtc-run/1",
  "device": "toy_device.json",
  "idle": {"phi_idle": 0.25},
  "pulse": {"synchronous": true,
            "pulse": {"phi_idle": 0.25, "phi_amp": 0.19, "lambdas": [1.0], "duration_ns": 200}},
  "propagation": {"dt": 0.05, "stride": 100},
  "calibration": {"restarts": 1, "max_evals": 12, "success_cost": 1e-3},
  "workers": 1
})");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionAndUsage) {
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("zz --mode 3d").code, 2);
}

TEST_F(Cli, ValidateDefaultDevice) {
  Result r = run("validate");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* s : {"Q1", "Cb11", "Cp2B", "composite dimension 11664", "config_hash", "ok"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST_F(Cli, ValidateRejectsBadConfig) {
  std::string bad = write("bad.json", R"({"schema": "dtc-run/1", "propagation": {"dt": -1}})");
  Result r = run("validate --config " + bad);
  EXPECT_EQ(r.code, 2) << r.out;
  std::string wrong = write("wrong.json", R"({"schema": "nope"})");
  EXPECT_EQ(run("validate --config " + wrong).code, 2);
  EXPECT_EQ(run("validate --config " + (dir_ / "missing.json").string()).code, 2);
}

TEST_F(Cli, SinglePointSpectrum) {
  std::string cfg = l_config();
  Result r = run("spectrum --config " + cfg + " --out " + (dir_ / "o").string() + " --labels '0;Q1=1;Cb10=1'");
  ASSERT_EQ(r.code, 0) << r.out;
  std::string csv = slurp(dir_ / "o" / "spectrum.csv");
  EXPECT_EQ(csv.rfind("# dtcsim ", 0), 0u);
  EXPECT_NE(csv.find("config_hash="), std::string::npos);
  auto lines = data_lines(csv);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "flux1,flux2,E_ground,E_Q1=1,E_Cb10=1,min_overlap");
  auto v = fields(lines[1]);
  EXPECT_EQ(v[0], 0.3);
  EXPECT_LT(v[2], v[3]);
  EXPECT_GT(v[5], 0.5);
}

TEST_F(Cli, UnknownLabelIsConfigError) {
  Result r = run("spectrum --config " + l_config() + " --out " + (dir_ / "o").string() + " --labels 'Q9=1'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("Q9"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "o" / "spectrum.csv"));
}

TEST_F(Cli, EmptyGridIsConfigError) {
  std::string cfg = l_config();
  EXPECT_EQ(run("zz --mode 1d --config " + cfg + " --grid ''").code, 2);
  EXPECT_EQ(run("zz --mode 1d --config " + cfg + " --grid 0.5:0.2:0.01").code, 2);
  EXPECT_EQ(run("zz --mode 1d --config " + cfg + " --grid 0.2:0.5:0").code, 2);
  EXPECT_EQ(run("zz --mode 1d --config " + cfg + " --grid abc").code, 2);
}

TEST_F(Cli, ZZMapIndependentOfWorkers) {
  std::string cfg = l_config();
  std::string grids = " --grid 0.25,0.3,0.35 --grid2 0.3,0.4";
  Result a = run("zz --mode 2d --config " + cfg + grids + " --workers 1 --out " + (dir_ / "a").string());
  Result b = run("zz --mode 2d --config " + cfg + grids + " --workers 3 --out " + (dir_ / "b").string());
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  for (const char* f : {"zz_2d.csv", "zz_2d_grid.csv"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_EQ(data_lines(slurp(dir_ / "a" / "zz_2d.csv")).size(), 7u);
}

TEST_F(Cli, ManifestListsOutputs) {
  Result r = run("zz --mode 1d --svg --config " + l_config() + " --grid 0.3,0.5 --out " + (dir_ / "o").string());
  ASSERT_EQ(r.code, 0) << r.out;
  json m = dtc::parse_json_file((dir_ / "o" / "manifest_zz.json").string());
  EXPECT_EQ(m["command"], "zz");
  EXPECT_EQ(m["outputs"].size(), 2u);
  for (const auto& o : m["outputs"]) EXPECT_TRUE(fs::exists(o.get<std::string>())) << o;
  std::string csv = slurp(dir_ / "o" / "zz_1d.csv");
  EXPECT_NE(csv.find("config_hash=" + m["config_hash"].get<std::string>()), std::string::npos);
  std::string svg = slurp(dir_ / "o" / "zz_1d.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find(m["config_hash"].get<std::string>()), std::string::npos);
}

TEST_F(Cli, DryRunWritesNothing) {
  Result r = run("zz --mode 2d --dry-run --config " + l_config() + " --out " + (dir_ / "o").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("plan:"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
  Result c = run("calibrate --dry-run --config " + toy_config() + " --out " + (dir_ / "c").string());
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_NE(c.out.find("idle flux 0.25"), std::string::npos) << c.out;
  EXPECT_FALSE(fs::exists(dir_ / "c"));
}

TEST_F(Cli, PulsePreviewMatchesParameters) {
  Result r = run("pulse-preview --config " + toy_config() + " --dt 1 --out " + (dir_ / "o").string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto lines = data_lines(slurp(dir_ / "o" / "pulse.csv"));
  ASSERT_EQ(lines.size(), 202u);
  EXPECT_NEAR(fields(lines[1])[1], 0.25, 1e-12);
  EXPECT_NEAR(fields(lines.back())[1], 0.25, 1e-12);
  double peak = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) peak = std::max(peak, fields(lines[i])[1]);
  EXPECT_NEAR(peak, 0.25 + 0.19, 1e-9);
}

TEST_F(Cli, CalibrateThenReport) {
  std::string cfg = toy_config();
  Result c = run("calibrate --config " + cfg + " --out " + (dir_ / "cal").string());
  ASSERT_TRUE(c.code == 0 || c.code == 4) << c.out;
  json cal = dtc::parse_json_file((dir_ / "cal" / "calibration.json").string());
  EXPECT_EQ(cal["success"].get<bool>(), c.code == 0);
  EXPECT_EQ(cal["runs"].size(), 1u);
  EXPECT_EQ(cal["idle"]["source"], "config");
  auto hist = data_lines(slurp(dir_ / "cal" / "cost_history.csv"));
  ASSERT_GE(hist.size(), 2u);
  for (std::size_t i = 2; i < hist.size(); ++i) EXPECT_LE(fields(hist[i])[1], fields(hist[i - 1])[1]);

  Result r = run("fidelity-report --config " + cfg + " --pulse " + (dir_ / "cal" / "pulse.json").string() +
                 " --out " + (dir_ / "rep").string());
  ASSERT_EQ(r.code, 0) << r.out;
  json rep = dtc::parse_json_file((dir_ / "rep" / "fidelity_report.json").string());
  EXPECT_EQ(rep["fidelity"].get<double>(), cal["final"]["fidelity"].get<double>());
  EXPECT_EQ(rep["delta_phi"].get<double>(), cal["final"]["delta_phi"].get<double>());
  // The full calibration report is also accepted as a pulse file.
  Result r2 = run("fidelity-report --config " + cfg + " --pulse " + (dir_ / "cal" / "calibration.json").string() +
                  " --out " + (dir_ / "rep2").string());
  ASSERT_EQ(r2.code, 0) << r2.out;
  EXPECT_EQ(slurp(dir_ / "rep" / "fidelity_report.txt"), slurp(dir_ / "rep2" / "fidelity_report.txt"));
}

TEST_F(Cli, EvolveTraces) {
  std::string cfg = toy_config();
  Result r = run("evolve --config " + cfg + " --init 11 --out " + (dir_ / "o").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("average_fidelity"), std::string::npos);
  auto lines = data_lines(slurp(dir_ / "o" / "evolve.csv"));
  ASSERT_GT(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("t_ns,", 0), 0u);
  EXPECT_NE(lines[0].find("P11"), std::string::npos);
  auto first = fields(lines[1]);
  EXPECT_EQ(first[0], 0.0);
  EXPECT_NEAR(fields(lines.back())[0], 200.0, 1e-9);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto v = fields(lines[i]);
    EXPECT_NEAR(v.back(), 1.0, 1e-6);
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
      EXPECT_GE(v[k], -1e-12);
      EXPECT_LE(v[k], 1.0 + 1e-9);
    }
  }
  EXPECT_EQ(run("evolve --config " + cfg + " --init 02 --out " + (dir_ / "x").string()).code, 2);
}
