#include <gtest/gtest.h>

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crlab/selection.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "crlab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string out_path(const std::string& name) { return (workdir() / name).string(); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CRLAB_CLI_PATH) + " " + args + " > " +
                          out_path("last_stdout.txt") + " 2> " + out_path("last_stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::vector<double> magnitudes(const std::string& csv) {
  const auto rows = read_csv(csv);
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(std::abs(std::complex<double>(std::stod(rows[i][0]), std::stod(rows[i][1]))));
  return out;
}

// CSV text without the wall_ms column.
std::string without_timing(const std::string& path) {
  std::string out;
  for (const auto& row : read_csv(path)) {
    for (std::size_t i = 0; i + 1 < row.size(); ++i) out += row[i] + ",";
    out += "\n";
  }
  return out;
}

std::string write_tiny_grid() {
  crlab::GridSpec g;
  g.input_weights = {0.1, 0.3};
  g.cycle_weights = {0.5, 0.9};
  g.jump_weights = {0.5};
  g.reservoir_sizes = {40};
  g.lambdas = {1e-8, 1e-3};
  g.leak_rates = {1.0};
  g.jump_sizes = {5};
  g.topologies_per_size = {{40, {"20-20"}}};
  g.model_kinds = {crlab::ModelKind::SCR, crlab::ModelKind::CJESN};
  const auto path = out_path("tiny_grid.json");
  std::ofstream(path) << crlab::to_json(g).dump(2);
  return path;
}

}  // namespace

TEST(CliEigen, SingleCycleCircle) {
  const auto out = out_path("eig100.csv");
  ASSERT_EQ(run_cli("eigen --topology 100 --wc 0.5 --out " + out), 0) << slurp(out_path("last_stderr.txt"));
  const auto mags = magnitudes(out);
  ASSERT_EQ(mags.size(), 100u);
  for (double m : mags) EXPECT_NEAR(m * m, 0.25, 1e-10);
  const auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  EXPECT_EQ(manifest["command"], "eigen");
  EXPECT_TRUE(manifest.contains("tool_version"));
  EXPECT_TRUE(manifest.contains("timestamp"));
}

TEST(CliEigen, TwoCyclesAndJumps) {
  const auto out = out_path("eig4060.csv");
  ASSERT_EQ(run_cli("eigen --topology 40-60 --wc 0.9,0.5 --out " + out), 0);
  int inner = 0, outer = 0;
  for (double m : magnitudes(out)) {
    if (std::abs(m - 0.9) < 1e-8) ++outer;
    else if (std::abs(m - 0.5) < 1e-8) ++inner;
  }
  EXPECT_EQ(outer, 40);
  EXPECT_EQ(inner, 60);

  const auto jumped = out_path("eig4060j.csv");
  ASSERT_EQ(run_cli("eigen --topology 40-60 --wc 0.9,0.5 --jumps --wj 0.3 --tau 5 --out " + jumped), 0);
  bool off_circle = false;
  for (double m : magnitudes(jumped)) off_circle |= std::abs(m - 0.9) > 1e-3 && std::abs(m - 0.5) > 1e-3;
  EXPECT_TRUE(off_circle);
}

TEST(CliBench, DeterministicAcrossRuns) {
  const auto a = out_path("bench_a.csv"), b = out_path("bench_b.csv");
  const std::string args = "bench --model cjESN --topology 30-20 --wj 0.5 --tau 5 --seed 3 --out ";
  ASSERT_EQ(run_cli(args + a), 0) << slurp(out_path("last_stderr.txt"));
  ASSERT_EQ(run_cli(args + b), 0);
  EXPECT_EQ(without_timing(a), without_timing(b));
  const auto rows = read_csv(a);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].size(), 11u);
  EXPECT_EQ(rows[1][0], "cjESN");
  EXPECT_LT(std::stod(rows[1][9]), 1.0);
}

TEST(CliMc, DelayColumnAndSummary) {
  const auto out = out_path("mc.csv");
  ASSERT_EQ(run_cli("mc --model SCR --topology 50 --out " + out), 0) << slurp(out_path("last_stderr.txt"));
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0][0], "k");
  for (int k = 1; k <= 200; ++k) EXPECT_EQ(std::stoi(rows[static_cast<std::size_t>(k)][0]), k);
  const auto summary = nlohmann::json::parse(slurp(out + ".summary.json"));
  const double total = summary["total_mc"];
  EXPECT_GT(total, 10.0);
  EXPECT_LE(total, 52.0);
}

TEST(CliMc, NegligibleInputCouplingGivesNoMemory) {
  const auto out = out_path("mc_zero.csv");
  ASSERT_EQ(run_cli("mc --model SCR --topology 100 --input-scale 1e-200 --out " + out), 0)
      << slurp(out_path("last_stderr.txt"));
  const double total = nlohmann::json::parse(slurp(out + ".summary.json"))["total_mc"];
  EXPECT_LE(total, 2.0);
}

TEST(CliGrid, WorkersAndReplayReproduce) {
  const auto grid = write_tiny_grid();
  const auto one = out_path("grid1.csv"), eight = out_path("grid8.csv"), again = out_path("grid_replay.csv");
  ASSERT_EQ(run_cli("grid --grid " + grid + " --workers 1 --out " + one), 0) << slurp(out_path("last_stderr.txt"));
  ASSERT_EQ(run_cli("grid --grid " + grid + " --workers 8 --out " + eight), 0);
  EXPECT_EQ(without_timing(one), without_timing(eight));
  EXPECT_EQ(read_csv(one).size(), 1u + 2 * 2 * 2 + 2 * 2 * 2);
  ASSERT_EQ(run_cli("replay " + one + ".manifest.json --out " + again), 0) << slurp(out_path("last_stderr.txt"));
  EXPECT_EQ(without_timing(one), without_timing(again));
  const auto best = nlohmann::json::parse(slurp(one + ".best.json"));
  EXPECT_TRUE(best.contains("valid_err"));
}

TEST(CliErrors, NonzeroExitWithMessage) {
  EXPECT_NE(run_cli("eigen --topology 10-x --out " + out_path("bad.csv")), 0);
  EXPECT_NE(slurp(out_path("last_stderr.txt")).find("crlab: error:"), std::string::npos);
  EXPECT_FALSE(fs::exists(out_path("bad.csv")));
  EXPECT_NE(run_cli("bench --model LSTM --out " + out_path("bad2.csv")), 0);
  EXPECT_NE(run_cli("bench --task file --out " + out_path("bad3.csv")), 0);
  EXPECT_NE(slurp(out_path("last_stderr.txt")).find("--data"), std::string::npos);
  EXPECT_NE(run_cli("grid --out " + out_path("bad4.csv")), 0);
  EXPECT_NE(run_cli("replay " + out_path("missing.json")), 0);
  EXPECT_NE(run_cli("eigen"), 0);
}
