#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gle/pipeline.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using gle::io::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("gle_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json reference_config() {
  return json::parse(R"({
    "model": {"n": 2, "kBT": 1.0, "A": [[2, -1], [-1, 2]], "Gamma": [[1, 0], [0, 1]]},
    "basis": {"type": "explicit", "phi": [[1], [0]]},
    "orders": [0, 1, 2],
    "grid": {"t1": 5.0, "steps": 100},
    "sim": {"dt": 0.02, "steps": 20000, "seed": 3, "ensemble": 4, "record_stride": 5, "max_lag": 10},
    "bench": {"steps": [100, 200], "order": 1}
  })");
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GLE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Parse, OrderList) {
  EXPECT_EQ(gle::parse_order_list("0-3"), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(gle::parse_order_list("2,0,2"), (std::vector<int>{0, 2}));
  EXPECT_THROW(gle::parse_order_list("a"), gle::InvalidInput);
  EXPECT_THROW(gle::parse_order_list(""), gle::InvalidInput);
}

TEST(Parse, Grid) {
  const auto g = gle::parse_grid("0:2:4");
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
  EXPECT_THROW(gle::parse_grid("1:2:4"), gle::InvalidInput);
  EXPECT_THROW(gle::parse_grid("0-2-4"), gle::InvalidInput);
}

TEST(Config, OverridesAndHashes) {
  const json j = reference_config();
  const auto a = gle::config_from_json(j, ".");
  EXPECT_EQ(a.orders, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(a.grid.size(), 101u);
  EXPECT_EQ(a.basis_kind, "explicit");
  gle::ConfigOverrides ov;
  ov.seed = 77;
  ov.orders = std::vector<int>{1};
  const auto b = gle::config_from_json(j, ".", ov);
  EXPECT_EQ(b.sim.seed, 77u);
  EXPECT_EQ(b.orders, (std::vector<int>{1}));
  EXPECT_EQ(a.model_hash, b.model_hash);
  EXPECT_NE(a.config_hash, b.config_hash);
}

TEST(Config, RejectsInvalidModel) {
  json j = reference_config();
  j["model"]["A"] = json::parse("[[2, -1], [0, 2]]");
  EXPECT_THROW(gle::config_from_json(j, "."), gle::InvalidInput);
  j = reference_config();
  j["basis"] = json::parse(R"({"type": "spline"})");
  EXPECT_THROW(gle::config_from_json(j, "."), gle::InvalidInput);
}

TEST(Reduction, ReferenceRunAndRejectedOrder) {
  json j = reference_config();
  j["orders"] = {0, 1, 2, 3};
  const auto run = gle::run_reduction(gle::config_from_json(j, "."));
  EXPECT_EQ(run.fits.size(), 3u);
  ASSERT_EQ(run.failures.count(3), 1u);  // the exact kernel is second order
  EXPECT_EQ(run.failures.at(3).code, gle::ExitCode::fitting);
  EXPECT_NEAR(run.t_star, 0.5 / std::sqrt(2.0), 1e-14);
}

TEST(Vacf, ErrorsShrinkToExactAtOrderTwo) {
  const auto v = gle::run_vacf(gle::config_from_json(reference_config(), "."));
  ASSERT_EQ(v.rows.size(), 3u);
  EXPECT_GT(v.rows[0].l2_full, v.rows[1].l2_full);
  EXPECT_LT(v.rows[2].l2_full, 1e-10);
  EXPECT_LT(v.rows[2].kernel_l2_tstar, 1e-12);
}

TEST(Cli, ReduceWritesArtifacts) {
  const fs::path dir = scratch("reduce");
  const fs::path cfg = write_config(dir, reference_config());
  ASSERT_EQ(run_cli("reduce --config " + cfg.string() + " --out " + (dir / "out").string()), 0);
  for (const char* f : {"blocks.json", "moments.json", "reduced_order0.json", "reduced_order1.json",
                        "reduced_order2.json", "fit_report.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const json r1 = json::parse(slurp(dir / "out" / "reduced_order1.json"));
  const gle::ReducedModel back = gle::io::reduced_from_json(r1);
  EXPECT_NEAR(back.b[0](0, 0), -2.0, 1e-12);
  EXPECT_NEAR(back.c[0](0, 0), 0.5, 1e-12);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  const fs::path cfg = write_config(dir, reference_config());
  EXPECT_EQ(run_cli("reduce"), 2);
  EXPECT_EQ(run_cli("reduce --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("reduce --config " + cfg.string() + " --order x"), 2);

  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli("reduce --config " + (dir / "broken.json").string()), 1);

  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("reduce --config " + cfg.string() + out + " --order 3"), 3);
  EXPECT_EQ(run_cli("reduce --config " + cfg.string() + out + " --order 0-3 --allow-partial"), 0);

  json j = reference_config();
  j["model"]["Gamma"] = json::parse("[[1, 0], [0, 0]]");  // undamped complement: kernel never decays
  const fs::path undamped = dir / "undamped";
  fs::create_directories(undamped);
  EXPECT_EQ(run_cli("reduce --config " + write_config(undamped, j).string() + out), 4);
}

TEST(Cli, SimulateIsDeterministicPerSeed) {
  const fs::path dir = scratch("sim");
  const fs::path cfg = write_config(dir, reference_config());
  const std::string base = "simulate --config " + cfg.string() + " --order 1";
  ASSERT_EQ(run_cli(base + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(base + " --out " + (dir / "b").string()), 0);
  ASSERT_EQ(run_cli(base + " --seed 4 --out " + (dir / "c").string()), 0);
  const std::string ta = slurp(dir / "a" / "traj_order1_member0.csv");
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(dir / "b" / "traj_order1_member0.csv"));
  EXPECT_NE(ta, slurp(dir / "c" / "traj_order1_member0.csv"));
  const json rep = json::parse(slurp(dir / "a" / "simulate_report.json"));
  EXPECT_EQ(rep["results"][0]["label"], "order1");
  EXPECT_TRUE(fs::exists(dir / "a" / "autocorr_order1.csv"));
}

TEST(Cli, VacfAndBench) {
  const fs::path dir = scratch("vacf");
  const fs::path cfg = write_config(dir, reference_config());
  ASSERT_EQ(run_cli("vacf --config " + cfg.string() + " --grid 0:4:40 --out " + (dir / "out").string()), 0);
  for (const char* f : {"vacf_exact.csv", "vacf_order0.csv", "vacf_order2.csv", "kernel_exact.csv",
                        "kernel_order1.csv", "vacf_summary.json", "vacf_summary.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const std::string exact = slurp(dir / "out" / "vacf_exact.csv");
  EXPECT_EQ(std::count(exact.begin(), exact.end(), '\n'), 42);  // header + 41 rows
  ASSERT_EQ(run_cli("bench --config " + cfg.string() + " --out " + (dir / "bench").string()), 0);
  const json b = json::parse(slurp(dir / "bench" / "bench.json"));
  EXPECT_EQ(b["rows"].size(), 2u);
}
