#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rwtrace/experiments.hpp"

namespace rwtrace {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("rwtrace_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Analyze, Figure2CriticalValue) {
  auto cfg = ExperimentConfig::parse("schema = 1\nkind = analyze\n");
  auto res = run_analyze(cfg);
  ASSERT_TRUE(res.critical_r.has_value());
  EXPECT_NEAR(*res.critical_r, 2.0, 1e-9);
  EXPECT_NEAR(*res.critical_t, std::log(2.0), 1e-10);
  ASSERT_EQ(res.records.size(), cfg.r_values.size());
  for (const auto& rec : res.records) {
    EXPECT_NEAR(rec.report.t, std::log(2.0), 1e-10);
    EXPECT_EQ(rec.report.phase, rec.r < 2.0 ? Phase::kBallistic : rec.r > 2.0 ? Phase::kSubBallistic : Phase::kCritical);
  }
}

TEST(Analyze, Example13Grid) {
  auto cfg = ExperimentConfig::parse("schema = 1\nkind = analyze\nfamily = example13\n");
  auto res = run_analyze(cfg);
  EXPECT_EQ(res.records.size(), (4u + 9u + 16u) * 16u);
  EXPECT_EQ(res.mismatches, 0u);
  for (const auto& rec : res.records) {
    EXPECT_NEAR(rec.report.t, rec.closed_form_t, 1e-10);
    ASSERT_TRUE(rec.expected_phase.has_value());
  }
}

TEST(Analyze, SymmetricLevelIsUndefined) {
  auto cfg = ExperimentConfig::parse(
      "schema = 1\nkind = analyze\nfamily = explicit\np.0 = 2/5 1/5 1/5 1/5\np.1 = 1/4 1/4 1/4 1/4\n");
  auto res = run_analyze(cfg);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].report.phase, Phase::kUndefined);
  EXPECT_FALSE(res.records[0].report.diagnostic.empty());
}

TEST(Sweep, RejectsSymmetricPoint) {
  auto cfg = ExperimentConfig::parse("schema = 1\nkind = sweep-r\nr_values = 1 1.5\nreplicas = 1\nsteps = 2000\n");
  auto res = run_sweep(cfg);
  ASSERT_EQ(res.rejected.size(), 1u);
  EXPECT_EQ(res.rejected[0].r, 1.0);
  EXPECT_NE(res.rejected[0].diagnostic.find("beta"), std::string::npos) << res.rejected[0].diagnostic;
  EXPECT_EQ(res.rows.size(), 3u);
}

TEST(Sweep, OutputIndependentOfJobsAndReproducibleFromManifest) {
  const std::string text =
      "schema = 1\nkind = sweep-r\nr_values = 1.5 2.4\nreplicas = 3\nsteps = 20000\nseed = 5\n";
  auto cfg = ExperimentConfig::parse(text);
  auto a = scratch("sweep_a"), b = scratch("sweep_b"), c = scratch("sweep_c");
  ASSERT_EQ(cmd_sweep_r(cfg, a, 1).exit_code, kExitOk);
  ASSERT_EQ(cmd_sweep_r(cfg, b, 3).exit_code, kExitOk);
  for (const char* f : {"config.resolved.txt", "seeds.txt", "data.csv", "summary.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(slurp(a / "data.csv"), slurp(b / "data.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  EXPECT_EQ(slurp(a / "data.csv").rfind("# rwtrace schema=1", 0), 0u);
  auto replay = ExperimentConfig::load(a / "config.resolved.txt");
  ASSERT_EQ(cmd_sweep_r(replay, c, 2).exit_code, kExitOk);
  EXPECT_EQ(slurp(a / "data.csv"), slurp(c / "data.csv"));
  EXPECT_EQ(slurp(a / "seeds.txt"), slurp(c / "seeds.txt"));
}

TEST(Simulate, BudgetExhaustionExitCode) {
  auto cfg = ExperimentConfig::parse("schema = 1\nkind = simulate\nreplicas = 2\nsteps = 50000\nstep_cap = 3000\n");
  auto dir = scratch("budget");
  auto out = cmd_simulate(cfg, dir, 1);
  EXPECT_EQ(out.exit_code, kExitBudget) << out.message;
  EXPECT_TRUE(fs::exists(dir / "data.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Simulate, RowsAndNesting) {
  auto cfg = ExperimentConfig::parse("schema = 1\nkind = simulate\nreplicas = 2\nsteps = 30000\n");
  auto res = run_simulate(cfg, 2);
  ASSERT_EQ(res.replicas.size(), 2u);
  ASSERT_EQ(res.rows.size(), 4u);
  for (const auto& row : res.rows) {
    EXPECT_TRUE(row.nested_in_parent);
    if (row.level == 1) EXPECT_EQ(row.steps, 30000u);
  }
  for (const auto& rep : res.replicas) {
    EXPECT_EQ(rep.status, RunStatus::kComplete);
    EXPECT_EQ(rep.frontier_violations, 0u);
  }
}

TEST(Simplicity, Verdicts) {
  auto constant = run_simplicity(ExperimentConfig::parse("schema = 1\nkind = simplicity\nfamily = constant\n"));
  EXPECT_EQ(constant.verdict.rfind("(a) applies: simple path a.s.", 0), 0u) << constant.verdict;
  auto e15 = run_simplicity(ExperimentConfig::parse("schema = 1\nkind = simplicity\nfamily = example15\n"));
  EXPECT_EQ(e15.verdict.rfind("(b) criterion satisfied for tested c", 0), 0u) << e15.verdict;
  auto e16 = run_simplicity(ExperimentConfig::parse("schema = 1\nkind = simplicity\nfamily = example16\n"));
  EXPECT_EQ(e16.verdict.rfind("(b) criterion satisfied for tested c", 0), 0u) << e16.verdict;
  for (const auto& row : e16.rows) {
    if (row.e == Direction{1, +1}) EXPECT_EQ(row.series.trend, SeriesTrend::kSummable);
  }
}

TEST(TrapCensus, SmallRun) {
  auto cfg = ExperimentConfig::parse(
      "schema = 1\nkind = trap-census\nreplicas = 2\nsteps = 50000\ntrap.n = 20\ntrap.heights = 1 2\n");
  auto res = run_trap_census(cfg, 2);
  EXPECT_NEAR(res.t, std::log(2.0), 1e-10);
  ASSERT_EQ(res.frequency.size(), 2u);
  EXPECT_GT(res.total_blocks, 1000u);
  EXPECT_GT(res.frequency[0], res.frequency[1]);
  EXPECT_LE(res.exponent_ci_low[0], res.exponent[0]);
  ASSERT_TRUE(res.scaling.has_value());
  EXPECT_EQ(res.scaling->counts.size(), 2u);
}

TEST(OracleCommand, ExitCodes) {
  auto good = ExperimentConfig::parse("schema = 1\nkind = oracle-test\noracle.trials = 2000\n");
  EXPECT_EQ(cmd_oracle_test(good, scratch("oracle_good")).exit_code, kExitOk);
  auto bad = ExperimentConfig::parse("schema = 1\nkind = oracle-test\noracle.trials = 2000\noracle.perturb = 1\n");
  auto out = cmd_oracle_test(bad, scratch("oracle_bad"));
  EXPECT_EQ(out.exit_code, kExitOracle);
  EXPECT_NE(out.message.find("series law (fixture 0)"), std::string::npos) << out.message;
}

TEST(ParallelFor, CoversEveryTaskOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace rwtrace
