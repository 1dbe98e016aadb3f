#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "regmark/benchmark.hpp"

using namespace regmark;

namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.runs = 4;
  c.seed = 17;
  c.domain = {64, 64};
  c.budget = 6;
  c.candidates = 12;
  c.evaluation_points = 10;
  c.kernel.weights = {1.0, 1.0, 1.0, 1.0};
  c.ranking.enabled = true;
  c.ranking.candidates = 5;
  c.ranking.budget = 4;
  return c;
}

}  // namespace

TEST(Benchmark, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  c.threads = 1;
  const auto a = results_csv(run_benchmark(c));
  c.threads = 3;
  const auto b = results_csv(run_benchmark(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "run,strategy,iteration,metric,value");
  c.seed = 18;
  EXPECT_NE(results_csv(run_benchmark(c)), a);
}

TEST(Benchmark, CurvesShareThePrior) {
  auto c = small_config();
  c.save_fields = true;
  const auto r = run_benchmark(c);
  ASSERT_EQ(r.runs.size(), 4u);
  for (const auto& run : r.runs) {
    ASSERT_EQ(run.rmse.size(), 3u);
    const double prior = run.rmse.at("entropy").front();
    ASSERT_TRUE(run.truth.has_value());
    EXPECT_LE(prior, run.truth->max_norm() + 1e-9);
    for (const auto& [name, curve] : run.rmse) {
      EXPECT_EQ(curve.size(), c.budget + 1);
      EXPECT_EQ(curve.front(), prior) << name;
    }
    ASSERT_TRUE(run.ranking.has_value());
    EXPECT_EQ(run.ranking->true_s2.size(), 5u);
    EXPECT_NEAR(run.ranking->true_s2.front(), c.ranking.min_amplitude, 1e-9);
    EXPECT_NEAR(run.ranking->true_s2.back(), c.ranking.max_amplitude, 1e-9);
  }
}

TEST(Benchmark, BudgetZero) {
  auto c = small_config();
  c.budget = 0;
  c.ranking.enabled = false;
  const auto r = run_benchmark(c);
  for (const auto& run : r.runs)
    for (const auto& [name, curve] : run.rmse) EXPECT_EQ(curve.size(), 1u);
}

TEST(Benchmark, LearnedKernelIsUsable) {
  auto c = small_config();
  c.kernel.weights.clear();
  c.kernel.training_annotations = 20;
  const auto k = benchmark_kernel(c);
  EXPECT_NO_THROW(k.validate());
  EXPECT_EQ(k.scales.size(), KernelSpec::scales_for_extent(c.kernel.rho1, 63.0));
}

TEST(Benchmark, ConfigJson) {
  const auto c = small_config();
  const nlohmann::json j = c;
  const auto back = j.get<BenchmarkConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  nlohmann::json bad = j;
  bad["budgte"] = 3;
  try {
    bad.get<BenchmarkConfig>();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "invalid_config");
  }
  bad = j;
  bad["budget"] = 100;  // more than the candidate pool
  EXPECT_THROW(bad.get<BenchmarkConfig>(), ValidationError);
}

TEST(Benchmark, WritesOutputs) {
  auto c = small_config();
  c.runs = 2;
  c.save_fields = true;
  const auto dir = std::filesystem::temp_directory_path() / "regmark_bench_test";
  std::filesystem::remove_all(dir);
  write_benchmark_outputs(run_benchmark(c), dir);
  for (const char* f : {"results.csv", "summary.json", "kernel.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::ifstream s(dir / "summary.json");
  const auto summary = nlohmann::json::parse(s);
  EXPECT_TRUE(summary.contains("strategies"));
  EXPECT_TRUE(summary["paired_differences"].contains("entropy-heuristic"));
  EXPECT_TRUE(std::filesystem::exists(dir / "fields"));
  std::filesystem::remove_all(dir);
}
