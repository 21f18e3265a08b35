#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rwtrace/rng.hpp"
#include "rwtrace/stats.hpp"

namespace rwtrace {
namespace {

TEST(Stats, NormalQuantile) {
  EXPECT_NEAR(normal_quantile_two_sided(0.95), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile_two_sided(0.99), 2.5758293035489, 1e-10);
}

TEST(Stats, WilsonInterval) {
  auto [lo, hi] = wilson_interval(0, 100, 1.96);
  EXPECT_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 0.0370, 1e-4);
  auto [lo2, hi2] = wilson_interval(50, 100, 1.96);
  EXPECT_NEAR(lo2, 0.4038, 1e-4);
  EXPECT_NEAR(hi2, 0.5962, 1e-4);
  auto [lo3, hi3] = wilson_interval(100, 100, 1.96);
  EXPECT_NEAR(hi3, 1.0, 1e-15);
  EXPECT_LT(lo3, 1.0);
}

TEST(Stats, ChiSquareSurvival) {
  EXPECT_NEAR(chi_square_sf(3.841458820694124, 1), 0.05, 1e-12);
  EXPECT_NEAR(chi_square_sf(0.0, 3), 1.0, 1e-15);
  EXPECT_NEAR(chi_square_sf(11.344866730144373, 3), 0.01, 1e-12);
}

TEST(Stats, Median) {
  std::vector<double> odd{3, 1, 2};
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(median(odd), 2.0);
  EXPECT_EQ(median(even), 2.5);
}

TEST(Stats, BatchMeansCoversMean) {
  CounterRng rng(3);
  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> xs(2000);
    for (double& x : xs) x = rng.uniform();
    auto bm = batch_means(xs, 20, 0.95);
    EXPECT_EQ(bm.batches, 20u);
    covered += std::abs(bm.mean - 0.5) <= bm.half_width;
  }
  EXPECT_GE(covered, static_cast<int>(0.88 * trials));
}

}  // namespace
}  // namespace rwtrace
