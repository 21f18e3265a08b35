#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace rwtrace {

// Two-sided standard normal quantile for the given confidence, e.g. 2.5758
// for 0.99.
double normal_quantile_two_sided(double confidence);

// Wilson score interval for k successes out of n at normal quantile z.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z);

// Upper tail probability of the chi-square distribution.
double chi_square_sf(double statistic, int degrees_of_freedom);

double median(std::span<const double> values);

struct BatchMeans {
  double mean = 0.0;
  double half_width = 0.0;  // confidence half-width from the batch means
  std::size_t batches = 0;
};

// Batch-means estimate of the mean of a stationary sequence, using
// n_batches equal batches and a Student-t quantile.
BatchMeans batch_means(std::span<const double> values, std::size_t n_batches = 20, double confidence = 0.95);

}  // namespace rwtrace
