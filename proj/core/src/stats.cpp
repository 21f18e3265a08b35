#include "rwtrace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "rwtrace/errors.hpp"

namespace rwtrace {

double normal_quantile_two_sided(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorCode::kDomainError, "confidence must be in (0,1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double chi_square_sf(double statistic, int degrees_of_freedom) {
  if (degrees_of_freedom <= 0) return 1.0;
  if (!(statistic > 0.0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(degrees_of_freedom), statistic));
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kDomainError, "median of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

BatchMeans batch_means(std::span<const double> values, std::size_t n_batches, double confidence) {
  BatchMeans out;
  if (n_batches < 2 || values.size() < n_batches) {
    throw Error(ErrorCode::kDomainError, "batch means needs at least 2 batches with one value each");
  }
  const std::size_t per = values.size() / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = b * per; k < (b + 1) * per; ++k) s += values[k];
    means[b] = s / static_cast<double>(per);
  }
  double m = 0.0;
  for (double x : means) m += x;
  m /= static_cast<double>(n_batches);
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(n_batches - 1));
  const double q = boost::math::quantile(boost::math::students_t(static_cast<double>(n_batches - 1)), 0.5 + confidence / 2.0);
  out.mean = m;
  out.half_width = q * sd / std::sqrt(static_cast<double>(n_batches));
  out.batches = n_batches;
  return out;
}

}  // namespace rwtrace
