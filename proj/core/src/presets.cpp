#include "rwtrace/presets.hpp"

#include <array>
#include <cmath>

#include "rwtrace/errors.hpp"

namespace rwtrace::presets {

BiasDistribution figure2_p0() {
  const std::array<Rational, 4> w = {{{2, 5}, {1, 5}, {1, 5}, {1, 5}}};
  return BiasDistribution::from_rationals(2, w);
}

BiasDistribution figure2_p1(double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::kDomainError, "r must be positive");
  const double z = r + 3.0;
  const double other = 1.0 / z;
  return BiasDistribution(2, {1.0 - 3.0 * other, other, other, other});
}

BiasDistribution canonical(int d, int k, double gamma) {
  if (k < 1 || k > d || !(gamma > 0.0)) throw Error(ErrorCode::kDomainError, "canonical family needs 1 <= k <= d");
  const double z = 2.0 * d + k * (gamma - 1.0);
  std::vector<double> w(static_cast<std::size_t>(2 * d), 1.0 / z);
  for (int j = 0; j < k; ++j) w[Direction{j, +1}.index()] = gamma / z;
  // Renormalise away rounding so the sum check is exact to a few ulps.
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return BiasDistribution(d, std::move(w));
}

BiasDistribution half_drift_p0() {
  const std::array<Rational, 4> w = {{{3, 5}, {1, 10}, {3, 20}, {3, 20}}};
  return BiasDistribution::from_rationals(2, w);
}

BiasDistribution vanishing_bias(double eps) {
  if (!(eps > 0.0 && eps < 0.25)) throw Error(ErrorCode::kDomainError, "eps must lie in (0, 1/4)");
  return BiasDistribution(2, {0.25 + eps, 0.25 - eps, 0.25, 0.25});
}

BiasDistribution trap_drift_bias(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::kDomainError, "eps must lie in (0, 1)");
  return BiasDistribution(2, {eps / 2.0, eps / 4.0, 1.0 - eps, eps / 4.0});
}

BiasDistribution diagonal_p0(double eps) {
  if (!(eps > 0.0 && eps < 0.25)) throw Error(ErrorCode::kDomainError, "eps must lie in (0, 1/4)");
  return BiasDistribution(2, {0.25 + eps, 0.25 - eps, 0.25 + eps, 0.25 - eps});
}

BiasDistribution counterintuitive_p1() {
  const std::array<Rational, 4> w = {{{15, 25}, {5, 25}, {1, 25}, {4, 25}}};
  return BiasDistribution::from_rationals(2, w);
}

BiasDistribution counterintuitive_p1_rotated() {
  const std::array<Rational, 4> w = {{{5, 25}, {15, 25}, {4, 25}, {1, 25}}};
  return BiasDistribution::from_rationals(2, w);
}

std::vector<double> geometric_epsilons(double first, std::size_t n) {
  std::vector<double> eps;
  eps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) eps.push_back(std::ldexp(first, -static_cast<int>(i)));
  return eps;
}

}  // namespace rwtrace::presets
