#pragma once

#include <vector>

#include "rwtrace/bias_model.hpp"

// Named bias families used by the experiments and tests.
namespace rwtrace::presets {

// Z^2, p0(e_1) = 2/5, 1/5 elsewhere.
BiasDistribution figure2_p0();
// Z^2, p(e_1) = r/(r+3), 1/(r+3) elsewhere.
BiasDistribution figure2_p1(double r);

// p(e) = (1 + (gamma-1)[e in {e_1..e_k}]) / (2d + k(gamma-1)).
BiasDistribution canonical(int d, int k, double gamma);

// Z^2 walk with drift (1/2) e_1 and all weights positive: (3/5, 1/10, 3/20, 3/20).
BiasDistribution half_drift_p0();

// p(e_1) = 1/4 + eps, p(-e_1) = 1/4 - eps, p(+-e_2) = 1/4; eps in (0, 1/4).
BiasDistribution vanishing_bias(double eps);

// p(e_1) = eps/2, p(-e_1) = eps/4, p(-e_2) = eps/4, p(e_2) = 1 - eps; eps in (0, 1).
BiasDistribution trap_drift_bias(double eps);

// Diagonal drift: p(e_1) = p(e_2) = 1/4 + eps, p(-e_1) = p(-e_2) = 1/4 - eps.
BiasDistribution diagonal_p0(double eps);
// (15, 5, 1, 4)/25: drift agrees with diagonal_p0 but the log-odds direction does not.
BiasDistribution counterintuitive_p1();
// The same weights rotated by pi: (5, 15, 4, 1)/25.
BiasDistribution counterintuitive_p1_rotated();

// eps_i = first * 2^{-(i-1)} for i = 1..n.
std::vector<double> geometric_epsilons(double first, std::size_t n);

}  // namespace rwtrace::presets
