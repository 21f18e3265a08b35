#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rwtrace/errors.hpp"
#include "rwtrace/phase_criterion.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/rng.hpp"

namespace rwtrace {
namespace {

const std::vector<double> kE1{1.0, 0.0};

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kIoError;
}

std::vector<double> axis(int d, int j) {
  std::vector<double> v(d, 0.0);
  v[j] = 1.0;
  return v;
}

// Random law with positive weights and a positive drift on every axis.
BiasDistribution random_drifted(int d, CounterRng& rng) {
  std::vector<double> w(2 * d);
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    double a = 0.05 + rng.uniform(), b = 0.05 + rng.uniform();
    w[2 * j] = std::max(a, b) + 0.02;
    w[2 * j + 1] = std::min(a, b);
    s += w[2 * j] + w[2 * j + 1];
  }
  for (double& x : w) x /= s;
  return BiasDistribution(d, w);
}

TEST(Phi, AtZeroIsExactlyOne) {
  CounterRng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_drifted(2 + trial % 3, rng);
    auto l = *log_odds(p).unit;
    EXPECT_EQ(phi(p, l, 0.0), 1.0);
  }
  EXPECT_EQ(phi(presets::figure2_p0(), kE1, 0.0), 1.0);
}

TEST(Phi, Figure2ClosedForm) {
  auto p0 = presets::figure2_p0();
  for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 3.0}) {
    EXPECT_NEAR(phi(p0, kE1, t), 0.4 * std::exp(-t) + 0.2 * std::exp(t) + 0.4, 1e-14);
  }
}

TEST(Phi, DerivativeAtZeroByFiniteDifference) {
  CounterRng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_drifted(2 + trial % 3, rng);
    auto l = *log_odds(p).unit;
    const double h = 1e-6;
    double fd = (phi(p, l, h) - phi(p, l, -h)) / (2 * h);
    EXPECT_NEAR(fd, -dot(drift(p), l), 1e-6);
    EXPECT_NEAR(phi_derivative(p, l, 0.0), -dot(drift(p), l), 1e-14);
  }
}

TEST(Phi, ConvexOnGrid) {
  CounterRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_drifted(2 + trial % 3, rng);
    auto l = *log_odds(p).unit;
    double t0 = solve_root(p, l);
    const int n = 300;
    const double dt = 3 * t0 / n;
    for (int k = 1; k < n; ++k) {
      double second = phi(p, l, (k + 1) * dt) - 2 * phi(p, l, k * dt) + phi(p, l, (k - 1) * dt);
      EXPECT_GE(second, -1e-9);
    }
  }
}

TEST(SolveRoot, Figure2IsLogTwo) {
  double t = solve_root(presets::figure2_p0(), kE1);
  EXPECT_NEAR(t, std::log(2.0), 1e-10);
}

TEST(SolveRoot, RootIsUnique) {
  CounterRng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = random_drifted(2 + trial % 3, rng);
    auto l = *log_odds(p).unit;
    double t0 = solve_root(p, l);
    EXPECT_NEAR(phi(p, l, t0), 1.0, 1e-10);
    for (int k = 1; k < 100; ++k) {
      double t = t0 * k / 100.0;
      EXPECT_LT(phi(p, l, t), 1.0);
      EXPECT_GT(phi(p, l, t0 * (1.0 + k / 50.0)), 1.0);
    }
  }
}

TEST(SolveRoot, Deterministic) {
  auto p = presets::canonical(3, 2, 1.7);
  auto l = axis(3, 0);
  EXPECT_EQ(solve_root(p, l), solve_root(p, l));
}

TEST(SolveRoot, NoPositiveRoot) {
  auto p0 = presets::figure2_p0();
  EXPECT_EQ(code_of([&] { solve_root(p0, std::vector<double>{0.0, 1.0}); }), ErrorCode::kNoPositiveRoot);
  EXPECT_EQ(code_of([&] { solve_root(p0, std::vector<double>{-1.0, 0.0}); }), ErrorCode::kNoPositiveRoot);
}

TEST(Example13, ClosedFormAgreesOverGrid) {
  const std::vector<double> gammas{1.1, 1.5, 2.0, 3.0};
  int checked = 0;
  for (int d = 2; d <= 4; ++d)
    for (int k0 = 1; k0 <= d; ++k0)
      for (int ki = 1; ki <= d; ++ki)
        for (double g0 : gammas)
          for (double gi : gammas) {
            auto p0 = presets::canonical(d, k0, g0);
            auto l = *log_odds(presets::canonical(d, ki, gi)).unit;
            EXPECT_NEAR(solve_root(p0, l), example13_root(d, k0, ki, g0, gi), 1e-10)
                << d << " " << k0 << " " << ki << " " << g0 << " " << gi;
            ++checked;
          }
  EXPECT_EQ(checked, (4 + 9 + 16) * 16);
}

TEST(Example13, Figure2Coincidence) {
  EXPECT_NEAR(example13_root(2, 1, 1, 2.0, 1.5), std::log(2.0), 1e-15);
}

TEST(Example13, EqualKGivesBetaZero) {
  for (int k = 1; k <= 4; ++k)
    for (double g : {1.1, 2.0, 3.0}) {
      double t = example13_root(4, k, k, g, 1.5);
      EXPECT_NEAR(t, std::sqrt(k) * std::log(g), 1e-12);
      EXPECT_NEAR(std::exp(t), log_odds(presets::canonical(4, k, g)).beta, 1e-10);
    }
}

TEST(Example13, VanishingDrift) {
  EXPECT_LT(example13_root(2, 1, 1, 1.0 + 1e-9, 2.0), 1e-8);
}

TEST(Example13, DomainErrors) {
  EXPECT_EQ(code_of([] { example13_root(2, 3, 1, 2.0, 2.0); }), ErrorCode::kDomainError);
  EXPECT_EQ(code_of([] { example13_root(2, 1, 0, 2.0, 2.0); }), ErrorCode::kDomainError);
  EXPECT_EQ(code_of([] { example13_root(2, 1, 1, 1.0, 2.0); }), ErrorCode::kDomainError);
}

TEST(Classify, Figure2Phases) {
  auto p0 = presets::figure2_p0();
  auto rb = classify(p0, presets::figure2_p1(1.5));
  EXPECT_EQ(rb.phase, Phase::kBallistic);
  EXPECT_NEAR(rb.beta, 1.5, 1e-12);
  EXPECT_NEAR(rb.alpha, 2.0, 1e-10);
  auto rs = classify(p0, presets::figure2_p1(2.4));
  EXPECT_EQ(rs.phase, Phase::kSubBallistic);
  EXPECT_NEAR(rs.beta, 2.4, 1e-12);
  auto rc = classify(p0, presets::figure2_p1(2.0));
  EXPECT_EQ(rc.phase, Phase::kCritical);
}

TEST(Classify, Example13SimplifiedInequality) {
  for (int d = 2; d <= 4; ++d)
    for (int k0 = 1; k0 <= d; ++k0)
      for (int ki = 1; ki <= k0; ++ki)
        for (double g0 : {1.1, 1.5, 2.0, 3.0})
          for (double gi : {1.1, 1.5, 2.0, 3.0}) {
            if (g0 == gi) continue;
            auto rep = classify(presets::canonical(d, k0, g0), presets::canonical(d, ki, gi));
            EXPECT_EQ(rep.phase, gi < g0 ? Phase::kBallistic : Phase::kSubBallistic);
          }
}

TEST(Classify, ReportInvariants) {
  CounterRng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 2 + trial % 2;
    auto p0 = random_drifted(d, rng);
    auto pi = random_drifted(d, rng);
    auto rep = classify(p0, pi);
    ASSERT_EQ(rep.condition1.verdict, TransienceVerdict::kTransient);
    EXPECT_LT(rep.trap_drift_dot_direction, 0.0);
    EXPECT_NEAR(rep.lambda_value, -rep.t * rep.trap_drift_dot_direction, 1e-12);
    EXPECT_NEAR(rep.lambda_value, rep.lambda_numeric, 1e-8);
    if (rep.phase == Phase::kBallistic) EXPECT_LT(rep.beta, rep.alpha);
    if (rep.phase == Phase::kSubBallistic) EXPECT_GT(rep.beta, rep.alpha);
  }
}

TEST(Classify, SymmetricIsUndefined) {
  auto rep = classify(presets::figure2_p0(), BiasDistribution::symmetric(2));
  EXPECT_EQ(rep.phase, Phase::kUndefined);
  EXPECT_EQ(rep.condition1.verdict, TransienceVerdict::kUndefined);
  EXPECT_FALSE(rep.diagnostic.empty());
}

TEST(Classify, KeyValueRecord) {
  auto text = classify(presets::figure2_p0(), presets::figure2_p1(1.5)).to_key_values();
  EXPECT_NE(text.find("phase=Ballistic"), std::string::npos) << text;
  EXPECT_NE(text.find("alpha="), std::string::npos);
}

TEST(TrapDrift, AtZeroIsDrift) {
  auto p = presets::counterintuitive_p1();
  auto l = *log_odds(p).unit;
  auto a = trap_drift(p, l, 0.0);
  auto b = drift(p);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
}

TEST(TrapDrift, Figure2) {
  auto p0 = presets::figure2_p0();
  double t = solve_root(p0, kE1);
  auto v = trap_drift(p0, kE1, t);
  // Independent summation over the four steps.
  double e1 = 0.4 * std::exp(-t) * 1.0 + 0.2 * std::exp(t) * -1.0;
  EXPECT_NEAR(v[0], e1, 1e-12);
  EXPECT_NEAR(v[0], -0.2, 1e-10);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
  EXPECT_NEAR(v[0], -phi_derivative(p0, kE1, t), 1e-12);
}

// Coarse-to-fine grid search of the Legendre objective in two dimensions.
double brute_force_rate(const BiasDistribution& p, std::span<const double> target) {
  auto objective = [&](double x0, double x1) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i) {
      auto e = Direction::from_index(i);
      m += p.weight(i) * std::exp(e.sign * (e.axis == 0 ? x0 : x1));
    }
    return x0 * target[0] + x1 * target[1] - std::log(m);
  };
  double cx = 0.0, cy = 0.0, width = 8.0, best = objective(0, 0);
  for (int round = 0; round < 40; ++round) {
    double bx = cx, by = cy;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        double x = cx + width * i / 10.0, y = cy + width * j / 10.0;
        double v = objective(x, y);
        if (v > best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    cx = bx;
    cy = by;
    width *= 0.5;
  }
  return best;
}

TEST(RateFunction, ZeroAtDrift) {
  auto p = presets::figure2_p0();
  auto res = rate_function(p, drift(p));
  EXPECT_NEAR(res.value, 0.0, 1e-14);
}

TEST(RateFunction, MatchesClosedFormAtTrapDrift) {
  for (double r : {1.5, 2.4, 4.0}) {
    auto rep = classify(presets::figure2_p0(), presets::figure2_p1(r));
    auto res = rate_function(presets::figure2_p0(), rep.trap_drift);
    EXPECT_NEAR(res.value, -rep.t * rep.trap_drift_dot_direction, 1e-8);
    EXPECT_NEAR(res.value, brute_force_rate(presets::figure2_p0(), rep.trap_drift), 1e-7);
  }
  auto rep = classify(presets::diagonal_p0(0.1), presets::counterintuitive_p1_rotated());
  auto res = rate_function(presets::diagonal_p0(0.1), rep.trap_drift);
  EXPECT_NEAR(res.value, -rep.t * rep.trap_drift_dot_direction, 1e-8);
  EXPECT_NEAR(res.value, brute_force_rate(presets::diagonal_p0(0.1), rep.trap_drift), 1e-7);
}

TEST(RateFunction, NonNegativeAndMatchesBruteForce) {
  auto p = presets::counterintuitive_p1();
  CounterRng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> target{0.9 * (2 * rng.uniform() - 1), 0.0};
    target[1] = (1.0 - std::abs(target[0])) * 0.9 * (2 * rng.uniform() - 1);
    auto res = rate_function(p, target);
    EXPECT_GE(res.value, 0.0);
    EXPECT_NEAR(res.value, brute_force_rate(p, target), 1e-7);
  }
}

TEST(RateFunction, OutsideHull) {
  auto p = presets::figure2_p0();
  EXPECT_EQ(code_of([&] { rate_function(p, std::vector<double>{0.8, 0.3}); }), ErrorCode::kTargetOutsideHull);
  EXPECT_EQ(code_of([&] { rate_function(p, std::vector<double>{1.0, 0.0}); }), ErrorCode::kTargetOutsideHull);
}

TEST(BacktrackBound, Values) {
  auto p0 = presets::figure2_p0();
  EXPECT_EQ(backtrack_bound(p0, kE1, 0.0), 1.0);
  EXPECT_NEAR(backtrack_bound(p0, kE1, 5.0), 0.03125, 1e-12);
  EXPECT_EQ(code_of([&] { backtrack_bound(p0, std::vector<double>{0.0, 1.0}, 1.0); }), ErrorCode::kNoPositiveRoot);
}

TEST(Simplicity, Example15Summand) {
  auto p0 = presets::half_drift_p0();
  const double c = 1.0;
  for (double eps : {0.1, 0.01, 0.001}) {
    double beta = (1 + 4 * eps) / (1 - 4 * eps);
    double expected = 4 * (0.25 + eps) * std::min(1.0, (std::pow(beta, c * 0.5) - 1) * std::pow(beta, c));
    double got = simplicity_summand(presets::vanishing_bias(eps), p0, Direction{1, +1}, c);
    EXPECT_NEAR(got, expected, 1e-12 * std::max(1.0, expected));
  }
  // Asymptotic to 4 c eps.
  for (double cc : {0.5, 1.0, 2.0}) {
    double eps = 1e-6;
    EXPECT_NEAR(simplicity_summand(presets::vanishing_bias(eps), p0, Direction{1, +1}, cc) / (4 * cc * eps), 1.0,
                1e-4);
  }
}

TEST(Simplicity, Example16Bound) {
  auto p0 = presets::half_drift_p0();
  for (double eps : {0.5, 0.25, 0.1, 0.01, 0.001}) {
    for (double c : {0.5, 1.0, 2.0, 10.0}) {
      double got = simplicity_summand(presets::trap_drift_bias(eps), p0, Direction{1, +1}, c);
      EXPECT_LE(got, eps / (2 * (1 - eps)) * (1 + 1e-12));
    }
  }
}

TEST(Simplicity, VanishesAsBetaToOne) {
  auto p0 = presets::half_drift_p0();
  double prev = 1e9;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    double s = simplicity_summand(presets::vanishing_bias(eps), p0, Direction{0, -1}, 1.0);
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Simplicity, RejectsE1) {
  EXPECT_EQ(code_of([] {
              simplicity_summand(presets::vanishing_bias(0.1), presets::half_drift_p0(), Direction{0, +1}, 1.0);
            }),
            ErrorCode::kDomainError);
}

TEST(SimplicitySeries, ConstantDiverges) {
  std::vector<BiasDistribution> seq(30, presets::figure2_p1(1.5));
  auto rep = simplicity_series(seq, presets::figure2_p0(), Direction{1, +1}, 1.0, 30);
  EXPECT_EQ(rep.trend, SeriesTrend::kDivergent);
  for (double t : rep.terms) EXPECT_GT(t, 0.0);
}

TEST(SimplicitySeries, Example15Converges) {
  std::vector<BiasDistribution> seq;
  for (double eps : presets::geometric_epsilons(0.125, 40)) seq.push_back(presets::vanishing_bias(eps));
  auto rep = simplicity_series(seq, presets::half_drift_p0(), Direction{1, +1}, 1.0, 40);
  EXPECT_EQ(rep.trend, SeriesTrend::kSummable);
  EXPECT_NEAR(rep.partial_sums.back(), rep.partial_sums[29], 1e-8);
}

TEST(SimplicitySeries, EmptyTail) {
  std::vector<BiasDistribution> seq;
  auto rep = simplicity_series(seq, presets::half_drift_p0(), Direction{1, +1}, 1.0, 0);
  EXPECT_TRUE(rep.terms.empty());
  EXPECT_TRUE(rep.partial_sums.empty() || rep.partial_sums.back() == 0.0);
}

}  // namespace
}  // namespace rwtrace
