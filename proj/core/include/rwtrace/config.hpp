#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rwtrace/bias_model.hpp"
#include "rwtrace/walk_engine.hpp"

namespace rwtrace {

enum class ExperimentKind { kAnalyze, kSimulate, kSweep, kTrapCensus, kSimplicity, kOracleTest };
enum class BiasFamily { kExplicit, kFigure2, kExample13, kExample15, kExample16, kConstant };

std::string to_string(ExperimentKind kind);
std::string to_string(BiasFamily family);

inline constexpr int kConfigSchema = 1;

// Flat "key = value" experiment description; see docs/config_schema.md.
// Lists are whitespace-separated; weights may be written as rationals (2/5).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kAnalyze;
  int dimension = 2;
  BiasFamily family = BiasFamily::kFigure2;
  std::map<int, BiasDistribution> explicit_biases;  // p.<i>

  double r = 1.5;
  std::vector<double> r_values{1.1, 1.25, 1.5, 1.75, 2.0, 2.25, 2.4, 2.5};

  // Example 1.3: single point for simulate, grid for analyze.
  int e13_d = 2;
  int e13_k0 = 1;
  int e13_ki = 1;
  double e13_gamma0 = 2.0;
  double e13_gammai = 1.5;
  std::vector<int> e13_dims{2, 3, 4};
  std::vector<double> e13_gammas{1.1, 1.5, 2.0, 3.0};

  std::uint64_t seed = 1;
  std::uint64_t replicas = 10;
  std::uint64_t steps = 1000000;
  std::uint64_t step_cap = 0;  // caps each level at max(step_cap, its target); 0 keeps the defaults
  std::vector<std::uint64_t> checkpoints;  // empty: steps/100, steps/10, steps
  double lookahead = 0.0;
  double truncation_tolerance = 1e-12;
  double error_budget = 1e-6;
  double burn_in = kDefaultBurnIn;
  FrontierPolicy policy = FrontierPolicy::kExtend;

  double epsilon_first = 0.0;  // 0 selects the family default
  std::size_t terms = 40;
  std::vector<double> c_values{0.5, 1.0, 2.0};

  std::size_t trap_n = 100;
  double trap_epsilon = 0.5;
  std::vector<std::int64_t> trap_heights{1, 2, 3};

  std::size_t oracle_fixtures = 20;
  std::size_t oracle_vertices = 30;
  std::uint64_t oracle_trials = 10000;
  std::size_t oracle_deletions = 100;
  bool oracle_perturb = false;

  // Throws Error(ConfigError) naming the line and field on any problem.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  // Every field, including defaults, in parseable form.
  std::string resolved() const;

  // p0, p1, ... for simulate and sweep-like commands.
  std::vector<BiasDistribution> bias_sequence() const;
  std::vector<std::uint64_t> resolved_checkpoints() const;
};

}  // namespace rwtrace
