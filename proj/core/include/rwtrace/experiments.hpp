#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rwtrace/config.hpp"
#include "rwtrace/oracle_suite.hpp"
#include "rwtrace/phase_criterion.hpp"
#include "rwtrace/regeneration.hpp"
#include "rwtrace/walk_engine.hpp"

namespace rwtrace {

inline constexpr int kCsvSchema = 1;

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitOracle = 2, kExitBudget = 3 };

// Runs task(0..n-1) on up to `jobs` threads. Tasks must write only to their
// own result slot, so outputs do not depend on the thread count.
void parallel_for(std::size_t n_tasks, unsigned jobs, const std::function<void(std::size_t)>& task);

struct AnalyzeRecord {
  std::string label;
  double r = std::numeric_limits<double>::quiet_NaN();
  PhaseReport report;
  double closed_form_t = std::numeric_limits<double>::quiet_NaN();
  std::optional<Phase> expected_phase;  // from the Example 1.3 inequality
};

struct AnalyzeResult {
  std::vector<AnalyzeRecord> records;
  std::optional<double> critical_r;  // figure2 family: root of log beta(r) = t(r)
  std::optional<double> critical_t;
  std::size_t mismatches = 0;        // records whose phase disagrees with expected_phase
};

AnalyzeResult run_analyze(const ExperimentConfig& cfg);

struct SweepRow {
  double r = 0.0;
  std::uint64_t replica = 0;
  std::uint64_t steps = 0;      // checkpoint n
  double velocity_e1 = 0.0;
  double ci_half_width = 0.0;   // batch means, 95%
  double angle_degrees = 0.0;   // to delta^(0)
  RunStatus status = RunStatus::kComplete;
};

struct SweepRejection {
  double r = 0.0;
  std::string diagnostic;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepRejection> rejected;
  bool budget_exhausted = false;
  std::uint64_t frontier_violations = 0;
  // Median of v.e_1 over replicas for (r, checkpoint).
  double median_velocity(double r, std::uint64_t steps) const;
};

SweepResult run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1);

struct SimulateLevelRow {
  std::uint64_t replica = 0;
  int level = 0;
  std::uint64_t steps = 0;
  RealVector velocity;
  double speed = 0.0;
  double angle_degrees = 0.0;
  std::size_t regenerations = 0;
  std::size_t unresolved = 0;
  std::uint64_t certifications = 0;
  std::size_t trace_vertices = 0;
  bool nested_in_parent = true;
  std::size_t flagged_kernel_cells = 0;
};

struct SimulateReplica {
  std::uint64_t replica = 0;
  RunStatus status = RunStatus::kComplete;
  std::string message;
  std::uint64_t frontier_violations = 0;
  double total_error_bound = 0.0;
  std::size_t uber_levels = 0;
};

struct SimulateResult {
  std::vector<SimulateLevelRow> rows;
  std::vector<SimulateReplica> replicas;
  double lookahead = 0.0;
  double per_event_bound = 0.0;
};

SimulateResult run_simulate(const ExperimentConfig& cfg, unsigned jobs = 1);

struct TrapCensusReplica {
  std::uint64_t replica = 0;
  std::size_t blocks = 0;
  std::vector<std::size_t> traps;  // per requested height
};

struct TrapCensusResult {
  RealVector direction;
  double t = 0.0;
  double lookahead = 0.0;
  std::vector<std::int64_t> heights;
  std::vector<TrapCensusReplica> replicas;
  std::size_t total_blocks = 0;
  std::vector<std::size_t> total_traps;  // per height
  std::vector<double> frequency;
  std::vector<double> exponent;          // -log(frequency)/h
  std::vector<double> exponent_ci_low;   // from the 99% Wilson upper bound on the frequency
  std::vector<double> exponent_ci_high;
  std::optional<TrapScaling> scaling;
  std::string scaling_error;
};

TrapCensusResult run_trap_census(const ExperimentConfig& cfg, unsigned jobs = 1);

struct SimplicityRow {
  Direction e;
  double c = 0.0;
  SeriesReport series;
};

struct SimplicityResult {
  std::vector<SimplicityRow> rows;
  std::string verdict;
};

SimplicityResult run_simplicity(const ExperimentConfig& cfg);

OracleReport run_oracle(const ExperimentConfig& cfg);

struct CommandOutcome {
  int exit_code = kExitOk;
  std::string message;
};

// Each command validates, computes, and writes config.resolved.txt,
// seeds.txt, data.csv and summary.json into out_dir.
CommandOutcome cmd_analyze(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandOutcome cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs);
CommandOutcome cmd_sweep_r(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs);
CommandOutcome cmd_trap_census(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs);
CommandOutcome cmd_simplicity(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandOutcome cmd_oracle_test(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Dispatches on cfg.kind.
CommandOutcome run_command(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs);

}  // namespace rwtrace
