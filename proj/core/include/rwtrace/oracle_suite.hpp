#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwtrace/bias_model.hpp"
#include "rwtrace/resistance_oracle.hpp"
#include "rwtrace/trace_graph.hpp"

namespace rwtrace {

// Trace of a p-walk from the origin, stopped once it has max_vertices
// vertices (or after max_steps). Deterministic in key.
TraceGraph random_trace_fixture(const BiasDistribution& p, std::size_t max_vertices, std::uint64_t key,
                                std::size_t max_steps = 1000000);

struct OracleCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  std::size_t flagged_kernel_cells = 0;

  bool passed() const;
  std::size_t failures() const;
};

struct OracleSuiteOptions {
  std::size_t fixtures = 20;          // hit_before fixtures
  std::size_t vertices = 30;          // vertices per hit_before fixture (<= 50)
  std::uint64_t trials = 10000;       // Monte Carlo walks per fixture
  std::size_t deletions = 100;        // Rayleigh edge deletions
  bool perturb = false;               // negative control: corrupt one series fixture
  std::uint64_t seed = 1;             // drives the Monte Carlo draws only
  std::uint64_t kernel_steps = 100000;
};

// Exact network identities and their cross-checks: hit_before against
// simulation of the restricted kernel, series/parallel laws, Rayleigh
// monotonicity, triangle inequality, never-return brackets against the
// birth-death formula, and kernel goodness of fit (reported, not failed).
OracleReport run_oracle_suite(const OracleSuiteOptions& options);

}  // namespace rwtrace
