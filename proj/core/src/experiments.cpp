#include "rwtrace/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"
#include "rwtrace/stats.hpp"

namespace rwtrace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void apply_step_cap(SimulationConfig& sc, std::uint64_t cap) {
  if (cap == 0) return;
  sc.step_caps = resolve_step_caps(sc);
  for (std::size_t i = 0; i < sc.step_caps.size(); ++i) {
    sc.step_caps[i] = std::max(std::min(sc.step_caps[i], cap), sc.step_targets[i]);
  }
}

RealVector first_axis(int dim) {
  RealVector e(static_cast<std::size_t>(dim), 0.0);
  e[0] = 1.0;
  return e;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream o;
  o << "0x" << std::hex << v;
  return o.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

class Csv {
 public:
  Csv(const std::string& table, const std::vector<std::string>& columns) {
    out_ << "# rwtrace schema=" << kCsvSchema << " table=" << table << "\n";
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

std::string seed_manifest(const ExperimentConfig& cfg, std::size_t levels, std::uint64_t replicas) {
  std::ostringstream o;
  o << "# stream key = derive_stream_key(master_seed, level, replica); generator Philox4x32-10\n";
  o << "master_seed = " << cfg.seed << "\n";
  for (std::uint64_t r = 0; r < replicas; ++r) {
    for (std::size_t l = 0; l < levels; ++l) {
      o << "stream level=" << l << " replica=" << r << " key=" << hex(derive_stream_key(cfg.seed, l, r)) << "\n";
    }
  }
  return o.str();
}

void write_outputs(const fs::path& dir, const ExperimentConfig& cfg, const std::string& seeds, const std::string& csv,
                   const json& summary) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "config.resolved.txt", cfg.resolved());
  write_file(dir / "seeds.txt", seeds);
  write_file(dir / "data.csv", csv);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

Phase expected_example13_phase(int k0, int ki, double g0, double gi) {
  const double lhs = ki * (gi - 1.0);
  const double rhs = std::min(ki, k0) * (g0 - 1.0);
  if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs)) return Phase::kCritical;
  return lhs < rhs ? Phase::kBallistic : Phase::kSubBallistic;
}

std::string direction_label(Direction e) { return to_string(e); }

template <class F>
CommandOutcome guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kBudgetExhausted: return {kExitBudget, e.what()};
      case ErrorCode::kIoError:
      case ErrorCode::kConfigError:
      default: return {kExitValidation, e.what()};
    }
  }
}

}  // namespace

void parallel_for(std::size_t n_tasks, unsigned jobs, const std::function<void(std::size_t)>& task) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (std::size_t k = 0; k < n_tasks; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < n_tasks; k = next++) {
      try {
        task(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(n_tasks));
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// analyze

AnalyzeResult run_analyze(const ExperimentConfig& cfg) {
  AnalyzeResult res;
  switch (cfg.family) {
    case BiasFamily::kFigure2: {
      const BiasDistribution p0 = presets::figure2_p0();
      for (double r : cfg.r_values) {
        AnalyzeRecord rec;
        rec.label = "figure2 r=" + fmt(r);
        rec.r = r;
        rec.report = classify(p0, presets::figure2_p1(r));
        res.records.push_back(std::move(rec));
      }
      // beta(r) = r exceeds alpha exactly when log r > t(r); ell = e_1 for all r > 1.
      auto gap = [&](double r) {
        const LogOddsDirection lo = log_odds(presets::figure2_p1(r));
        return std::log(lo.beta) - solve_root(p0, *lo.unit);
      };
      double lo = 1.0 + 1e-9, hi = 1e6;
      if (gap(lo) < 0.0 && gap(hi) > 0.0) {
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (gap(mid) < 0.0 ? lo : hi) = mid;
        }
        res.critical_r = 0.5 * (lo + hi);
        res.critical_t = solve_root(p0, *log_odds(presets::figure2_p1(*res.critical_r)).unit);
      }
      break;
    }
    case BiasFamily::kExample13: {
      for (int d : cfg.e13_dims) {
        for (int k0 = 1; k0 <= d; ++k0) {
          for (int ki = 1; ki <= d; ++ki) {
            for (double g0 : cfg.e13_gammas) {
              for (double gi : cfg.e13_gammas) {
                AnalyzeRecord rec;
                rec.label = "example13 d=" + std::to_string(d) + " k0=" + std::to_string(k0) + " ki=" +
                            std::to_string(ki) + " g0=" + fmt(g0) + " gi=" + fmt(gi);
                rec.report = classify(presets::canonical(d, k0, g0), presets::canonical(d, ki, gi));
                rec.closed_form_t = example13_root(d, k0, ki, g0, gi);
                rec.expected_phase = expected_example13_phase(k0, ki, g0, gi);
                if (rec.report.phase != *rec.expected_phase) ++res.mismatches;
                res.records.push_back(std::move(rec));
              }
            }
          }
        }
      }
      break;
    }
    default: {
      const std::vector<BiasDistribution> seq = cfg.bias_sequence();
      for (std::size_t i = 1; i < seq.size(); ++i) {
        AnalyzeRecord rec;
        rec.label = to_string(cfg.family) + " p." + std::to_string(i);
        rec.report = classify(seq[0], seq[i]);
        res.records.push_back(std::move(rec));
      }
    }
  }
  return res;
}

CommandOutcome cmd_analyze(const ExperimentConfig& cfg, const fs::path& out_dir) {
  return guarded([&]() -> CommandOutcome {
    const AnalyzeResult res = run_analyze(cfg);
    Csv csv("analyze", {"label", "r", "beta", "t", "alpha", "phase", "condition1", "drift0_dot_direction",
                        "trap_drift_dot_direction", "lambda", "lambda_numeric", "closed_form_t", "expected_phase",
                        "diagnostic"});
    json records = json::array();
    std::map<std::string, int> phase_counts;
    for (const auto& rec : res.records) {
      const PhaseReport& p = rec.report;
      const std::string expected = rec.expected_phase ? to_string(*rec.expected_phase) : "";
      csv.row({rec.label, fmt(rec.r), fmt(p.beta), fmt(p.t), fmt(p.alpha), to_string(p.phase),
               to_string(p.condition1.verdict), fmt(p.condition1.drift_dot_direction), fmt(p.trap_drift_dot_direction),
               fmt(p.lambda_value), fmt(p.lambda_numeric), fmt(rec.closed_form_t), expected,
               "\"" + p.diagnostic + "\""});
      ++phase_counts[to_string(p.phase)];
      records.push_back({{"label", rec.label},
                         {"delta0", vector_json(p.drift0)},
                         {"delta", vector_json(p.drift)},
                         {"ell", vector_json(p.direction)},
                         {"beta", number_or_null(p.beta)},
                         {"t", number_or_null(p.t)},
                         {"alpha", number_or_null(p.alpha)},
                         {"phase", to_string(p.phase)},
                         {"condition1", to_string(p.condition1.verdict)},
                         {"diagnostic", p.diagnostic}});
    }
    json summary{{"schema", kCsvSchema},
                 {"kind", "analyze"},
                 {"family", to_string(cfg.family)},
                 {"records", records.size()},
                 {"phase_counts", phase_counts},
                 {"expected_phase_mismatches", res.mismatches}};
    if (res.critical_r) {
      summary["critical_r"] = *res.critical_r;
      summary["critical_t"] = *res.critical_t;
      summary["critical_alpha"] = std::exp(*res.critical_t);
    }
    summary["per_record"] = records;
    write_outputs(out_dir, cfg, seed_manifest(cfg, 0, 0), csv.str(), summary);
    std::string msg = std::to_string(res.records.size()) + " records";
    if (res.critical_r) msg += "; critical r = " + fmt(*res.critical_r) + " (alpha = " + fmt(std::exp(*res.critical_t)) + ")";
    if (res.mismatches) return {kExitOracle, msg + "; " + std::to_string(res.mismatches) + " phase mismatches"};
    return {kExitOk, msg};
  });
}

// ---------------------------------------------------------------------------
// sweep-r

double SweepResult::median_velocity(double r, std::uint64_t steps) const {
  std::vector<double> v;
  for (const auto& row : rows) {
    if (row.r == r && row.steps == steps) v.push_back(row.velocity_e1);
  }
  return median(v);
}

SweepResult run_sweep(const ExperimentConfig& cfg, unsigned jobs) {
  if (cfg.family != BiasFamily::kFigure2) {
    throw Error(ErrorCode::kConfigError, "field 'family': sweep-r uses the figure2 family");
  }
  SweepResult res;
  const BiasDistribution p0 = presets::figure2_p0();
  const RealVector delta0 = drift(p0);
  std::vector<double> accepted;
  for (double r : cfg.r_values) {
    const PhaseReport rep = classify(p0, presets::figure2_p1(r));
    if (rep.condition1.verdict != TransienceVerdict::kTransient) {
      res.rejected.push_back({r, "Condition 1 fails (beta = " + fmt(rep.beta) + "): " + rep.diagnostic});
    } else {
      accepted.push_back(r);
    }
  }
  const std::vector<std::uint64_t> checkpoints = cfg.resolved_checkpoints();
  const std::size_t n_tasks = accepted.size() * cfg.replicas;
  std::vector<std::vector<SweepRow>> out(n_tasks);
  std::vector<std::uint64_t> violations(n_tasks, 0);
  parallel_for(n_tasks, jobs, [&](std::size_t task) {
    const double r = accepted[task / cfg.replicas];
    const std::uint64_t replica = task % cfg.replicas;
    SimulationConfig sc;
    sc.dimension = 2;
    sc.biases = {p0, presets::figure2_p1(r)};
    sc.step_targets = {0, cfg.steps};
    sc.lookahead = cfg.lookahead;
    sc.truncation_tolerance = cfg.truncation_tolerance;
    sc.total_error_budget = cfg.error_budget;
    sc.master_seed = cfg.seed;
    sc.replica = replica;
    sc.policy = cfg.policy;
    apply_step_cap(sc, cfg.step_cap);
    const NestedRun run = nested_simulate(sc);
    violations[task] = run.frontier_violations;
    const WalkPath& path = run.levels[1].path;
    for (std::uint64_t n : checkpoints) {
      SweepRow row;
      row.r = r;
      row.replica = replica;
      row.steps = n;
      row.status = run.status;
      if (path.steps() < n) {
        row.velocity_e1 = std::numeric_limits<double>::quiet_NaN();
        row.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        row.angle_degrees = std::numeric_limits<double>::quiet_NaN();
        out[task].push_back(row);
        continue;
      }
      const VelocityEstimate est = velocity_estimate(path, cfg.burn_in, delta0, n);
      row.velocity_e1 = est.velocity[0];
      row.angle_degrees = est.angle_degrees;
      const std::size_t len = est.to - est.from;
      if (len >= 40) {
        std::vector<double> inc(len);
        for (std::size_t k = 0; k < len; ++k) {
          inc[k] = static_cast<double>(path.coord(est.from + k + 1, 0) - path.coord(est.from + k, 0));
        }
        row.ci_half_width = batch_means(inc).half_width;
      } else {
        row.ci_half_width = std::numeric_limits<double>::quiet_NaN();
      }
      out[task].push_back(row);
    }
  });
  for (std::size_t t = 0; t < n_tasks; ++t) {
    for (const auto& row : out[t]) {
      res.budget_exhausted = res.budget_exhausted || row.status == RunStatus::kBudgetExhausted;
      res.rows.push_back(row);
    }
    res.frontier_violations += violations[t];
  }
  return res;
}

CommandOutcome cmd_sweep_r(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  return guarded([&]() -> CommandOutcome {
    const SweepResult res = run_sweep(cfg, jobs);
    Csv csv("sweep-r", {"r", "replica", "steps", "v_e1", "ci_half_width", "angle_deg", "status"});
    for (const auto& row : res.rows) {
      csv.row({fmt(row.r), std::to_string(row.replica), std::to_string(row.steps), fmt(row.velocity_e1),
               fmt(row.ci_half_width), fmt(row.angle_degrees), to_string(row.status)});
    }
    json points = json::array();
    std::vector<double> rs;
    for (const auto& row : res.rows) {
      if (std::find(rs.begin(), rs.end(), row.r) == rs.end()) rs.push_back(row.r);
    }
    for (double r : rs) {
      json medians = json::object();
      std::vector<double> seq;
      for (std::uint64_t n : cfg.resolved_checkpoints()) {
        const double m = res.median_velocity(r, n);
        medians[std::to_string(n)] = number_or_null(m);
        seq.push_back(m);
      }
      bool decreasing = true;
      for (std::size_t k = 1; k < seq.size(); ++k) decreasing = decreasing && seq[k] < seq[k - 1];
      const PhaseReport rep = classify(presets::figure2_p0(), presets::figure2_p1(r));
      points.push_back({{"r", r},
                        {"predicted_phase", to_string(rep.phase)},
                        {"median_v_e1", medians},
                        {"median_decreasing_in_n", decreasing}});
    }
    json rejected = json::array();
    for (const auto& rj : res.rejected) rejected.push_back({{"r", rj.r}, {"diagnostic", rj.diagnostic}});
    json summary{{"schema", kCsvSchema},
                 {"kind", "sweep-r"},
                 {"steps", cfg.steps},
                 {"replicas", cfg.replicas},
                 {"burn_in", cfg.burn_in},
                 {"points", points},
                 {"rejected", rejected},
                 {"frontier_violations", res.frontier_violations},
                 {"budget_exhausted", res.budget_exhausted},
                 {"note", "trend diagnostics only: velocity decay in n is reported, the critical point is not located empirically"}};
    write_outputs(out_dir, cfg, seed_manifest(cfg, 2, cfg.replicas), csv.str(), summary);
    std::string msg = std::to_string(res.rows.size()) + " rows";
    for (const auto& rj : res.rejected) msg += "; rejected r=" + fmt(rj.r) + ": " + rj.diagnostic;
    if (res.frontier_violations) return {kExitOracle, msg + "; frontier audit failed"};
    if (res.budget_exhausted) return {kExitBudget, msg + "; step budget exhausted"};
    return {kExitOk, msg};
  });
}

// ---------------------------------------------------------------------------
// simulate

SimulateResult run_simulate(const ExperimentConfig& cfg, unsigned jobs) {
  const std::vector<BiasDistribution> seq = cfg.bias_sequence();
  if (seq.size() < 2) throw Error(ErrorCode::kConfigError, "simulate needs at least two levels");
  const RealVector delta0 = drift(seq[0]);
  SimulationConfig sc;
  sc.dimension = seq[0].dimension();
  sc.biases = seq;
  sc.step_targets.assign(seq.size(), 0);
  sc.step_targets.back() = cfg.steps;
  sc.lookahead = cfg.lookahead;
  sc.truncation_tolerance = cfg.truncation_tolerance;
  sc.total_error_budget = cfg.error_budget;
  sc.master_seed = cfg.seed;
  sc.policy = cfg.policy;
  apply_step_cap(sc, cfg.step_cap);
  SimulateResult res;
  res.lookahead = resolve_lookahead(sc);
  res.per_event_bound = std::exp(-solve_root(seq[0], first_axis(sc.dimension)) * res.lookahead);
  std::vector<std::vector<SimulateLevelRow>> rows(cfg.replicas);
  std::vector<SimulateReplica> reps(cfg.replicas);
  parallel_for(cfg.replicas, jobs, [&](std::size_t r) {
    SimulationConfig mine = sc;
    mine.replica = r;
    const NestedRun run = nested_simulate(mine);
    SimulateReplica& rep = reps[r];
    rep.replica = r;
    rep.status = run.status;
    rep.message = run.message;
    rep.frontier_violations = run.frontier_violations;
    rep.total_error_bound = run.total_error_bound;
    std::vector<RegenerationRecord> records;
    std::vector<WalkPath> paths;
    for (std::size_t i = 0; i < run.levels.size(); ++i) {
      const LevelRun& lr = run.levels[i];
      SimulateLevelRow row;
      row.replica = r;
      row.level = static_cast<int>(i);
      row.steps = lr.path.steps();
      if (lr.path.steps() >= 2) {
        const VelocityEstimate est = velocity_estimate(lr.path, cfg.burn_in, delta0);
        row.velocity = est.velocity;
        row.speed = est.speed;
        row.angle_degrees = est.angle_degrees;
      } else {
        row.velocity.assign(static_cast<std::size_t>(sc.dimension), 0.0);
        row.angle_degrees = std::numeric_limits<double>::quiet_NaN();
      }
      row.regenerations = lr.regenerations.times.size();
      row.unresolved = lr.regenerations.unresolved.size();
      row.certifications = lr.certifications;
      row.trace_vertices = lr.trace.vertex_count();
      const TraceGraph* env = i == 0 ? nullptr : &run.levels[i - 1].trace;
      row.nested_in_parent = env == nullptr || lr.trace.is_subgraph_of(*env);
      for (const KernelCell& c : kernel_goodness_of_fit(seq[i], env, lr.path)) row.flagged_kernel_cells += c.flagged;
      rows[r].push_back(row);
      records.push_back(lr.regenerations);
      paths.push_back(lr.path);
    }
    rep.uber_levels = uber_levels(records, paths).levels.size();
  });
  for (auto& v : rows) res.rows.insert(res.rows.end(), v.begin(), v.end());
  res.replicas = std::move(reps);
  return res;
}

CommandOutcome cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  return guarded([&]() -> CommandOutcome {
    const SimulateResult res = run_simulate(cfg, jobs);
    const int d = cfg.bias_sequence().front().dimension();
    std::vector<std::string> cols{"replica", "level", "steps"};
    for (int j = 0; j < d; ++j) cols.push_back("v" + std::to_string(j + 1));
    for (const char* c : {"speed", "angle_deg", "regenerations", "unresolved", "certifications", "trace_vertices",
                          "nested_in_parent", "flagged_kernel_cells"}) {
      cols.emplace_back(c);
    }
    Csv csv("simulate", cols);
    bool nested = true;
    for (const auto& row : res.rows) {
      std::vector<std::string> cells{std::to_string(row.replica), std::to_string(row.level), std::to_string(row.steps)};
      for (double v : row.velocity) cells.push_back(fmt(v));
      for (const std::string& s :
           {fmt(row.speed), fmt(row.angle_degrees), std::to_string(row.regenerations), std::to_string(row.unresolved),
            std::to_string(row.certifications), std::to_string(row.trace_vertices),
            std::string(row.nested_in_parent ? "1" : "0"), std::to_string(row.flagged_kernel_cells)}) {
        cells.push_back(s);
      }
      csv.row(cells);
      nested = nested && row.nested_in_parent;
    }
    json reps = json::array();
    bool budget = false;
    std::uint64_t violations = 0;
    for (const auto& r : res.replicas) {
      budget = budget || r.status == RunStatus::kBudgetExhausted;
      violations += r.frontier_violations;
      reps.push_back({{"replica", r.replica},
                      {"status", to_string(r.status)},
                      {"message", r.message},
                      {"frontier_violations", r.frontier_violations},
                      {"total_error_bound", r.total_error_bound},
                      {"uber_levels", r.uber_levels}});
    }
    json summary{{"schema", kCsvSchema},         {"kind", "simulate"},
                 {"family", to_string(cfg.family)}, {"levels", cfg.bias_sequence().size()},
                 {"steps", cfg.steps},           {"lookahead", res.lookahead},
                 {"per_event_bound", res.per_event_bound}, {"nesting_ok", nested},
                 {"replicas", reps}};
    write_outputs(out_dir, cfg, seed_manifest(cfg, cfg.bias_sequence().size(), cfg.replicas), csv.str(), summary);
    const std::string msg = std::to_string(res.replicas.size()) + " replicas simulated";
    if (!nested || violations) return {kExitOracle, msg + "; nesting or frontier audit failed"};
    if (budget) return {kExitBudget, msg + "; step budget exhausted (partial results written)"};
    return {kExitOk, msg};
  });
}

// ---------------------------------------------------------------------------
// trap-census

TrapCensusResult run_trap_census(const ExperimentConfig& cfg, unsigned jobs) {
  const std::vector<BiasDistribution> seq = cfg.bias_sequence();
  if (seq.size() < 2) throw Error(ErrorCode::kConfigError, "trap-census needs p.0 and p.1");
  const LogOddsDirection lo = log_odds(seq[1]);
  if (lo.degenerate()) throw Error(ErrorCode::kConfigError, "p.1 has no log-odds direction");
  TrapCensusResult res;
  res.direction = *lo.unit;
  res.t = solve_root(seq[0], res.direction);
  res.lookahead = cfg.lookahead > 0.0 ? cfg.lookahead : std::max(40.0, -std::log(cfg.truncation_tolerance)) / res.t;
  res.heights = cfg.trap_heights;
  const double per_event = std::exp(-res.t * res.lookahead);
  std::vector<TrapProfile> profiles(cfg.replicas);
  res.replicas.resize(cfg.replicas);
  parallel_for(cfg.replicas, jobs, [&](std::size_t r) {
    CounterRng rng = make_stream(cfg.seed, 0, r);
    const WalkPath path = simulate_level0(seq[0], cfg.steps, rng);
    const RegenerationRecord rec = regenerations(path, res.direction, res.lookahead, per_event);
    profiles[r] = trap_profile(path, rec, res.direction);
    TrapCensusReplica& out = res.replicas[r];
    out.replica = r;
    out.blocks = profiles[r].blocks;
    for (std::int64_t h : res.heights) out.traps.push_back(trap_events(profiles[r], h).traps.size());
  });
  res.total_traps.assign(res.heights.size(), 0);
  for (const auto& rep : res.replicas) {
    res.total_blocks += rep.blocks;
    for (std::size_t k = 0; k < res.heights.size(); ++k) res.total_traps[k] += rep.traps[k];
  }
  const double z = normal_quantile_two_sided(0.99);
  for (std::size_t k = 0; k < res.heights.size(); ++k) {
    const double h = static_cast<double>(res.heights[k]);
    const double f = res.total_blocks ? static_cast<double>(res.total_traps[k]) / static_cast<double>(res.total_blocks) : 0.0;
    const auto [lo_ci, hi_ci] = wilson_interval(res.total_traps[k], res.total_blocks, z);
    res.frequency.push_back(f);
    res.exponent.push_back(f > 0.0 ? -std::log(f) / h : std::numeric_limits<double>::infinity());
    res.exponent_ci_low.push_back(hi_ci > 0.0 ? -std::log(hi_ci) / h : std::numeric_limits<double>::infinity());
    res.exponent_ci_high.push_back(lo_ci > 0.0 ? -std::log(lo_ci) / h : std::numeric_limits<double>::infinity());
  }
  try {
    res.scaling = trap_scaling(profiles, cfg.trap_n, cfg.trap_epsilon, res.t);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientBlocks) throw;
    res.scaling_error = e.what();
  }
  return res;
}

CommandOutcome cmd_trap_census(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  return guarded([&]() -> CommandOutcome {
    const TrapCensusResult res = run_trap_census(cfg, jobs);
    std::vector<std::string> cols{"replica", "blocks"};
    for (auto h : res.heights) cols.push_back("traps_h" + std::to_string(h));
    cols.emplace_back("n_count");
    Csv csv("trap-census", cols);
    std::size_t scaled = 0;
    for (const auto& rep : res.replicas) {
      std::vector<std::string> cells{std::to_string(rep.replica), std::to_string(rep.blocks)};
      for (auto t : rep.traps) cells.push_back(std::to_string(t));
      if (res.scaling && rep.blocks + 1 >= cfg.trap_n && scaled < res.scaling->counts.size()) {
        cells.push_back(std::to_string(res.scaling->counts[scaled++]));
      } else {
        cells.emplace_back("");
      }
      csv.row(cells);
    }
    json heights = json::array();
    for (std::size_t k = 0; k < res.heights.size(); ++k) {
      heights.push_back({{"h", res.heights[k]},
                         {"traps", res.total_traps[k]},
                         {"frequency", res.frequency[k]},
                         {"exponent", number_or_null(res.exponent[k])},
                         {"exponent_ci99", {number_or_null(res.exponent_ci_low[k]), number_or_null(res.exponent_ci_high[k])}}});
    }
    json summary{{"schema", kCsvSchema},
                 {"kind", "trap-census"},
                 {"direction", vector_json(res.direction)},
                 {"t", res.t},
                 {"lookahead", res.lookahead},
                 {"total_blocks", res.total_blocks},
                 {"heights", heights}};
    if (res.scaling) {
      summary["scaling"] = {{"n", res.scaling->n},
                            {"epsilon", res.scaling->epsilon},
                            {"height_real", res.scaling->height_real},
                            {"height", res.scaling->height},
                            {"threshold", res.scaling->threshold},
                            {"accepted", res.scaling->counts.size()},
                            {"rejected", res.scaling->rejected},
                            {"fraction_exceeding", res.scaling->fraction_exceeding}};
    } else {
      summary["scaling_error"] = res.scaling_error;
    }
    write_outputs(out_dir, cfg, seed_manifest(cfg, 1, cfg.replicas), csv.str(), summary);
    std::string msg = std::to_string(res.total_blocks) + " blocks";
    if (res.scaling) msg += "; fraction with N >= n^(eps/2): " + fmt(res.scaling->fraction_exceeding);
    if (!res.scaling) return {kExitValidation, msg + "; " + res.scaling_error};
    return {kExitOk, msg};
  });
}

// ---------------------------------------------------------------------------
// simplicity

SimplicityResult run_simplicity(const ExperimentConfig& cfg) {
  std::vector<BiasDistribution> seq = cfg.bias_sequence();
  if (seq.size() < 2) throw Error(ErrorCode::kConfigError, "simplicity needs p.0 and at least one p.i");
  const BiasDistribution p0 = seq.front();
  std::vector<BiasDistribution> rest(seq.begin() + 1, seq.end());
  if (cfg.family == BiasFamily::kConstant) rest.assign(cfg.terms, seq[1]);
  SimplicityResult res;
  bool some_direction_summable = false;
  for (int k = 1; k < 2 * p0.dimension(); ++k) {
    const Direction e = Direction::from_index(k);
    bool all_c = true;
    for (double c : cfg.c_values) {
      SimplicityRow row{e, c, simplicity_series(rest, p0, e, c, rest.size())};
      all_c = all_c && row.series.trend == SeriesTrend::kSummable;
      res.rows.push_back(std::move(row));
    }
    some_direction_summable = some_direction_summable || all_c;
  }
  if (cfg.family == BiasFamily::kConstant) {
    res.verdict = "(a) applies: simple path a.s.";
  } else if (some_direction_summable) {
    res.verdict = "(b) criterion satisfied for tested c";
  } else {
    res.verdict = "inconclusive";
  }
  return res;
}

CommandOutcome cmd_simplicity(const ExperimentConfig& cfg, const fs::path& out_dir) {
  return guarded([&]() -> CommandOutcome {
    const SimplicityResult res = run_simplicity(cfg);
    Csv csv("simplicity", {"e", "c", "i", "term", "partial_sum"});
    json series = json::array();
    for (const auto& row : res.rows) {
      for (std::size_t i = 0; i < row.series.terms.size(); ++i) {
        csv.row({direction_label(row.e), fmt(row.c), std::to_string(i + 1), fmt(row.series.terms[i]),
                 fmt(row.series.partial_sums[i])});
      }
      series.push_back({{"e", direction_label(row.e)},
                        {"c", row.c},
                        {"terms", row.series.terms.size()},
                        {"partial_sum", row.series.partial_sums.empty() ? 0.0 : row.series.partial_sums.back()},
                        {"tail_ratio", row.series.tail_ratio},
                        {"trend", to_string(row.series.trend)}});
    }
    json summary{{"schema", kCsvSchema},
                 {"kind", "simplicity"},
                 {"family", to_string(cfg.family)},
                 {"verdict", res.verdict},
                 {"series", series}};
    write_outputs(out_dir, cfg, seed_manifest(cfg, 0, 0), csv.str(), summary);
    return {kExitOk, res.verdict};
  });
}

// ---------------------------------------------------------------------------
// oracle-test

OracleReport run_oracle(const ExperimentConfig& cfg) {
  OracleSuiteOptions opt;
  opt.fixtures = cfg.oracle_fixtures;
  opt.vertices = cfg.oracle_vertices;
  opt.trials = cfg.oracle_trials;
  opt.deletions = cfg.oracle_deletions;
  opt.perturb = cfg.oracle_perturb;
  opt.seed = cfg.seed;
  return run_oracle_suite(opt);
}

CommandOutcome cmd_oracle_test(const ExperimentConfig& cfg, const fs::path& out_dir) {
  return guarded([&]() -> CommandOutcome {
    const OracleReport rep = run_oracle(cfg);
    Csv csv("oracle-test", {"check", "passed", "detail"});
    json failed = json::array();
    for (const auto& c : rep.checks) {
      csv.row({"\"" + c.name + "\"", c.passed ? "1" : "0", "\"" + c.detail + "\""});
      if (!c.passed) failed.push_back({{"check", c.name}, {"detail", c.detail}});
    }
    json summary{{"schema", kCsvSchema},
                 {"kind", "oracle-test"},
                 {"checks", rep.checks.size()},
                 {"failures", rep.failures()},
                 {"flagged_kernel_cells", rep.flagged_kernel_cells},
                 {"failed", failed}};
    write_outputs(out_dir, cfg, seed_manifest(cfg, 0, 0), csv.str(), summary);
    if (!rep.passed()) {
      std::string msg = std::to_string(rep.failures()) + " oracle check(s) failed:";
      for (const auto& c : rep.checks) {
        if (!c.passed) msg += "\n  " + c.name + ": " + c.detail;
      }
      return {kExitOracle, msg};
    }
    return {kExitOk, "all " + std::to_string(rep.checks.size()) + " oracle checks passed"};
  });
}

CommandOutcome run_command(const ExperimentConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  switch (cfg.kind) {
    case ExperimentKind::kAnalyze: return cmd_analyze(cfg, out_dir);
    case ExperimentKind::kSimulate: return cmd_simulate(cfg, out_dir, jobs);
    case ExperimentKind::kSweep: return cmd_sweep_r(cfg, out_dir, jobs);
    case ExperimentKind::kTrapCensus: return cmd_trap_census(cfg, out_dir, jobs);
    case ExperimentKind::kSimplicity: return cmd_simplicity(cfg, out_dir);
    case ExperimentKind::kOracleTest: return cmd_oracle_test(cfg, out_dir);
  }
  return {kExitValidation, "unknown experiment kind"};
}

}  // namespace rwtrace
