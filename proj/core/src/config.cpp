#include "rwtrace/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"

namespace rwtrace {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

[[noreturn]] void fail(int line, std::string_view key, const std::string& what) {
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
  throw Error(ErrorCode::kConfigError, where + "field '" + std::string(key) + "': " + what);
}

double parse_real(std::string_view token, int line, std::string_view key) {
  const auto slash = token.find('/');
  if (slash != std::string_view::npos) {
    const double num = parse_real(token.substr(0, slash), line, key);
    const double den = parse_real(token.substr(slash + 1), line, key);
    if (den == 0.0) fail(line, key, "zero denominator in '" + std::string(token) + "'");
    return num / den;
  }
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(v)) {
    fail(line, key, "expected a number, got '" + std::string(token) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view token, int line, std::string_view key) {
  // Accept 1e6-style literals when they are exact integers.
  if (token.find_first_of("eE.") != std::string_view::npos) {
    const double v = parse_real(token, line, key);
    if (v < 0.0 || v != std::floor(v) || v > 1.8e19) fail(line, key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    fail(line, key, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return v;
}

std::string format_real(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

template <class T, class F>
std::string join_list(const std::vector<T>& v, F fmt) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt(v[k]);
  return s;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry>& entries) : entries_(entries) {}

  Entry* get(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void real(const std::string& key, double& out) {
    if (Entry* e = get(key)) out = parse_real(trim(e->value), e->line, key);
  }
  template <class U>
  void uint(const std::string& key, U& out) {
    if (Entry* e = get(key)) out = static_cast<U>(parse_uint(trim(e->value), e->line, key));
  }
  void reals(const std::string& key, std::vector<double>& out) {
    if (Entry* e = get(key)) {
      out.clear();
      for (const auto& w : split_words(e->value)) out.push_back(parse_real(w, e->line, key));
      if (out.empty()) fail(e->line, key, "empty list");
    }
  }
  template <class U>
  void uints(const std::string& key, std::vector<U>& out) {
    if (Entry* e = get(key)) {
      out.clear();
      for (const auto& w : split_words(e->value)) out.push_back(static_cast<U>(parse_uint(w, e->line, key)));
      if (out.empty()) fail(e->line, key, "empty list");
    }
  }
  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  std::map<std::string, Entry>& entries_;
};

template <class E>
E parse_enum(Reader& rd, const std::string& key, E fallback, const std::vector<std::pair<std::string, E>>& names) {
  Entry* e = rd.get(key);
  if (!e) return fallback;
  const std::string v(trim(e->value));
  for (const auto& [name, value] : names) {
    if (v == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + name;
  fail(e->line, key, "unknown value '" + v + "' (expected one of: " + allowed + ")");
}

const std::vector<std::pair<std::string, ExperimentKind>> kKinds{
    {"analyze", ExperimentKind::kAnalyze},       {"simulate", ExperimentKind::kSimulate},
    {"sweep-r", ExperimentKind::kSweep},         {"trap-census", ExperimentKind::kTrapCensus},
    {"simplicity", ExperimentKind::kSimplicity}, {"oracle-test", ExperimentKind::kOracleTest}};

const std::vector<std::pair<std::string, BiasFamily>> kFamilies{
    {"explicit", BiasFamily::kExplicit},   {"figure2", BiasFamily::kFigure2},
    {"example13", BiasFamily::kExample13}, {"example15", BiasFamily::kExample15},
    {"example16", BiasFamily::kExample16}, {"constant", BiasFamily::kConstant}};

const std::vector<std::pair<std::string, FrontierPolicy>> kPolicies{{"extend", FrontierPolicy::kExtend},
                                                                    {"fixed-horizon", FrontierPolicy::kFixedHorizon}};

template <class E>
std::string name_of(E value, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "unknown";
}

}  // namespace

std::string to_string(ExperimentKind kind) { return name_of(kind, kKinds); }
std::string to_string(BiasFamily family) { return name_of(family, kFamilies); }

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": empty key");
    if (entries.count(key)) fail(line_no, key, "duplicate (first set on line " + std::to_string(entries[key].line) + ")");
    entries[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no, false};
  }

  Reader rd(entries);
  ExperimentConfig cfg;
  {
    Entry* e = rd.get("schema");
    if (!e) fail(0, "schema", "missing; set 'schema = " + std::to_string(kConfigSchema) + "'");
    if (parse_uint(trim(e->value), e->line, "schema") != kConfigSchema) {
      fail(e->line, "schema", "unsupported version (expected " + std::to_string(kConfigSchema) + ")");
    }
  }
  cfg.kind = parse_enum(rd, "kind", cfg.kind, kKinds);
  cfg.family = parse_enum(rd, "family", cfg.family, kFamilies);
  cfg.policy = parse_enum(rd, "policy", cfg.policy, kPolicies);
  rd.uint("dimension", cfg.dimension);
  if (cfg.dimension < 1 || cfg.dimension > kMaxDimension) {
    fail(rd.line_of("dimension"), "dimension", "must be between 1 and " + std::to_string(kMaxDimension));
  }
  rd.real("r", cfg.r);
  rd.reals("r_values", cfg.r_values);
  rd.uint("e13.d", cfg.e13_d);
  rd.uint("e13.k0", cfg.e13_k0);
  rd.uint("e13.ki", cfg.e13_ki);
  rd.real("e13.gamma0", cfg.e13_gamma0);
  rd.real("e13.gammai", cfg.e13_gammai);
  rd.uints("e13.dims", cfg.e13_dims);
  rd.reals("e13.gammas", cfg.e13_gammas);
  rd.uint("seed", cfg.seed);
  rd.uint("replicas", cfg.replicas);
  rd.uint("steps", cfg.steps);
  rd.uint("step_cap", cfg.step_cap);
  rd.uints("checkpoints", cfg.checkpoints);
  rd.real("lookahead", cfg.lookahead);
  rd.real("truncation_tolerance", cfg.truncation_tolerance);
  rd.real("error_budget", cfg.error_budget);
  rd.real("burn_in", cfg.burn_in);
  rd.real("epsilon_first", cfg.epsilon_first);
  rd.uint("terms", cfg.terms);
  rd.reals("c_values", cfg.c_values);
  rd.uint("trap.n", cfg.trap_n);
  rd.real("trap.epsilon", cfg.trap_epsilon);
  {
    std::vector<std::uint64_t> hs;
    rd.uints("trap.heights", hs);
    if (!hs.empty()) cfg.trap_heights.assign(hs.begin(), hs.end());
  }
  rd.uint("oracle.fixtures", cfg.oracle_fixtures);
  rd.uint("oracle.vertices", cfg.oracle_vertices);
  rd.uint("oracle.trials", cfg.oracle_trials);
  rd.uint("oracle.deletions", cfg.oracle_deletions);
  {
    std::uint64_t perturb = 0;
    rd.uint("oracle.perturb", perturb);
    if (perturb > 1) fail(rd.line_of("oracle.perturb"), "oracle.perturb", "expected 0 or 1");
    cfg.oracle_perturb = perturb == 1;
  }

  for (auto& [key, entry] : entries) {
    if (key.rfind("p.", 0) != 0) continue;
    entry.used = true;
    int level = 0;
    const std::string idx = key.substr(2);
    const auto res = std::from_chars(idx.data(), idx.data() + idx.size(), level);
    if (res.ec != std::errc() || res.ptr != idx.data() + idx.size() || level < 0) {
      fail(entry.line, key, "expected p.<level>");
    }
    std::vector<double> w;
    for (const auto& tok : split_words(entry.value)) w.push_back(parse_real(tok, entry.line, key));
    if (w.size() != static_cast<std::size_t>(2 * cfg.dimension)) {
      fail(entry.line, key, "expected " + std::to_string(2 * cfg.dimension) + " weights in the order +e1 -e1 +e2 -e2 ...");
    }
    try {
      cfg.explicit_biases.emplace(level, BiasDistribution(cfg.dimension, std::move(w)));
    } catch (const Error& err) {
      fail(entry.line, key, err.what());
    }
  }
  for (const auto& [key, entry] : entries) {
    if (!entry.used) fail(entry.line, key, "unknown field");
  }

  // Cross-field validation.
  auto check = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) fail(rd.line_of(key), key, what);
  };
  check(cfg.replicas >= 1, "replicas", "must be at least 1");
  check(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0, "burn_in", "must be in [0, 1)");
  check(cfg.truncation_tolerance > 0.0 && cfg.truncation_tolerance < 1.0, "truncation_tolerance", "must be in (0, 1)");
  check(cfg.error_budget > 0.0, "error_budget", "must be positive");
  check(cfg.lookahead >= 0.0, "lookahead", "must be non-negative (0 selects the default)");
  check(cfg.r > 0.0, "r", "must be positive");
  for (double r : cfg.r_values) check(r > 0.0, "r_values", "values must be positive");
  for (double c : cfg.c_values) check(c > 0.0, "c_values", "values must be positive");
  check(cfg.trap_epsilon > 0.0 && cfg.trap_epsilon < 1.0, "trap.epsilon", "must be in (0, 1)");
  check(cfg.trap_n >= 2, "trap.n", "must be at least 2");
  for (auto h : cfg.trap_heights) check(h >= 1, "trap.heights", "heights must be >= 1");
  for (auto n : cfg.checkpoints) check(n >= 1 && n <= cfg.steps, "checkpoints", "must lie in [1, steps]");
  check(cfg.oracle_vertices >= 3 && cfg.oracle_vertices <= 50, "oracle.vertices", "must be in [3, 50]");
  const bool planar = cfg.family == BiasFamily::kFigure2 || cfg.family == BiasFamily::kExample15 ||
                      cfg.family == BiasFamily::kExample16;
  check(!planar || cfg.dimension == 2, "dimension", "family " + to_string(cfg.family) + " is two-dimensional");
  if (cfg.family == BiasFamily::kExample13) {
    cfg.dimension = cfg.e13_d;
    check(cfg.e13_k0 >= 1 && cfg.e13_k0 <= cfg.e13_d, "e13.k0", "must be in 1..d");
    check(cfg.e13_ki >= 1 && cfg.e13_ki <= cfg.e13_d, "e13.ki", "must be in 1..d");
    check(cfg.e13_gamma0 > 1.0, "e13.gamma0", "must exceed 1");
    check(cfg.e13_gammai > 1.0, "e13.gammai", "must exceed 1");
    for (int d : cfg.e13_dims) check(d >= 1 && d <= kMaxDimension, "e13.dims", "dimension out of range");
    for (double g : cfg.e13_gammas) check(g > 1.0, "e13.gammas", "values must exceed 1");
  }
  if (cfg.family == BiasFamily::kExplicit) {
    check(cfg.explicit_biases.size() >= 2, "family", "explicit family needs p.0 and at least p.1");
    int expect = 0;
    for (const auto& [level, p] : cfg.explicit_biases) {
      if (level != expect) fail(0, "p." + std::to_string(expect), "missing (levels must be contiguous from 0)");
      ++expect;
    }
  }
  if (cfg.family == BiasFamily::kExample15) {
    check(cfg.epsilon_first == 0.0 || (cfg.epsilon_first > 0.0 && cfg.epsilon_first < 0.25), "epsilon_first",
          "example15 needs eps in (0, 1/4)");
  }
  if (cfg.family == BiasFamily::kExample16) {
    check(cfg.epsilon_first == 0.0 || (cfg.epsilon_first > 0.0 && cfg.epsilon_first < 1.0), "epsilon_first",
          "example16 needs eps in (0, 1)");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + std::string(e.what()));
  }
}

std::string ExperimentConfig::resolved() const {
  const auto real = [](double v) { return format_real(v); };
  const auto integer = [](auto v) { return std::to_string(v); };
  std::ostringstream o;
  o << "schema = " << kConfigSchema << "\n";
  o << "kind = " << to_string(kind) << "\n";
  o << "dimension = " << dimension << "\n";
  o << "family = " << to_string(family) << "\n";
  for (const auto& [level, p] : explicit_biases) {
    o << "p." << level << " = " << join_list(std::vector<double>(p.weights().begin(), p.weights().end()), real) << "\n";
  }
  o << "r = " << real(r) << "\n";
  o << "r_values = " << join_list(r_values, real) << "\n";
  o << "e13.d = " << e13_d << "\n";
  o << "e13.k0 = " << e13_k0 << "\n";
  o << "e13.ki = " << e13_ki << "\n";
  o << "e13.gamma0 = " << real(e13_gamma0) << "\n";
  o << "e13.gammai = " << real(e13_gammai) << "\n";
  o << "e13.dims = " << join_list(e13_dims, integer) << "\n";
  o << "e13.gammas = " << join_list(e13_gammas, real) << "\n";
  o << "seed = " << seed << "\n";
  o << "replicas = " << replicas << "\n";
  o << "steps = " << steps << "\n";
  o << "step_cap = " << step_cap << "\n";
  o << "checkpoints = " << join_list(resolved_checkpoints(), integer) << "\n";
  o << "lookahead = " << real(lookahead) << "\n";
  o << "truncation_tolerance = " << real(truncation_tolerance) << "\n";
  o << "error_budget = " << real(error_budget) << "\n";
  o << "burn_in = " << real(burn_in) << "\n";
  o << "policy = " << name_of(policy, kPolicies) << "\n";
  o << "epsilon_first = " << real(epsilon_first) << "\n";
  o << "terms = " << terms << "\n";
  o << "c_values = " << join_list(c_values, real) << "\n";
  o << "trap.n = " << trap_n << "\n";
  o << "trap.epsilon = " << real(trap_epsilon) << "\n";
  o << "trap.heights = " << join_list(trap_heights, integer) << "\n";
  o << "oracle.fixtures = " << oracle_fixtures << "\n";
  o << "oracle.vertices = " << oracle_vertices << "\n";
  o << "oracle.trials = " << oracle_trials << "\n";
  o << "oracle.deletions = " << oracle_deletions << "\n";
  o << "oracle.perturb = " << (oracle_perturb ? 1 : 0) << "\n";
  return o.str();
}

std::vector<BiasDistribution> ExperimentConfig::bias_sequence() const {
  auto level_or = [&](int level, const BiasDistribution& fallback) {
    auto it = explicit_biases.find(level);
    return it == explicit_biases.end() ? fallback : it->second;
  };
  switch (family) {
    case BiasFamily::kExplicit: {
      std::vector<BiasDistribution> out;
      for (const auto& [level, p] : explicit_biases) out.push_back(p);
      return out;
    }
    case BiasFamily::kFigure2:
      return {presets::figure2_p0(), presets::figure2_p1(r)};
    case BiasFamily::kExample13:
      return {presets::canonical(e13_d, e13_k0, e13_gamma0), presets::canonical(e13_d, e13_ki, e13_gammai)};
    case BiasFamily::kExample15:
    case BiasFamily::kExample16: {
      const bool e15 = family == BiasFamily::kExample15;
      const double first = epsilon_first > 0.0 ? epsilon_first : (e15 ? 0.125 : 0.5);
      std::vector<BiasDistribution> out{level_or(0, presets::half_drift_p0())};
      for (double eps : presets::geometric_epsilons(first, terms)) {
        out.push_back(e15 ? presets::vanishing_bias(eps) : presets::trap_drift_bias(eps));
      }
      return out;
    }
    case BiasFamily::kConstant:
      return {level_or(0, presets::figure2_p0()), level_or(1, presets::figure2_p1(r))};
  }
  return {};
}

std::vector<std::uint64_t> ExperimentConfig::resolved_checkpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  std::vector<std::uint64_t> out;
  for (std::uint64_t n : {steps / 100, steps / 10, steps}) {
    if (n >= 1 && (out.empty() || out.back() != n)) out.push_back(n);
  }
  return out;
}

}  // namespace rwtrace
