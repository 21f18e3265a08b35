#include <gtest/gtest.h>

#include <string>

#include "rwtrace/config.hpp"
#include "rwtrace/errors.hpp"
#include "rwtrace/presets.hpp"

namespace rwtrace {
namespace {

std::string error_of(const std::string& text) {
  try {
    ExperimentConfig::parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

TEST(Config, MinimalUsesDefaults) {
  auto cfg = ExperimentConfig::parse("schema = 1\n");
  EXPECT_EQ(cfg.kind, ExperimentKind::kAnalyze);
  EXPECT_EQ(cfg.family, BiasFamily::kFigure2);
  EXPECT_EQ(cfg.replicas, 10u);
  EXPECT_EQ(cfg.steps, 1000000u);
  EXPECT_EQ(cfg.resolved_checkpoints(), (std::vector<std::uint64_t>{10000, 100000, 1000000}));
  auto seq = cfg.bias_sequence();
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0], presets::figure2_p0());
  EXPECT_EQ(seq[1], presets::figure2_p1(1.5));
}

TEST(Config, FullParse) {
  auto cfg = ExperimentConfig::parse(R"(# comment
schema = 1
kind = sweep-r
family = figure2
r_values = 1.5 2.4   # trailing comment
replicas = 4
steps = 1e5
checkpoints = 1000 100000
seed = 42
policy = fixed-horizon
burn_in = 1/4
)");
  EXPECT_EQ(cfg.kind, ExperimentKind::kSweep);
  EXPECT_EQ(cfg.r_values, (std::vector<double>{1.5, 2.4}));
  EXPECT_EQ(cfg.steps, 100000u);
  EXPECT_EQ(cfg.checkpoints, (std::vector<std::uint64_t>{1000, 100000}));
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.policy, FrontierPolicy::kFixedHorizon);
  EXPECT_EQ(cfg.burn_in, 0.25);
}

TEST(Config, ExplicitRationalWeights) {
  auto cfg = ExperimentConfig::parse(
      "schema = 1\nkind = simulate\nfamily = explicit\np.0 = 2/5 1/5 1/5 1/5\np.1 = 3/5 2/15 2/15 2/15\n");
  auto seq = cfg.bias_sequence();
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_DOUBLE_EQ(seq[0].weight(0), 0.4);
  EXPECT_DOUBLE_EQ(seq[1].weight(3), 2.0 / 15.0);
}

TEST(Config, Example13SetsDimension) {
  auto cfg = ExperimentConfig::parse("schema = 1\nfamily = example13\ne13.d = 3\ne13.k0 = 2\ne13.ki = 3\n");
  EXPECT_EQ(cfg.dimension, 3);
  auto seq = cfg.bias_sequence();
  EXPECT_EQ(seq[1], presets::canonical(3, 3, cfg.e13_gammai));
}

TEST(Config, ErrorsNameLineAndField) {
  EXPECT_NE(error_of("kind = analyze\n").find("field 'schema'"), std::string::npos);
  EXPECT_NE(error_of("schema = 2\n").find("line 1: field 'schema'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nreplica = 3\n").find("line 2: field 'replica': unknown field"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nsteps = 10\nsteps = 20\n").find("line 3: field 'steps': duplicate"),
            std::string::npos);
  EXPECT_NE(error_of("schema = 1\n\nreplicas = -1\n").find("line 3: field 'replicas'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nkind = sweep\n").find("line 2: field 'kind'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nburn_in = 1.5\n").find("line 2: field 'burn_in'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nr = 1/0\n").find("line 2: field 'r'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nsteps 10\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nsteps = 10\ncheckpoints = 20\n").find("field 'checkpoints'"), std::string::npos);
  EXPECT_NE(error_of("schema = 1\nfamily = explicit\np.0 = 0.5 0.5 0 0\n").find("field 'family'"),
            std::string::npos);
  EXPECT_NE(error_of("schema = 1\nfamily = explicit\np.0 = 0.5 0.6 0 0\np.1 = 0.25 0.25 0.25 0.25\n")
                .find("line 3: field 'p.0'"),
            std::string::npos);
  EXPECT_NE(error_of("schema = 1\nfamily = explicit\np.0 = 0.5 0.5\np.1 = 0.25 0.25 0.25 0.25\n")
                .find("line 3: field 'p.0'"),
            std::string::npos);
  EXPECT_NE(error_of("schema = 1\nfamily = example15\nepsilon_first = 0.3\n").find("field 'epsilon_first'"),
            std::string::npos);
  EXPECT_NE(error_of("schema = 1\ntrap.epsilon = 1\n").find("field 'trap.epsilon'"), std::string::npos);
}

TEST(Config, ResolvedRoundTrip) {
  auto cfg = ExperimentConfig::parse(
      "schema = 1\nkind = simulate\nfamily = explicit\np.0 = 2/5 1/5 1/5 1/5\np.1 = 0.3 0.1 0.3 0.3\n"
      "steps = 5000\nseed = 9\ntrap.heights = 2 4\nc_values = 0.25 3\n");
  auto text = cfg.resolved();
  auto again = ExperimentConfig::parse(text);
  EXPECT_EQ(again.resolved(), text);
  EXPECT_EQ(again.bias_sequence(), cfg.bias_sequence());
  EXPECT_EQ(again.trap_heights, (std::vector<std::int64_t>{2, 4}));
}

}  // namespace
}  // namespace rwtrace
