#include <gtest/gtest.h>

#include <sstream>

#include "farm/errors.hpp"
#include "farm/run_config.hpp"

using namespace farm;

namespace {

RunConfig from_text(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::from_ini(parse_ini(in));
}

}  // namespace

TEST(Ini, ParsesSectionsAndComments) {
  std::istringstream in(
      "# comment\n[run]\nenv = battery ; trailing\nagent=rule\n\n[battery]\nrate_kw = 4.5\n");
  const auto ini = parse_ini(in);
  EXPECT_EQ(ini.at("run").at("env"), "battery");
  EXPECT_EQ(ini.at("run").at("agent"), "rule");
  EXPECT_EQ(ini.at("battery").at("rate_kw"), "4.5");
}

TEST(Ini, RejectsMalformedLines) {
  std::istringstream no_eq("[run]\nenv battery\n");
  EXPECT_THROW(parse_ini(no_eq), ConfigError);
  std::istringstream open("[run\nenv = battery\n");
  EXPECT_THROW(parse_ini(open), ConfigError);
}

TEST(RunConfigTest, EnvDefaults) {
  const auto b = from_text("[run]\nenv = battery\nagent = ppo\n");
  EXPECT_EQ(b.split.train_months, (std::set<int>{1}));
  EXPECT_EQ(b.ppo.gamma, 0.89);
  const auto h = from_text("[run]\nenv = heater\nagent = pidkl\n");
  EXPECT_EQ(h.split.train_months, (std::set<int>{1, 7}));
  EXPECT_EQ(h.pidkl.trust, TrustRegion::pid_kl);
  EXPECT_EQ(h.ppo.trust, TrustRegion::clip);
  EXPECT_EQ(h.heater.overuse, OverusePolicy::track);
}

TEST(RunConfigTest, AppliesOverrides) {
  auto c = from_text(
      "[run]\nenv = heater\nagent = dqn\nseeds = 1..5\nsteps = 500\ndata = synthetic:7\n"
      "[heater]\ndesired_windows = 0-6,12-14\noveruse = block\n[dqn]\nbatch = 64\n");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.total_steps(), 500);
  EXPECT_EQ(c.data_seed, 7u);
  EXPECT_FALSE(c.data_path);
  EXPECT_EQ(c.dqn.batch, 64u);
  EXPECT_EQ(c.heater.overuse, OverusePolicy::block);
  EXPECT_EQ(format_hour_ranges(c.heater.desired_windows), "0-6,12-14");
  c.set("sac", "tau", "0.01");
  EXPECT_EQ(c.sac.tau, 0.01);
  EXPECT_THROW(c.set("sac", "nope", "1"), ConfigError);
  EXPECT_THROW(c.set("nope", "tau", "1"), ConfigError);
  EXPECT_THROW(c.set("dqn", "batch", "many"), ConfigError);
}

TEST(RunConfigTest, PairingRulesAndForce) {
  auto c = RunConfig::defaults(EnvKind::heater, AgentKind::rule);
  EXPECT_THROW(c.validate(), ConfigError);
  c.force = true;
  EXPECT_NO_THROW(c.validate());
  auto f = RunConfig::defaults(EnvKind::battery, AgentKind::fppo);
  EXPECT_THROW(f.validate(), ConfigError);
  EXPECT_NO_THROW(RunConfig::defaults(EnvKind::battery, AgentKind::qtable).validate());
  EXPECT_NO_THROW(RunConfig::defaults(EnvKind::heater, AgentKind::sac).validate());
  EXPECT_NO_THROW(RunConfig::defaults(EnvKind::battery, AgentKind::dqn).validate());
}

TEST(RunConfigTest, InvalidValuesRejected) {
  auto c = RunConfig::defaults(EnvKind::heater, AgentKind::ppo);
  c.heater.alpha_weight = 0.9;
  EXPECT_THROW(c.validate(), ConfigError);
  auto d = RunConfig::defaults(EnvKind::heater, AgentKind::ppo);
  d.steps = 0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(RunConfigTest, ToIniRoundTrips) {
  auto c = from_text("[run]\nenv = battery\nagent = qtable\nseeds = 2,4\n[qtable]\nlr = 0.2\n");
  const auto back = from_text(c.to_ini());
  EXPECT_EQ(back.to_ini(), c.to_ini());
  EXPECT_EQ(back.spec_hash(), c.spec_hash());
  EXPECT_EQ(back.qtable.lr, 0.2);
  EXPECT_EQ(back.seeds, c.seeds);
}

TEST(RunConfigTest, SpecHashTracksCheckpointShape) {
  const auto a = RunConfig::defaults(EnvKind::heater, AgentKind::fppo);
  auto b = a;
  b.ppo.lr = 1.0;
  EXPECT_EQ(a.spec_hash(), b.spec_hash());
  b.network.gru_hidden = 16;
  EXPECT_NE(a.spec_hash(), b.spec_hash());
  auto c = a;
  c.split.train_months = {2};
  EXPECT_NE(a.spec_hash(), c.spec_hash());
}

TEST(SeedList, Forms) {
  EXPECT_EQ(parse_seed_list("1..5"), (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_seed_list("1,3,7"), (std::vector<std::uint64_t>{1, 3, 7}));
  EXPECT_EQ(parse_seed_list("4"), (std::vector<std::uint64_t>{4}));
  EXPECT_THROW(parse_seed_list("5..1"), ConfigError);
  EXPECT_THROW(parse_seed_list(""), ConfigError);
}

TEST(HourRanges, ParseAndFormat) {
  const auto r = parse_hour_ranges("0-6");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(format_hour_ranges(r), "0-6");
  EXPECT_THROW(parse_hour_ranges("6-30"), ConfigError);
}

TEST(Kinds, ParseAndName) {
  for (const char* a : {"ppo", "fppo", "pidkl", "dqn", "sac", "qtable", "rule"})
    EXPECT_STREQ(to_string(parse_agent_kind(a)), a);
  EXPECT_THROW(parse_agent_kind("a2c"), ConfigError);
  EXPECT_THROW(parse_env_kind("boiler"), ConfigError);
}
