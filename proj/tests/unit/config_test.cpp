#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "iptvsim/config.hpp"

namespace cfg = iptvsim::config;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(IPTVSIM_SOURCE_DIR) / "configs";

json base() { return cfg::load_json(kConfigs / "base.json"); }

std::vector<std::string> issues_of(const json& j) {
  try {
    cfg::build_scenario(j, kConfigs);
  } catch (const cfg::ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& i : issues) {
    if (i.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Config, ShippedConfigsBuild) {
  const auto s = cfg::load_scenario(kConfigs / "base.json");
  EXPECT_EQ(s.duration_s, 60.0);
  ASSERT_EQ(s.flows.size(), 3u);
  EXPECT_EQ(s.flows[0].id, "video");
  EXPECT_EQ(s.flows[0].source->frames.size(), 3600u);
  EXPECT_EQ(s.flows[0].source->label, "SVC");
  EXPECT_TRUE(s.flows[0].measured);
  EXPECT_FALSE(s.flows[2].measured);
  const auto* fixed = std::get_if<iptvsim::engine::FixedMcs>(&s.mcs_mode);
  ASSERT_NE(fixed, nullptr);
  EXPECT_EQ(fixed->profile.name(), "64QAM-3/4");

  const auto a = cfg::load_scenario(kConfigs / "adaptive.json");
  EXPECT_TRUE(std::holds_alternative<iptvsim::engine::AdaptiveMcs>(a.mcs_mode));
  EXPECT_EQ(a.erceg_shadow_sigma_db, 8.0);
}

TEST(Config, UgsWithReservedRateIsRejected) {
  EXPECT_THROW(cfg::load_scenario(kConfigs / "invalid_ugs.json"), cfg::ConfigError);
  auto j = base();
  j["flows"][0]["class"] = "UGS";
  const auto issues = issues_of(j);
  EXPECT_TRUE(mentions(issues, "min_reserved_rate_bps"));
}

TEST(Config, CollectsEveryIssue) {
  auto j = base();
  j["link_budget"]["path_loss"]["model"] = "okumura";
  j["mcs"]["profile"] = "8PSK-1/2";
  j["flows"][1]["class"] = "GOLD";
  j["cell"]["ss_distance_m"] = 300.0;
  const auto issues = issues_of(j);
  EXPECT_TRUE(mentions(issues, "okumura"));
  EXPECT_TRUE(mentions(issues, "8PSK-1/2"));
  EXPECT_TRUE(mentions(issues, "GOLD"));
  EXPECT_TRUE(mentions(issues, "outside the cell radius"));
}

TEST(Config, WrongTypesAndMissingSources) {
  auto j = base();
  j["duration_s"] = "long";
  j["flows"][0]["source"] = "nope";
  const auto issues = issues_of(j);
  EXPECT_TRUE(mentions(issues, "duration_s has the wrong type"));
  EXPECT_TRUE(mentions(issues, "'nope' is not defined"));
}

TEST(Config, MissingTraceFileIsAConfigIssue) {
  auto j = base();
  j["sources"]["video"]["trace"] = "does/not/exist.csv";
  EXPECT_TRUE(mentions(issues_of(j), "exist.csv"));
}

TEST(Config, RelativeTracePathResolvesAgainstBaseDir) {
  auto j = base();
  EXPECT_NO_THROW(cfg::build_scenario(j, kConfigs));
  j["sources"]["video"]["trace"] =
      (std::filesystem::path(IPTVSIM_SOURCE_DIR) / "data/traces/avc.csv").string();
  EXPECT_NO_THROW(cfg::build_scenario(j, "/nonexistent"));
}

TEST(Config, NotAnObject) {
  EXPECT_THROW(cfg::build_scenario(json::array()), cfg::ConfigError);
  EXPECT_THROW(cfg::load_json(kConfigs / "missing.json"), std::runtime_error);
}
