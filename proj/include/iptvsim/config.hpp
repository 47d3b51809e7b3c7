#pragma once

// Scenario configuration documents (JSON) and their translation into a
// validated engine::Scenario. Every problem found is collected so a user
// sees the whole list at once.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "iptvsim/engine.hpp"
#include "iptvsim/mac.hpp"
#include "iptvsim/phy.hpp"
#include "iptvsim/propagation.hpp"
#include "iptvsim/traffic.hpp"

namespace iptvsim::config {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid scenario configuration";
    for (const auto& i : issues) out += "\n  - " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

/// Reads a JSON document; throws std::runtime_error on I/O or syntax errors.
inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace detail {

class Reader {
public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  template <typename T>
  T get(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      issues_.push_back(where + "." + key + " has the wrong type");
      return fallback;
    }
  }

  template <typename T>
  std::optional<T> opt(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
      return std::nullopt;
    }
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      issues_.push_back(where + "." + key + " has the wrong type");
      return std::nullopt;
    }
  }

  void fail(std::string msg) { issues_.push_back(std::move(msg)); }

private:
  std::vector<std::string>& issues_;
};

inline std::optional<phy::CodingRate> parse_coding(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::nullopt;
  try {
    return phy::CodingRate{std::stoi(s.substr(0, slash)), std::stoi(s.substr(slash + 1))};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline propagation::PathLossModel parse_path_loss(const json& j, Reader& r) {
  const std::string where = "link_budget.path_loss";
  const auto name = r.get<std::string>(j, "model", "free_space", where);
  if (name == "free_space") {
    propagation::FreeSpace m;
    m.g_tx = r.get(j, "g_tx", m.g_tx, where);
    m.g_rx = r.get(j, "g_rx", m.g_rx, where);
    m.sys_loss = r.get(j, "sys_loss", m.sys_loss, where);
    return m;
  }
  if (name == "erceg") {
    propagation::ErcegSuburban m;
    m.gamma = r.get(j, "gamma", m.gamma, where);
    m.x_f_db = r.get(j, "x_f_db", m.x_f_db, where);
    m.x_h_db = r.get(j, "x_h_db", m.x_h_db, where);
    m.shadow_db = r.get(j, "shadow_db", m.shadow_db, where);
    return m;
  }
  if (name == "pedestrian") return propagation::PedestrianOutdoorIndoor{};
  if (name == "vehicular") {
    propagation::Vehicular m;
    m.bs_antenna_height_m = r.get(j, "bs_antenna_height_m", m.bs_antenna_height_m, where);
    return m;
  }
  r.fail(where + ".model '" + name +
         "' is not one of free_space, erceg, pedestrian, vehicular");
  return propagation::FreeSpace{};
}

inline mac::QosParams parse_qos(const json& j, Reader& r, const std::string& where) {
  mac::QosParams q;
  q.max_sustained_rate_bps = r.opt<double>(j, "max_sustained_rate_bps", where);
  q.min_reserved_rate_bps = r.opt<double>(j, "min_reserved_rate_bps", where);
  q.max_latency_ms = r.opt<double>(j, "max_latency_ms", where);
  q.tolerated_jitter_ms = r.opt<double>(j, "tolerated_jitter_ms", where);
  q.traffic_priority = r.opt<int>(j, "traffic_priority", where);
  return q;
}

inline std::shared_ptr<const traffic::MediaTrace> parse_source(
    const std::string& name, const json& j, double duration_s,
    const std::filesystem::path& base_dir, Reader& r) {
  const std::string where = "sources." + name;
  const auto kind_s = r.get<std::string>(j, "kind", "video", where);
  traffic::FrameKind kind = traffic::FrameKind::Video;
  if (kind_s == "audio") {
    kind = traffic::FrameKind::Audio;
  } else if (kind_s != "video") {
    r.fail(where + ".kind must be video or audio");
  }
  const double fps =
      r.get(j, "fps", kind == traffic::FrameKind::Video ? 30.0 : 21.6, where);
  try {
    traffic::MediaTrace trace;
    if (j.contains("trace")) {
      std::filesystem::path p = r.get<std::string>(j, "trace", "", where);
      if (p.is_relative()) p = base_dir / p;
      trace = traffic::load_trace(p.string(), kind, fps);
    } else if (j.contains("cbr")) {
      const auto& cbr = j.at("cbr");
      const auto size = r.get<std::uint32_t>(cbr, "frame_size_bytes", 741, where + ".cbr");
      trace = traffic::synthesize_cbr(duration_s > 0.0 ? duration_s : 1.0, fps, size, kind);
    } else {
      r.fail(where + " needs either 'trace' or 'cbr'");
      return nullptr;
    }
    if (auto label = r.opt<std::string>(j, "label", where)) trace.label = *label;
    return std::make_shared<const traffic::MediaTrace>(std::move(trace));
  } catch (const std::exception& e) {
    r.fail(where + ": " + e.what());
    return nullptr;
  }
}

}  // namespace detail

/// Builds and validates a scenario. Relative trace paths resolve against
/// `base_dir` (normally the config file's directory). Throws ConfigError
/// listing every violation.
inline engine::Scenario build_scenario(const json& cfg,
                                       const std::filesystem::path& base_dir = ".") {
  std::vector<std::string> issues;
  detail::Reader r(issues);
  engine::Scenario s;
  if (!cfg.is_object()) throw ConfigError({"configuration must be a JSON object"});

  s.duration_s = r.get(cfg, "duration_s", s.duration_s, "config");
  s.seed = r.get(cfg, "seed", s.seed, "config");
  s.mtu_payload_bytes = r.get(cfg, "mtu_payload_bytes", s.mtu_payload_bytes, "config");

  const json empty = json::object();
  const json& cell = cfg.value("cell", empty);
  s.cell.radius_km = r.get(cell, "radius_km", s.cell.radius_km, "cell");
  s.cell.bs_count = r.get(cell, "bs_count", s.cell.bs_count, "cell");
  s.cell.ss_distance_m = r.get(cell, "ss_distance_m", s.cell.ss_distance_m, "cell");

  const json& phy_j = cfg.value("phy", empty);
  s.phy.channel_bandwidth_mhz =
      r.get(phy_j, "channel_bandwidth_mhz", s.phy.channel_bandwidth_mhz, "phy");
  s.phy.frame_duration_ms = r.get(phy_j, "frame_duration_ms", s.phy.frame_duration_ms, "phy");
  if (phy_j.contains("mcs_table")) {
    s.phy.mcs_table.clear();
    std::size_t i = 0;
    for (const auto& row : phy_j.at("mcs_table")) {
      const std::string where = "phy.mcs_table[" + std::to_string(i++) + "]";
      phy::McsProfile p;
      const auto mod = phy::parse_modulation(r.get<std::string>(row, "modulation", "", where));
      const auto coding = detail::parse_coding(r.get<std::string>(row, "coding", "", where));
      if (!mod) r.fail(where + ".modulation must be QPSK, 16QAM or 64QAM");
      if (!coding) r.fail(where + ".coding must look like '3/4'");
      p.modulation = mod.value_or(phy::Modulation::QPSK);
      p.coding = coding.value_or(phy::CodingRate{1, 2});
      p.bits_per_symbol = r.get(row, "bits_per_symbol", 0.0, where);
      p.min_sinr_db = r.get(row, "min_sinr_db", 0.0, where);
      p.dl_rate_mbps = r.get(row, "dl_rate_mbps", 0.0, where);
      p.ul_rate_mbps = r.get(row, "ul_rate_mbps", 0.0, where);
      s.phy.mcs_table.push_back(p);
    }
  }

  const json& mcs = cfg.value("mcs", empty);
  const auto mode = r.get<std::string>(mcs, "mode", "adaptive", "mcs");
  if (mode == "fixed") {
    const auto name = r.get<std::string>(mcs, "profile", "", "mcs");
    const auto* p = phy::find_profile(s.phy.mcs_table, name);
    if (!p) {
      r.fail("mcs.profile '" + name + "' is not in the MCS table");
    } else {
      s.mcs_mode = engine::FixedMcs{*p, r.get(mcs, "force", false, "mcs")};
    }
  } else if (mode != "adaptive") {
    r.fail("mcs.mode must be fixed or adaptive");
  }

  const json& lb = cfg.value("link_budget", empty);
  s.budget.tx_power_dbm = r.get(lb, "tx_power_dbm", s.budget.tx_power_dbm, "link_budget");
  s.budget.carrier_freq_mhz =
      r.get(lb, "carrier_freq_mhz", s.budget.carrier_freq_mhz, "link_budget");
  s.budget.bandwidth_hz = r.get(lb, "bandwidth_hz", s.budget.bandwidth_hz, "link_budget");
  s.budget.noise_figure_db =
      r.get(lb, "noise_figure_db", s.budget.noise_figure_db, "link_budget");
  const json& pl = lb.value("path_loss", empty);
  s.budget.model = detail::parse_path_loss(pl, r);
  s.erceg_shadow_sigma_db = r.get(pl, "shadow_sigma_db", 0.0, "link_budget.path_loss");

  const json& wired = cfg.value("wired", empty);
  s.wired.element_count = r.get(wired, "element_count", s.wired.element_count, "wired");
  s.wired.per_element_proc_ms =
      r.get(wired, "per_element_proc_ms", s.wired.per_element_proc_ms, "wired");
  s.wired.per_element_prop_ms =
      r.get(wired, "per_element_prop_ms", s.wired.per_element_prop_ms, "wired");

  std::map<std::string, std::shared_ptr<const traffic::MediaTrace>> sources;
  if (cfg.contains("sources") && cfg.at("sources").is_object()) {
    for (const auto& [name, j] : cfg.at("sources").items()) {
      sources[name] = detail::parse_source(name, j, s.duration_s, base_dir, r);
    }
  }

  if (!cfg.contains("flows") || !cfg.at("flows").is_array()) {
    r.fail("config.flows must be an array");
  } else {
    std::size_t i = 0;
    for (const auto& fj : cfg.at("flows")) {
      const std::string where = "flows[" + std::to_string(i++) + "]";
      engine::FlowSpec f;
      f.id = r.get<std::string>(fj, "id", where, where);
      const auto cls = r.get<std::string>(fj, "class", "", where);
      if (auto c = mac::parse_class(cls)) {
        f.cls = *c;
      } else {
        r.fail(where + ".class '" + cls + "' is not one of UGS, ertPS, rtPS, nrtPS, BE");
      }
      f.qos = detail::parse_qos(fj.value("qos", empty), r, where + ".qos");
      f.queue_capacity_bytes =
          r.get(fj, "queue_capacity_bytes", f.queue_capacity_bytes, where);
      f.measured = r.get(fj, "measured", true, where);
      const auto src = r.get<std::string>(fj, "source", f.id, where);
      if (auto it = sources.find(src); it != sources.end()) {
        f.source = it->second;
      } else {
        r.fail(where + ".source '" + src + "' is not defined under sources");
      }
      s.flows.push_back(std::move(f));
    }
  }

  for (auto& issue : engine::validate(s)) {
    // Flows with a failed source were already reported.
    if (issue.find("has no traffic source") != std::string::npos) continue;
    issues.push_back(std::move(issue));
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return s;
}

inline engine::Scenario load_scenario(const std::filesystem::path& path) {
  return build_scenario(load_json(path), path.parent_path());
}

}  // namespace iptvsim::config
