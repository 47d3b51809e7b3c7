#pragma once

// Serialization of run results: report.json, packets.csv, timeseries.csv.

#include <ostream>
#include <span>
#include <string>
#include <variant>

#include <json.hpp>

#include "iptvsim/common.hpp"
#include "iptvsim/engine.hpp"
#include "iptvsim/metrics.hpp"
#include "iptvsim/outcome.hpp"
#include "iptvsim/propagation.hpp"

namespace iptvsim::report {

using nlohmann::json;

inline json flow_to_json(const metrics::FlowMetrics& f) {
  return json{{"flow", f.flow},
              {"sent", f.sent},
              {"delivered", f.delivered},
              {"dropped", f.dropped},
              {"in_flight", f.in_flight},
              {"delivered_bytes", f.delivered_bytes},
              {"dropped_bytes", f.dropped_bytes},
              {"plr", f.plr},
              {"mean_e2e_ms", f.mean_e2e_ms},
              {"mean_jitter_ms", f.mean_jitter_ms},
              {"rfc3550_jitter_ms", f.rfc3550_jitter_ms},
              {"throughput_bps", f.throughput_bps}};
}

inline json metrics_to_json(const metrics::MetricsReport& r) {
  json dropped = json::object();
  for (std::size_t i = 0; i < kDropReasonCount; ++i) {
    dropped[std::string(drop_reason_name(static_cast<DropReason>(i)))] =
        r.dropped_by_reason[i];
  }
  json flows = json::array();
  for (const auto& f : r.flows) flows.push_back(flow_to_json(f));
  return json{
      {"window_s", r.window_s},
      {"sent", r.sent},
      {"delivered", r.delivered},
      {"in_flight", r.in_flight},
      {"dropped", r.dropped()},
      {"dropped_by_reason", dropped},
      {"delivered_bytes", r.delivered_bytes},
      {"dropped_bytes", r.dropped_bytes},
      {"plr", r.plr},
      {"mean_e2e_ms", r.mean_e2e_ms},
      {"p99_e2e_ms", r.p99_e2e_ms},
      {"mean_jitter_ms", r.mean_jitter_ms},
      {"rfc3550_jitter_ms", r.rfc3550_jitter_ms},
      {"throughput_bps", r.throughput_bps},
      {"dropped_bps", r.dropped_bps},
      {"throughput_reference_kbps",
       json::array({metrics::kThroughputRangeLowKbps, metrics::kThroughputRangeHighKbps})},
      {"acceptability",
       {{"plr_ok", r.verdict.plr_ok},
        {"e2e_ok", r.verdict.e2e_ok},
        {"jitter_ok", r.verdict.jitter_ok}}},
      {"flows", flows}};
}

inline json to_json(const engine::Scenario& s, const engine::RunResult& result) {
  json link{{"sinr_db", result.link.sinr_db},
            {"path_loss_model", std::string(propagation::model_name(s.budget.model))},
            {"distance_m", s.cell.ss_distance_m},
            {"mcs_mode", std::holds_alternative<engine::FixedMcs>(s.mcs_mode) ? "fixed"
                                                                              : "adaptive"},
            {"active_mcs", result.link.active ? json(result.link.active->name()) : json()},
            {"outage", !result.link.active.has_value()}};
  if (result.link.shadow_draw_db != 0.0) link["shadow_draw_db"] = result.link.shadow_draw_db;
  json out = metrics_to_json(result.report);
  for (auto& f : out["flows"]) {
    for (const auto& spec : s.flows) {
      if (spec.id == f["flow"].get<std::string>()) f["measured"] = spec.measured;
    }
  }
  out["seed"] = s.seed;
  out["duration_s"] = s.duration_s;
  out["link"] = std::move(link);
  return out;
}

inline std::string opt_num(const std::optional<double>& v) {
  return v ? detail::format_double(*v) : std::string();
}

inline constexpr const char* kPacketsHeader =
    "packet_id,flow,status,reason,created_ms,delivered_ms,d_proc,d_queue,d_trans,d_prop";

inline void write_packets_csv(std::ostream& out, std::span<const PacketOutcome> outcomes) {
  out << kPacketsHeader << '\n';
  for (const auto& o : outcomes) {
    out << o.packet_id << ',' << o.flow << ',' << status_name(o.status) << ','
        << (o.reason ? drop_reason_name(*o.reason) : "") << ','
        << detail::format_double(o.created_at_ms) << ',' << opt_num(o.delivered_at_ms)
        << ',' << detail::format_double(o.d_proc_ms) << ','
        << detail::format_double(o.d_queue_ms) << ','
        << detail::format_double(o.d_trans_ms) << ','
        << detail::format_double(o.d_prop_ms) << '\n';
  }
}

inline constexpr const char* kTimeSeriesHeader =
    "t_s,throughput_bps,drops,mean_e2e_ms,mean_jitter_ms";

inline void write_timeseries_csv(std::ostream& out,
                                 std::span<const metrics::TimeBin> bins) {
  out << kTimeSeriesHeader << '\n';
  for (const auto& b : bins) {
    out << detail::format_double(b.t_s) << ',' << detail::format_double(b.throughput_bps)
        << ',' << b.drops << ',' << detail::format_double(b.mean_e2e_ms) << ','
        << detail::format_double(b.mean_jitter_ms) << '\n';
  }
}

}  // namespace iptvsim::report
