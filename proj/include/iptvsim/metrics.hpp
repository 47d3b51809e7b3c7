#pragma once

// Packet-level QoS metrics over an outcome log: loss ratio, end-to-end
// delay, schedule-anchored jitter, throughput, and the VoD acceptability
// verdicts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iptvsim/common.hpp"
#include "iptvsim/outcome.hpp"

namespace iptvsim::metrics {

inline constexpr double kPlrLimit = 1e-3;          // inclusive
inline constexpr double kE2eLimitMs = 400.0;       // strict
inline constexpr double kJitterLimitMs = 50.0;     // strict

/// Informational VBR throughput range, kbps. Never used as a gate.
inline constexpr double kThroughputRangeLowKbps = 221.0;
inline constexpr double kThroughputRangeHighKbps = 5311.0;

inline double packet_loss_ratio(std::uint64_t lost, std::uint64_t received) {
  const std::uint64_t total = lost + received;
  if (total == 0) return 0.0;
  return static_cast<double>(lost) / static_cast<double>(total);
}

/// Sum of the four delay components; nullopt unless the packet arrived.
inline std::optional<double> e2e_delay_ms(const PacketOutcome& o) {
  if (o.status != PacketStatus::Delivered) return std::nullopt;
  return o.d_proc_ms + o.d_queue_ms + o.d_trans_ms + o.d_prop_ms;
}

inline double packet_jitter_ms(double t_actual_ms, double t_expected_ms) {
  return t_actual_ms - t_expected_ms;
}

inline double throughput_bps(double delivered_bytes, double window_s) {
  detail::require(window_s > 0.0, "throughput: window must be positive");
  return 8.0 * delivered_bytes / window_s;
}

struct Acceptability {
  bool plr_ok = true;
  bool e2e_ok = true;
  bool jitter_ok = true;

  bool all() const { return plr_ok && e2e_ok && jitter_ok; }
};

inline Acceptability acceptability(double plr, double mean_e2e_ms,
                                   double mean_jitter_ms) {
  return {plr <= kPlrLimit, mean_e2e_ms < kE2eLimitMs,
          mean_jitter_ms < kJitterLimitMs};
}

/// Schedule of one stream: packets of frame k are expected at
/// first_delivery + (k - k_first) * nominal_interarrival.
struct StreamInfo {
  std::string flow;
  double nominal_interarrival_ms = 0.0;
};

struct FlowMetrics {
  std::string flow;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  double plr = 0.0;
  double mean_e2e_ms = 0.0;
  double mean_jitter_ms = 0.0;
  double rfc3550_jitter_ms = 0.0;
  double throughput_bps = 0.0;
};

struct MetricsReport {
  double window_s = 0.0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t in_flight = 0;
  std::array<std::uint64_t, kDropReasonCount> dropped_by_reason{};
  std::uint64_t delivered_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  double plr = 0.0;
  double mean_e2e_ms = 0.0;
  double p99_e2e_ms = 0.0;
  double mean_jitter_ms = 0.0;
  double rfc3550_jitter_ms = 0.0;
  double throughput_bps = 0.0;
  double dropped_bps = 0.0;
  std::vector<FlowMetrics> flows;
  Acceptability verdict;

  std::uint64_t dropped() const {
    std::uint64_t n = 0;
    for (auto c : dropped_by_reason) n += c;
    return n;
  }
};

/// Signed jitter of every delivered packet, keyed by its position in the
/// outcome log. Packets of streams without StreamInfo are skipped.
inline std::map<std::size_t, double> jitter_samples(
    std::span<const PacketOutcome> outcomes, std::span<const StreamInfo> streams) {
  std::map<std::string, double> interarrival;
  for (const auto& s : streams) interarrival[s.flow] = s.nominal_interarrival_ms;

  struct Anchor {
    double t_ms;
    std::uint64_t frame;
  };
  std::map<std::string, Anchor> anchors;
  for (const auto& o : outcomes) {
    if (o.status != PacketStatus::Delivered) continue;
    auto it = anchors.find(o.flow);
    if (it == anchors.end() || *o.delivered_at_ms < it->second.t_ms ||
        (*o.delivered_at_ms == it->second.t_ms && o.frame_index < it->second.frame)) {
      anchors[o.flow] = {*o.delivered_at_ms, o.frame_index};
    }
  }

  std::map<std::size_t, double> out;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.status != PacketStatus::Delivered) continue;
    auto ia = interarrival.find(o.flow);
    if (ia == interarrival.end()) continue;
    const Anchor& a = anchors.at(o.flow);
    const double frames_after =
        static_cast<double>(o.frame_index) - static_cast<double>(a.frame);
    const double expected = a.t_ms + frames_after * ia->second;
    out[i] = packet_jitter_ms(*o.delivered_at_ms, expected);
  }
  return out;
}

namespace detail {

// RFC 3550 interarrival jitter over deliveries in arrival order.
inline double rfc3550_jitter(std::vector<const PacketOutcome*> delivered) {
  std::sort(delivered.begin(), delivered.end(),
            [](const PacketOutcome* a, const PacketOutcome* b) {
              if (*a->delivered_at_ms != *b->delivered_at_ms) {
                return *a->delivered_at_ms < *b->delivered_at_ms;
              }
              return a->packet_id < b->packet_id;
            });
  double j = 0.0;
  for (std::size_t i = 1; i < delivered.size(); ++i) {
    const double transit_now =
        *delivered[i]->delivered_at_ms - delivered[i]->created_at_ms;
    const double transit_prev =
        *delivered[i - 1]->delivered_at_ms - delivered[i - 1]->created_at_ms;
    j += (std::abs(transit_now - transit_prev) - j) / 16.0;
  }
  return j;
}

}  // namespace detail

/// Aggregates an outcome log. `window_s` is the throughput window (the run
/// duration). Dropped packets only count toward loss.
inline MetricsReport summarize(std::span<const PacketOutcome> outcomes,
                               std::span<const StreamInfo> streams,
                               double window_s) {
  iptvsim::detail::require(window_s > 0.0, "summarize: window must be positive");
  MetricsReport r;
  r.window_s = window_s;

  std::map<std::string, FlowMetrics> per_flow;
  std::map<std::string, double> e2e_sum;
  std::map<std::string, std::vector<const PacketOutcome*>> delivered_by_flow;
  for (const auto& s : streams) per_flow[s.flow].flow = s.flow;

  std::vector<double> e2e;
  double e2e_total = 0.0;
  for (const auto& o : outcomes) {
    FlowMetrics& fm = per_flow[o.flow];
    fm.flow = o.flow;
    ++fm.sent;
    ++r.sent;
    switch (o.status) {
      case PacketStatus::Delivered: {
        const double d = *e2e_delay_ms(o);
        ++fm.delivered;
        fm.delivered_bytes += o.size_bytes;
        e2e_sum[o.flow] += d;
        delivered_by_flow[o.flow].push_back(&o);
        ++r.delivered;
        r.delivered_bytes += o.size_bytes;
        e2e.push_back(d);
        e2e_total += d;
        break;
      }
      case PacketStatus::Dropped:
        ++fm.dropped;
        fm.dropped_bytes += o.size_bytes;
        ++r.dropped_by_reason[static_cast<std::size_t>(*o.reason)];
        r.dropped_bytes += o.size_bytes;
        break;
      case PacketStatus::InFlight:
        ++fm.in_flight;
        ++r.in_flight;
        break;
    }
  }

  const auto jitter = jitter_samples(outcomes, streams);
  std::map<std::string, std::pair<double, std::uint64_t>> jitter_by_flow;
  double jitter_total = 0.0;
  for (const auto& [idx, j] : jitter) {
    auto& acc = jitter_by_flow[outcomes[idx].flow];
    acc.first += std::abs(j);
    ++acc.second;
    jitter_total += std::abs(j);
  }

  r.plr = packet_loss_ratio(r.dropped(), r.delivered);
  if (!e2e.empty()) {
    r.mean_e2e_ms = e2e_total / static_cast<double>(e2e.size());
    std::sort(e2e.begin(), e2e.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(e2e.size())));
    r.p99_e2e_ms = e2e[std::max<std::size_t>(rank, 1) - 1];
  }
  if (!jitter.empty()) {
    r.mean_jitter_ms = jitter_total / static_cast<double>(jitter.size());
  }
  r.throughput_bps = throughput_bps(static_cast<double>(r.delivered_bytes), window_s);
  r.dropped_bps = throughput_bps(static_cast<double>(r.dropped_bytes), window_s);

  double rfc_sum = 0.0;
  std::size_t rfc_n = 0;
  for (auto& [name, fm] : per_flow) {
    fm.plr = packet_loss_ratio(fm.dropped, fm.delivered);
    if (fm.delivered > 0) {
      fm.mean_e2e_ms = e2e_sum[name] / static_cast<double>(fm.delivered);
    }
    if (auto it = jitter_by_flow.find(name); it != jitter_by_flow.end()) {
      fm.mean_jitter_ms = it->second.first / static_cast<double>(it->second.second);
    }
    if (auto it = delivered_by_flow.find(name); it != delivered_by_flow.end()) {
      fm.rfc3550_jitter_ms = detail::rfc3550_jitter(it->second);
      if (it->second.size() > 1) {
        rfc_sum += fm.rfc3550_jitter_ms;
        ++rfc_n;
      }
    }
    fm.throughput_bps =
        throughput_bps(static_cast<double>(fm.delivered_bytes), window_s);
    r.flows.push_back(fm);
  }
  if (rfc_n > 0) r.rfc3550_jitter_ms = rfc_sum / static_cast<double>(rfc_n);

  r.verdict = acceptability(r.plr, r.mean_e2e_ms, r.mean_jitter_ms);
  return r;
}

inline Acceptability acceptability(const MetricsReport& r) {
  return acceptability(r.plr, r.mean_e2e_ms, r.mean_jitter_ms);
}

struct TimeBin {
  double t_s = 0.0;
  double throughput_bps = 0.0;
  std::uint64_t drops = 0;
  double mean_e2e_ms = 0.0;
  double mean_jitter_ms = 0.0;
};

/// One-second bins over [0, window). Events past the window fall into the
/// last bin so bin totals match the whole-run totals.
inline std::vector<TimeBin> time_series(std::span<const PacketOutcome> outcomes,
                                        std::span<const StreamInfo> streams,
                                        double window_s) {
  iptvsim::detail::require(window_s > 0.0, "time_series: window must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(window_s - 1e-9));
  std::vector<TimeBin> bins(n);
  std::vector<double> bytes(n, 0.0), e2e_sum(n, 0.0), jit_sum(n, 0.0);
  std::vector<std::uint64_t> e2e_n(n, 0), jit_n(n, 0);
  const auto bin_of = [&](double t_ms) {
    const double s = std::max(0.0, t_ms / 1000.0);
    return std::min(static_cast<std::size_t>(s), n - 1);
  };
  const auto jitter = jitter_samples(outcomes, streams);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.status == PacketStatus::Delivered) {
      const auto b = bin_of(*o.delivered_at_ms);
      bytes[b] += o.size_bytes;
      e2e_sum[b] += *e2e_delay_ms(o);
      ++e2e_n[b];
      if (auto it = jitter.find(i); it != jitter.end()) {
        jit_sum[b] += std::abs(it->second);
        ++jit_n[b];
      }
    } else if (o.status == PacketStatus::Dropped && o.dropped_at_ms) {
      ++bins[bin_of(*o.dropped_at_ms)].drops;
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    const double width = std::min(1.0, window_s - static_cast<double>(b));
    bins[b].t_s = static_cast<double>(b);
    bins[b].throughput_bps = 8.0 * bytes[b] / width;
    if (e2e_n[b] > 0) bins[b].mean_e2e_ms = e2e_sum[b] / static_cast<double>(e2e_n[b]);
    if (jit_n[b] > 0) bins[b].mean_jitter_ms = jit_sum[b] / static_cast<double>(jit_n[b]);
  }
  return bins;
}

}  // namespace iptvsim::metrics
