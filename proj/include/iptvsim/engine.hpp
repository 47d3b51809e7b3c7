#pragma once

// Deterministic discrete-event run of one downlink streaming scenario.
//
// Event order is (time, rank, sequence): deadline sweeps before arrivals
// before MAC frame boundaries, ties within a rank broken by insertion order.
//
// Packet path: source frame -> packetize -> wired hops
// (element_count x (proc + prop)) -> base-station flow queue -> per-frame
// grant -> air interface -> subscriber. A packet may be fragmented across
// MAC frames; it is delivered when its last bit is sent.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iptvsim/common.hpp"
#include "iptvsim/mac.hpp"
#include "iptvsim/metrics.hpp"
#include "iptvsim/outcome.hpp"
#include "iptvsim/phy.hpp"
#include "iptvsim/propagation.hpp"
#include "iptvsim/traffic.hpp"

namespace iptvsim::engine {

struct Cell {
  double radius_km = 0.2;
  int bs_count = 7;
  double ss_distance_m = 150.0;
};

struct WiredPath {
  int element_count = 2;
  double per_element_proc_ms = 0.05;
  double per_element_prop_ms = 0.25;
};

/// MCS pinned per subscriber. Without `force` the link is gated by the
/// profile's SINR threshold.
struct FixedMcs {
  phy::McsProfile profile;
  bool force = false;
};

struct AdaptiveMcs {};

using McsMode = std::variant<FixedMcs, AdaptiveMcs>;

struct FlowSpec {
  std::string id;
  mac::ServiceClass cls = mac::ServiceClass::rtPS;
  mac::QosParams qos;
  std::uint64_t queue_capacity_bytes = mac::kDefaultQueueCapacityBytes;
  std::shared_ptr<const traffic::MediaTrace> source;
  // Cross traffic is simulated but left out of the aggregate report.
  bool measured = true;
};

struct Scenario {
  double duration_s = 60.0;
  std::uint64_t seed = 1;
  Cell cell;
  phy::PhyProfile phy;
  McsMode mcs_mode = AdaptiveMcs{};
  propagation::LinkBudget budget;
  /// Standard deviation of a per-run Erceg shadowing draw; 0 disables it.
  double erceg_shadow_sigma_db = 0.0;
  WiredPath wired;
  std::uint32_t mtu_payload_bytes = 1460;
  std::vector<FlowSpec> flows;
};

/// Every violated scenario invariant, as readable messages.
inline std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> issues;
  if (!(s.duration_s > 0.0)) issues.emplace_back("duration_s must be positive");
  if (!(s.cell.radius_km > 0.0)) issues.emplace_back("cell.radius_km must be positive");
  if (s.cell.bs_count < 1) issues.emplace_back("cell.bs_count must be >= 1");
  if (!(s.cell.ss_distance_m > 0.0)) {
    issues.emplace_back("cell.ss_distance_m must be positive");
  } else if (s.cell.ss_distance_m > s.cell.radius_km * 1000.0) {
    issues.push_back("cell.ss_distance_m " +
                     detail::format_double(s.cell.ss_distance_m) +
                     " m lies outside the cell radius of " +
                     detail::format_double(s.cell.radius_km * 1000.0) + " m");
  }
  if (!(s.phy.frame_duration_ms > 0.0)) {
    issues.emplace_back("phy.frame_duration_ms must be positive");
  }
  if (!(s.phy.channel_bandwidth_mhz > 0.0)) {
    issues.emplace_back("phy.channel_bandwidth_mhz must be positive");
  }
  for (auto& p : phy::check_table(s.phy.mcs_table)) issues.push_back(std::move(p));
  if (const auto* fixed = std::get_if<FixedMcs>(&s.mcs_mode)) {
    if (auto p = phy::check_profile(fixed->profile)) issues.push_back(*p);
  }
  try {
    s.budget.validate();
    if (s.cell.ss_distance_m > 0.0) {
      (void)propagation::compute_sinr(s.budget, s.cell.ss_distance_m);
    }
  } catch (const DomainError& e) {
    issues.emplace_back(std::string("link budget: ") + e.what());
  }
  if (s.erceg_shadow_sigma_db < 0.0) {
    issues.emplace_back("erceg shadow sigma must be >= 0");
  }
  if (s.wired.element_count < 0) issues.emplace_back("wired.element_count must be >= 0");
  if (s.wired.per_element_proc_ms < 0.0 || s.wired.per_element_prop_ms < 0.0) {
    issues.emplace_back("wired delays must be >= 0");
  }
  if (s.mtu_payload_bytes == 0) issues.emplace_back("mtu_payload_bytes must be positive");
  std::set<std::string> ids;
  for (const auto& f : s.flows) {
    if (!ids.insert(f.id).second) issues.push_back("duplicate flow id '" + f.id + "'");
    for (const auto& v : mac::validate_flow(f.cls, f.qos)) {
      issues.push_back("flow '" + f.id + "': " + v.message);
    }
    if (!f.source) issues.push_back("flow '" + f.id + "' has no traffic source");
    if (f.queue_capacity_bytes == 0) {
      issues.push_back("flow '" + f.id + "': queue capacity must be positive");
    }
  }
  return issues;
}

/// Radio link as resolved at the start of a run. The geometry is static, so
/// the SINR seen at every frame boundary is this value.
struct LinkState {
  double sinr_db = 0.0;
  double shadow_draw_db = 0.0;
  std::optional<phy::McsProfile> active;  // empty: outage
  phy::McsProfile nominal;                // profile the scheduler sizes frames by
};

/// Jitter schedule of each flow, from its source's nominal frame rate.
inline std::vector<metrics::StreamInfo> streams_of(const Scenario& s) {
  std::vector<metrics::StreamInfo> out;
  for (const auto& f : s.flows) {
    if (f.source) out.push_back({f.id, f.source->nominal_interarrival_ms()});
  }
  return out;
}

inline std::vector<metrics::StreamInfo> measured_streams(const Scenario& s) {
  std::vector<metrics::StreamInfo> out;
  for (const auto& f : s.flows) {
    if (f.source && f.measured) out.push_back({f.id, f.source->nominal_interarrival_ms()});
  }
  return out;
}

/// Outcomes of the flows that count toward the aggregate report.
inline std::vector<PacketOutcome> measured_outcomes(const Scenario& s,
                                                    std::span<const PacketOutcome> all) {
  std::set<std::string> measured;
  for (const auto& f : s.flows) {
    if (f.measured) measured.insert(f.id);
  }
  std::vector<PacketOutcome> kept;
  for (const auto& o : all) {
    if (measured.count(o.flow)) kept.push_back(o);
  }
  return kept;
}

struct RunResult {
  LinkState link;
  metrics::MetricsReport report;
  std::vector<PacketOutcome> outcomes;
};

namespace detail {

// Bit-exact across standard libraries, unlike std::normal_distribution.
inline double standard_normal(std::mt19937_64& rng) {
  const auto uniform = [&] {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline LinkState resolve_link(const Scenario& s) {
  LinkState link;
  propagation::LinkBudget budget = s.budget;
  if (auto* erceg = std::get_if<propagation::ErcegSuburban>(&budget.model);
      erceg && s.erceg_shadow_sigma_db > 0.0) {
    std::mt19937_64 rng(s.seed);
    link.shadow_draw_db = s.erceg_shadow_sigma_db * standard_normal(rng);
    erceg->shadow_db += link.shadow_draw_db;
  }
  link.sinr_db = propagation::compute_sinr(budget, s.cell.ss_distance_m);
  if (const auto* fixed = std::get_if<FixedMcs>(&s.mcs_mode)) {
    link.nominal = fixed->profile;
    if (fixed->force || link.sinr_db >= fixed->profile.min_sinr_db) {
      link.active = fixed->profile;
    }
  } else {
    link.nominal = s.phy.mcs_table.front();
    link.active = phy::select_mcs(s.phy.mcs_table, link.sinr_db);
  }
  return link;
}

enum class EventKind : std::uint8_t { DeadlineSweep, SourceFrame, BsArrival, FrameBoundary };

inline int rank_of(EventKind k) {
  switch (k) {
    case EventKind::DeadlineSweep:
      return 0;
    case EventKind::SourceFrame:
    case EventKind::BsArrival:
      return 1;
    case EventKind::FrameBoundary:
      return 2;
  }
  return 3;
}

struct Event {
  double t_ms;
  int rank;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t a;  // flow index, or batch index for arrivals
  std::uint64_t b;  // frame index / MAC frame number

  bool operator>(const Event& o) const {
    if (t_ms != o.t_ms) return t_ms > o.t_ms;
    if (rank != o.rank) return rank > o.rank;
    return seq > o.seq;
  }
};

class Simulation {
public:
  explicit Simulation(const Scenario& s) : s_(s), link_(resolve_link(s)) {
    duration_ms_ = s.duration_s * 1000.0;
    wired_delay_ms_ = s.wired.element_count *
                      (s.wired.per_element_proc_ms + s.wired.per_element_prop_ms);
    d_proc_ms_ = s.wired.per_element_proc_ms * (s.wired.element_count + 1);
    d_prop_ms_ = s.wired.per_element_prop_ms * s.wired.element_count +
                 propagation::radio_propagation_ms(s.cell.ss_distance_m);
    for (const auto& f : s.flows) {
      flows_.emplace_back(f.id, f.cls, f.qos, f.queue_capacity_bytes);
    }
    for (std::size_t i = 0; i < s.flows.size(); ++i) service_order_.push_back(i);
    std::stable_sort(service_order_.begin(), service_order_.end(),
                     [&](std::size_t x, std::size_t y) {
                       return static_cast<int>(s.flows[x].cls) <
                              static_cast<int>(s.flows[y].cls);
                     });
  }

  RunResult run() {
    for (std::size_t fi = 0; fi < s_.flows.size(); ++fi) {
      const auto& trace = *s_.flows[fi].source;
      for (std::size_t k = 0; k < trace.frames.size(); ++k) {
        if (trace.frames[k].t_ms >= duration_ms_) break;
        push(trace.frames[k].t_ms, EventKind::SourceFrame, fi, k);
      }
    }
    schedule_mac_frame(0);

    while (!events_.empty() && events_.top().t_ms < duration_ms_) {
      const Event ev = events_.top();
      events_.pop();
      switch (ev.kind) {
        case EventKind::DeadlineSweep:
          on_sweep(ev.t_ms);
          break;
        case EventKind::SourceFrame:
          on_source_frame(ev.t_ms, ev.a, ev.b);
          break;
        case EventKind::BsArrival:
          on_arrival(ev.t_ms, ev.a);
          break;
        case EventKind::FrameBoundary:
          on_frame(ev.t_ms, ev.b);
          break;
      }
    }

    const auto streams = streams_of(s_);
    RunResult result;
    result.link = link_;
    result.report = metrics::summarize(outcomes_, streams, s_.duration_s);
    if (std::any_of(s_.flows.begin(), s_.flows.end(),
                    [](const FlowSpec& f) { return !f.measured; })) {
      auto all_flows = std::move(result.report.flows);
      result.report = metrics::summarize(measured_outcomes(s_, outcomes_),
                                         measured_streams(s_), s_.duration_s);
      result.report.flows = std::move(all_flows);
    }
    result.outcomes = std::move(outcomes_);
    return result;
  }

private:
  void push(double t, EventKind kind, std::uint64_t a, std::uint64_t b) {
    events_.push({t, rank_of(kind), seq_++, kind, a, b});
  }

  void schedule_mac_frame(std::uint64_t n) {
    const double t = static_cast<double>(n) * s_.phy.frame_duration_ms;
    if (t >= duration_ms_) return;
    push(t, EventKind::DeadlineSweep, 0, n);
    push(t, EventKind::FrameBoundary, 0, n);
  }

  void drop(const mac::Packet& p, DropReason why, double t) {
    auto& o = outcomes_[p.id];
    o.status = PacketStatus::Dropped;
    o.reason = why;
    o.dropped_at_ms = t;
  }

  void on_source_frame(double t, std::uint64_t flow, std::uint64_t k) {
    const auto& spec = s_.flows[flow];
    auto batch = traffic::packetize(spec.source->frames[k], s_.mtu_payload_bytes);
    for (auto& p : batch) {
      p.id = outcomes_.size();
      p.flow = static_cast<std::uint32_t>(flow);
      PacketOutcome o;
      o.packet_id = p.id;
      o.flow = spec.id;
      o.frame_index = p.frame_index;
      o.size_bytes = p.size_bytes;
      o.created_at_ms = t;
      outcomes_.push_back(std::move(o));
    }
    batches_.push_back(std::move(batch));
    push(t + wired_delay_ms_, EventKind::BsArrival, batches_.size() - 1, 0);
  }

  void on_arrival(double t, std::uint64_t batch) {
    for (auto& p : batches_[batch]) {
      if (flows_[p.flow].enqueue_packet(p, t) == mac::EnqueueResult::BufferOverflow) {
        drop(p, DropReason::BufferOverflow, t);
      }
    }
    batches_[batch].clear();
    batches_[batch].shrink_to_fit();
  }

  void on_sweep(double t) {
    for (auto& f : flows_) {
      for (const auto& p : f.expire_deadlines(t)) drop(p, DropReason::DeadlineExpired, t);
    }
  }

  void on_frame(double t, std::uint64_t n) {
    const phy::McsProfile& mcs = link_.active ? *link_.active : link_.nominal;
    const auto capacity =
        phy::frame_capacity_bits(mcs, s_.phy.frame_duration_ms, phy::Direction::Downlink);
    const auto grants = mac::schedule_frame(std::span<const mac::ServiceFlow>(flows_),
                                            capacity, s_.phy.frame_duration_ms, n);
    if (!link_.active) {
      for (std::size_t fi : service_order_) {
        for (const auto& p : flows_[fi].discard(grants.at(flows_[fi].id()))) {
          drop(p, DropReason::LinkOutage, t);
        }
      }
    } else {
      const double rate = phy::rate_bps(mcs, phy::Direction::Downlink);
      std::uint64_t offset = 0;
      for (std::size_t fi : service_order_) {
        const std::uint64_t grant = grants.at(flows_[fi].id());
        flows_[fi].transmit(grant, [&](const mac::Packet& p, std::uint64_t used) {
          const double done_ms =
              t + static_cast<double>(offset + used) / rate * 1000.0;
          complete(p, done_ms, mcs);
        });
        offset += grant;
      }
    }
    schedule_mac_frame(n + 1);
  }

  void complete(const mac::Packet& p, double done_ms, const phy::McsProfile& mcs) {
    auto& o = outcomes_[p.id];
    o.status = PacketStatus::Delivered;
    o.d_trans_ms = phy::tx_time(p.size_bytes, mcs, phy::Direction::Downlink) * 1000.0;
    o.d_queue_ms = std::max(0.0, done_ms - o.d_trans_ms - p.enqueued_at_ms);
    o.d_proc_ms = d_proc_ms_;
    o.d_prop_ms = d_prop_ms_;
    o.delivered_at_ms =
        o.created_at_ms + o.d_proc_ms + o.d_queue_ms + o.d_trans_ms + o.d_prop_ms;
  }

  const Scenario& s_;
  LinkState link_;
  double duration_ms_ = 0.0;
  double wired_delay_ms_ = 0.0;
  double d_proc_ms_ = 0.0;
  double d_prop_ms_ = 0.0;
  std::vector<mac::ServiceFlow> flows_;
  std::vector<std::size_t> service_order_;
  std::vector<std::vector<mac::Packet>> batches_;
  std::vector<PacketOutcome> outcomes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
};

}  // namespace detail

/// Runs a validated scenario to completion. Identical scenarios (seed
/// included) give identical results.
inline RunResult run(const Scenario& scenario) {
  if (auto issues = validate(scenario); !issues.empty()) {
    throw DomainError("run: invalid scenario: " + issues.front());
  }
  return detail::Simulation(scenario).run();
}

}  // namespace iptvsim::engine
