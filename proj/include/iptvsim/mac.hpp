#pragma once

// 802.16 MAC service flows: QoS parameter sets per scheduling class,
// per-flow FIFO queues with deadline expiry, and a strict-priority per-frame
// grant scheduler.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iptvsim/common.hpp"
#include "iptvsim/outcome.hpp"

namespace iptvsim::mac {

enum class ServiceClass { UGS, ertPS, rtPS, nrtPS, BE };

/// Scheduling precedence, highest first.
inline constexpr std::array<ServiceClass, 5> kClassPriority = {
    ServiceClass::UGS, ServiceClass::ertPS, ServiceClass::rtPS,
    ServiceClass::nrtPS, ServiceClass::BE};

inline std::string_view class_name(ServiceClass c) {
  switch (c) {
    case ServiceClass::UGS:
      return "UGS";
    case ServiceClass::ertPS:
      return "ertPS";
    case ServiceClass::rtPS:
      return "rtPS";
    case ServiceClass::nrtPS:
      return "nrtPS";
    case ServiceClass::BE:
      return "BE";
  }
  return "?";
}

inline std::optional<ServiceClass> parse_class(std::string_view s) {
  for (auto c : kClassPriority) {
    if (class_name(c) == s) return c;
  }
  return std::nullopt;
}

struct QosParams {
  std::optional<double> max_sustained_rate_bps;
  std::optional<double> min_reserved_rate_bps;
  std::optional<double> max_latency_ms;
  std::optional<double> tolerated_jitter_ms;
  std::optional<int> traffic_priority;
};

enum class QosParam {
  MaxSustainedRate,
  MinReservedRate,
  MaxLatency,
  ToleratedJitter,
  TrafficPriority
};

inline std::string_view param_name(QosParam p) {
  switch (p) {
    case QosParam::MaxSustainedRate:
      return "max_sustained_rate_bps";
    case QosParam::MinReservedRate:
      return "min_reserved_rate_bps";
    case QosParam::MaxLatency:
      return "max_latency_ms";
    case QosParam::ToleratedJitter:
      return "tolerated_jitter_ms";
    case QosParam::TrafficPriority:
      return "traffic_priority";
  }
  return "?";
}

/// Which parameters a class carries (rows of the applicability matrix).
inline bool applicable(ServiceClass c, QosParam p) {
  using C = ServiceClass;
  using P = QosParam;
  switch (p) {
    case P::MaxSustainedRate:
      return true;
    case P::MinReservedRate:
      return c == C::rtPS || c == C::ertPS || c == C::nrtPS;
    case P::MaxLatency:
      return c == C::UGS || c == C::rtPS || c == C::ertPS;
    case P::ToleratedJitter:
      return c == C::UGS;
    case P::TrafficPriority:
      return c == C::nrtPS || c == C::BE;
  }
  return false;
}

struct Violation {
  enum class Kind { NotApplicable, Missing, OutOfRange };
  Kind kind;
  QosParam param;
  std::string message;
};

/// Checks a QoS parameter set against its class. Empty result means valid.
inline std::vector<Violation> validate_flow(ServiceClass cls,
                                            const QosParams& qos) {
  std::vector<Violation> out;
  const auto check = [&](QosParam p, bool present) {
    const bool allowed = applicable(cls, p);
    const std::string who =
        std::string(param_name(p)) + " for " + std::string(class_name(cls));
    if (present && !allowed) {
      out.push_back({Violation::Kind::NotApplicable, p, who + " is not applicable"});
    } else if (!present && allowed) {
      out.push_back({Violation::Kind::Missing, p, who + " is required"});
    }
  };
  check(QosParam::MaxSustainedRate, qos.max_sustained_rate_bps.has_value());
  check(QosParam::MinReservedRate, qos.min_reserved_rate_bps.has_value());
  check(QosParam::MaxLatency, qos.max_latency_ms.has_value());
  check(QosParam::ToleratedJitter, qos.tolerated_jitter_ms.has_value());
  check(QosParam::TrafficPriority, qos.traffic_priority.has_value());

  const auto range = [&](QosParam p, std::string msg) {
    out.push_back({Violation::Kind::OutOfRange, p, std::move(msg)});
  };
  if (qos.max_sustained_rate_bps && !(*qos.max_sustained_rate_bps > 0.0)) {
    range(QosParam::MaxSustainedRate, "max_sustained_rate_bps must be positive");
  }
  if (qos.min_reserved_rate_bps && *qos.min_reserved_rate_bps < 0.0) {
    range(QosParam::MinReservedRate, "min_reserved_rate_bps must be >= 0");
  }
  if (qos.min_reserved_rate_bps && qos.max_sustained_rate_bps &&
      *qos.min_reserved_rate_bps > *qos.max_sustained_rate_bps) {
    range(QosParam::MinReservedRate,
          "min_reserved_rate_bps exceeds max_sustained_rate_bps");
  }
  if (qos.max_latency_ms && !(*qos.max_latency_ms > 0.0)) {
    range(QosParam::MaxLatency, "max_latency_ms must be positive");
  }
  if (qos.tolerated_jitter_ms && *qos.tolerated_jitter_ms < 0.0) {
    range(QosParam::ToleratedJitter, "tolerated_jitter_ms must be >= 0");
  }
  if (qos.traffic_priority &&
      (*qos.traffic_priority < 0 || *qos.traffic_priority > 7)) {
    range(QosParam::TrafficPriority, "traffic_priority must be in 0..7");
  }
  return out;
}

struct Packet {
  std::uint64_t id = 0;
  std::uint32_t flow = 0;
  std::uint32_t size_bytes = 0;
  double created_at_ms = 0.0;
  double enqueued_at_ms = 0.0;
  std::uint64_t frame_index = 0;
  std::optional<double> deadline_ms;
  std::uint64_t sent_bits = 0;  // progress of a fragmented transmission

  std::uint64_t size_bits() const { return std::uint64_t{8} * size_bytes; }
  std::uint64_t remaining_bits() const { return size_bits() - sent_bits; }
  bool in_transmission() const { return sent_bits > 0; }
};

inline constexpr std::uint64_t kDefaultQueueCapacityBytes = 2'000'000;

enum class EnqueueResult { Accepted, BufferOverflow };

/// Bits a rate may use in one frame.
inline std::uint64_t per_frame_bits(double rate_bps, double frame_duration_ms) {
  return static_cast<std::uint64_t>(
      std::floor(rate_bps * frame_duration_ms / 1000.0 + 1e-7));
}

class ServiceFlow {
public:
  ServiceFlow(std::string id, ServiceClass cls, QosParams qos,
              std::uint64_t queue_capacity_bytes = kDefaultQueueCapacityBytes)
      : id_(std::move(id)),
        class_(cls),
        qos_(qos),
        capacity_bytes_(queue_capacity_bytes) {}

  const std::string& id() const { return id_; }
  ServiceClass service_class() const { return class_; }
  const QosParams& qos() const { return qos_; }
  std::uint64_t queue_capacity_bytes() const { return capacity_bytes_; }
  std::uint64_t queued_bytes() const { return queued_bytes_; }
  std::uint64_t backlog_bits() const { return backlog_bits_; }
  const std::deque<Packet>& queue() const { return queue_; }
  bool empty() const { return queue_.empty(); }

  /// Appends the packet unless it would overflow the buffer. Stamps the
  /// enqueue time and, for classes with a latency bound, the deadline.
  EnqueueResult enqueue_packet(Packet pkt, double now_ms) {
    detail::require(pkt.size_bytes > 0, "enqueue_packet: empty packet");
    if (queued_bytes_ + pkt.size_bytes > capacity_bytes_) {
      return EnqueueResult::BufferOverflow;
    }
    pkt.enqueued_at_ms = now_ms;
    if (qos_.max_latency_ms) {
      pkt.deadline_ms = now_ms + *qos_.max_latency_ms;
    } else {
      pkt.deadline_ms.reset();
    }
    queued_bytes_ += pkt.size_bytes;
    backlog_bits_ += pkt.remaining_bits();
    queue_.push_back(std::move(pkt));
    return EnqueueResult::Accepted;
  }

  /// Removes every queued packet whose deadline lies strictly before now.
  /// A packet already partly on the air is committed and never expires.
  std::vector<Packet> expire_deadlines(double now_ms) {
    std::vector<Packet> expired;
    if (!qos_.max_latency_ms) return expired;
    std::deque<Packet> kept;
    for (auto& p : queue_) {
      if (!p.in_transmission() && p.deadline_ms && *p.deadline_ms < now_ms) {
        queued_bytes_ -= p.size_bytes;
        backlog_bits_ -= p.remaining_bits();
        expired.push_back(std::move(p));
      } else {
        kept.push_back(std::move(p));
      }
    }
    queue_.swap(kept);
    return expired;
  }

  /// Sends up to `bits` from the head of the queue. Packets finish in FIFO
  /// order; `on_complete(packet, bit_offset_at_completion)` fires for each
  /// one that finishes, where the offset counts bits sent within this call.
  template <typename OnComplete>
  std::uint64_t transmit(std::uint64_t bits, OnComplete&& on_complete) {
    std::uint64_t used = 0;
    while (used < bits && !queue_.empty()) {
      Packet& head = queue_.front();
      const std::uint64_t step = std::min(bits - used, head.remaining_bits());
      head.sent_bits += step;
      used += step;
      backlog_bits_ -= step;
      if (head.remaining_bits() == 0) {
        Packet done = std::move(head);
        queue_.pop_front();
        queued_bytes_ -= done.size_bytes;
        on_complete(done, used);
      }
    }
    return used;
  }

  /// Removes packets that a grant of `bits` would touch (used on a link
  /// that cannot be decoded).
  std::vector<Packet> discard(std::uint64_t bits) {
    std::vector<Packet> out;
    std::uint64_t used = 0;
    while (used < bits && !queue_.empty()) {
      Packet p = std::move(queue_.front());
      queue_.pop_front();
      used += p.remaining_bits();
      queued_bytes_ -= p.size_bytes;
      backlog_bits_ -= p.remaining_bits();
      out.push_back(std::move(p));
    }
    return out;
  }

  /// Empties the queue, returning what was left.
  std::vector<Packet> drain() {
    std::vector<Packet> out(std::make_move_iterator(queue_.begin()),
                            std::make_move_iterator(queue_.end()));
    queue_.clear();
    queued_bytes_ = 0;
    backlog_bits_ = 0;
    return out;
  }

private:
  std::string id_;
  ServiceClass class_;
  QosParams qos_;
  std::uint64_t capacity_bytes_;
  std::deque<Packet> queue_;
  std::uint64_t queued_bytes_ = 0;
  std::uint64_t backlog_bits_ = 0;
};

/// What the scheduler needs to know about one flow in one frame.
struct FlowDemand {
  std::string id;
  ServiceClass cls = ServiceClass::BE;
  QosParams qos;
  std::uint64_t backlog_bits = 0;
};

using Grants = std::map<std::string, std::uint64_t>;

/// Per-frame grant policy.
///
/// Classes are served in strict priority UGS > ertPS > rtPS > nrtPS > BE.
/// UGS gets its fixed max-sustained grant whether or not it has backlog.
/// ertPS gets the same fixed grant shrunk to its backlog.
/// rtPS and nrtPS flows are first topped up to their reserved rate,
/// then given the rest of their backlog, before the next class is looked
/// at. BE takes what is left. Every grant is capped at the flow's max
/// sustained rate for the frame. `round` rotates the round-robin start
/// within a class; nrtPS and BE are additionally ordered by traffic
/// priority (higher first).
inline Grants schedule_frame(std::span<const FlowDemand> flows,
                             std::uint64_t capacity_bits,
                             double frame_duration_ms, std::uint64_t round = 0) {
  detail::require(frame_duration_ms > 0.0,
                  "schedule_frame: frame duration must be positive");
  Grants grants;
  for (const auto& f : flows) grants[f.id] = 0;
  std::uint64_t remaining = capacity_bits;

  const auto cap_of = [&](const FlowDemand& f) {
    return f.qos.max_sustained_rate_bps
               ? per_frame_bits(*f.qos.max_sustained_rate_bps, frame_duration_ms)
               : UINT64_MAX;
  };

  for (ServiceClass cls : kClassPriority) {
    std::vector<const FlowDemand*> members;
    for (const auto& f : flows) {
      if (f.cls == cls) members.push_back(&f);
    }
    if (members.empty()) continue;
    std::sort(members.begin(), members.end(),
              [](const FlowDemand* a, const FlowDemand* b) { return a->id < b->id; });
    std::rotate(members.begin(),
                members.begin() + static_cast<std::ptrdiff_t>(round % members.size()),
                members.end());
    if (cls == ServiceClass::nrtPS || cls == ServiceClass::BE) {
      std::stable_sort(members.begin(), members.end(),
                       [](const FlowDemand* a, const FlowDemand* b) {
                         return a->qos.traffic_priority.value_or(0) >
                                b->qos.traffic_priority.value_or(0);
                       });
    }

    const auto give = [&](const FlowDemand& f, std::uint64_t want) {
      std::uint64_t& g = grants[f.id];
      const std::uint64_t cap = cap_of(f);
      const std::uint64_t headroom = cap > g ? cap - g : 0;
      const std::uint64_t step = std::min({want, headroom, remaining});
      g += step;
      remaining -= step;
    };

    if (cls == ServiceClass::UGS) {
      for (const auto* f : members) give(*f, cap_of(*f));
      continue;
    }
    if (cls == ServiceClass::ertPS) {
      for (const auto* f : members) give(*f, std::min(cap_of(*f), f->backlog_bits));
      continue;
    }
    if (cls != ServiceClass::BE) {
      for (const auto* f : members) {
        const std::uint64_t reserved =
            f->qos.min_reserved_rate_bps
                ? per_frame_bits(*f->qos.min_reserved_rate_bps, frame_duration_ms)
                : 0;
        give(*f, std::min(reserved, f->backlog_bits));
      }
    }
    for (const auto* f : members) {
      const std::uint64_t already = grants[f->id];
      give(*f, f->backlog_bits > already ? f->backlog_bits - already : 0);
    }
  }
  return grants;
}

inline Grants schedule_frame(std::span<const ServiceFlow> flows,
                             std::uint64_t capacity_bits,
                             double frame_duration_ms, std::uint64_t round = 0) {
  std::vector<FlowDemand> demands;
  demands.reserve(flows.size());
  for (const auto& f : flows) {
    demands.push_back({f.id(), f.service_class(), f.qos(), f.backlog_bits()});
  }
  return schedule_frame(std::span<const FlowDemand>(demands), capacity_bits,
                        frame_duration_ms, round);
}

}  // namespace iptvsim::mac
