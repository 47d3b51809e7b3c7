#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace iptvsim {

enum class DropReason { BufferOverflow, DeadlineExpired, LinkOutage };

inline constexpr std::size_t kDropReasonCount = 3;

inline std::string_view drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::BufferOverflow:
      return "buffer_overflow";
    case DropReason::DeadlineExpired:
      return "deadline_expired";
    case DropReason::LinkOutage:
      return "link_outage";
  }
  return "?";
}

enum class PacketStatus { Delivered, Dropped, InFlight };

inline std::string_view status_name(PacketStatus s) {
  switch (s) {
    case PacketStatus::Delivered:
      return "delivered";
    case PacketStatus::Dropped:
      return "dropped";
    case PacketStatus::InFlight:
      return "in_flight";
  }
  return "?";
}

/// Fate of one packet. Delay components are in milliseconds; for a
/// delivered packet delivered_at_ms == created_at_ms + their sum.
struct PacketOutcome {
  std::uint64_t packet_id = 0;
  std::string flow;
  std::uint64_t frame_index = 0;
  std::uint32_t size_bytes = 0;
  PacketStatus status = PacketStatus::InFlight;
  std::optional<DropReason> reason;
  double created_at_ms = 0.0;
  std::optional<double> delivered_at_ms;
  std::optional<double> dropped_at_ms;
  double d_proc_ms = 0.0;
  double d_queue_ms = 0.0;
  double d_trans_ms = 0.0;
  double d_prop_ms = 0.0;
};

}  // namespace iptvsim
