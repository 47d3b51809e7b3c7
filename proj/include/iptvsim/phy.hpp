#pragma once

// OFDM PHY abstraction: the 5 MHz modulation/coding table, link adaptation
// and rate/time arithmetic. Subcarrier detail is folded into the aggregate
// per-profile rates.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iptvsim/common.hpp"

namespace iptvsim::phy {

enum class Modulation { QPSK, QAM16, QAM64 };
enum class Direction { Downlink, Uplink };

struct CodingRate {
  int numerator = 1;
  int denominator = 2;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  friend bool operator==(const CodingRate&, const CodingRate&) = default;
};

inline std::string_view modulation_name(Modulation m) {
  switch (m) {
    case Modulation::QPSK:
      return "QPSK";
    case Modulation::QAM16:
      return "16QAM";
    case Modulation::QAM64:
      return "64QAM";
  }
  return "?";
}

inline std::optional<Modulation> parse_modulation(std::string_view s) {
  if (s == "QPSK") return Modulation::QPSK;
  if (s == "16QAM" || s == "QAM16") return Modulation::QAM16;
  if (s == "64QAM" || s == "QAM64") return Modulation::QAM64;
  return std::nullopt;
}

struct McsProfile {
  Modulation modulation = Modulation::QPSK;
  CodingRate coding{1, 2};
  double bits_per_symbol = 1.0;
  double min_sinr_db = 5.0;
  double dl_rate_mbps = 3.17;
  double ul_rate_mbps = 2.28;

  /// Canonical name, e.g. "16QAM-3/4".
  std::string name() const {
    return std::string(modulation_name(modulation)) + "-" +
           std::to_string(coding.numerator) + "/" +
           std::to_string(coding.denominator);
  }

  friend bool operator==(const McsProfile&, const McsProfile&) = default;
};

/// Mobile WiMAX 5 MHz table. 64QAM-3/4 carries 4.5 information bits per
/// symbol (6 x 3/4), consistent with its 14.26 Mbps rate.
inline std::vector<McsProfile> default_mcs_table() {
  using M = Modulation;
  return {
      {M::QPSK, {1, 2}, 1.0, 5.0, 3.17, 2.28},
      {M::QPSK, {3, 4}, 1.5, 8.0, 4.75, 3.43},
      {M::QAM16, {1, 2}, 2.0, 10.5, 6.34, 4.57},
      {M::QAM16, {3, 4}, 3.0, 14.0, 9.5, 6.85},
      {M::QAM64, {1, 2}, 3.0, 16.0, 9.5, 6.85},
      {M::QAM64, {2, 3}, 4.0, 18.0, 12.6, 9.14},
      {M::QAM64, {3, 4}, 4.5, 20.0, 14.26, 10.28},
  };
}

/// Profile-level invariants; returns a human readable problem or nullopt.
inline std::optional<std::string> check_profile(const McsProfile& p) {
  const double rate = p.coding.value();
  if (!(rate > 0.0 && rate < 1.0)) {
    return p.name() + ": coding rate must lie in (0, 1)";
  }
  if (!(p.bits_per_symbol > 0.0)) {
    return p.name() + ": bits per symbol must be positive";
  }
  if (!(p.ul_rate_mbps > 0.0 && p.dl_rate_mbps > p.ul_rate_mbps)) {
    return p.name() + ": rates must satisfy dl > ul > 0";
  }
  return std::nullopt;
}

/// Table ordering: min SINR strictly increasing, DL rate non-decreasing.
/// Equal DL rates are allowed (16QAM-3/4 and 64QAM-1/2 share 9.5 Mbps).
inline std::vector<std::string> check_table(std::span<const McsProfile> table) {
  std::vector<std::string> problems;
  if (table.empty()) {
    problems.emplace_back("mcs table is empty");
    return problems;
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (auto p = check_profile(table[i])) {
      problems.push_back(*p);
    }
    if (i > 0) {
      if (!(table[i].min_sinr_db > table[i - 1].min_sinr_db)) {
        problems.push_back("mcs table: min SINR not strictly increasing at " +
                           table[i].name());
      }
      if (table[i].dl_rate_mbps < table[i - 1].dl_rate_mbps) {
        problems.push_back("mcs table: DL rate decreases at " +
                           table[i].name());
      }
    }
  }
  return problems;
}

inline const McsProfile* find_profile(std::span<const McsProfile> table,
                                      std::string_view name) {
  for (const auto& p : table) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

struct PhyProfile {
  double channel_bandwidth_mhz = 5.0;
  double frame_duration_ms = 5.0;
  std::vector<McsProfile> mcs_table = default_mcs_table();
};

/// Adaptive selection: the highest-rate profile whose threshold is met
/// (inclusive). On equal rates the lower-threshold entry wins. Returns
/// nullopt (link outage) below the lowest threshold.
inline std::optional<McsProfile> select_mcs(std::span<const McsProfile> table,
                                            double sinr_db) {
  std::optional<McsProfile> best;
  for (const auto& p : table) {
    if (p.min_sinr_db <= sinr_db &&
        (!best || p.dl_rate_mbps > best->dl_rate_mbps)) {
      best = p;
    }
  }
  return best;
}

inline double rate_bps(const McsProfile& mcs, Direction dir) {
  const double mbps =
      dir == Direction::Downlink ? mcs.dl_rate_mbps : mcs.ul_rate_mbps;
  return std::round(mbps * 1e6);
}

/// Seconds needed to send payload_bytes at the profile rate.
inline double tx_time(double payload_bytes, const McsProfile& mcs,
                      Direction dir) {
  detail::require(payload_bytes >= 0.0, "tx_time: payload must be >= 0");
  return 8.0 * payload_bytes / rate_bps(mcs, dir);
}

inline std::uint64_t frame_capacity_bits(const McsProfile& mcs,
                                         double frame_duration_ms,
                                         Direction dir) {
  detail::require(frame_duration_ms > 0.0,
                  "frame_capacity_bits: frame duration must be positive");
  // The epsilon absorbs representation error in exact products such as
  // 3.17e6 * 5 / 1000.
  return static_cast<std::uint64_t>(
      std::floor(rate_bps(mcs, dir) * frame_duration_ms / 1000.0 + 1e-7));
}

}  // namespace iptvsim::phy
