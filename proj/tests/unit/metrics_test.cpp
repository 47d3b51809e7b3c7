#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "iptvsim/metrics.hpp"
#include "support/synthetic_log.hpp"

namespace m = iptvsim::metrics;
using iptvsim::DropReason;
using iptvsim::PacketOutcome;
using iptvsim::PacketStatus;

TEST(Plr, Examples) {
  EXPECT_EQ(m::packet_loss_ratio(1, 999), 1e-3);
  EXPECT_EQ(m::packet_loss_ratio(0, 17), 0.0);
  EXPECT_EQ(m::packet_loss_ratio(5, 0), 1.0);
  EXPECT_EQ(m::packet_loss_ratio(0, 0), 0.0);
}

TEST(Plr, ComplementSumsToOne) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> n(0, 1'000'000);
  for (int i = 0; i < 1000; ++i) {
    const auto lost = n(rng), got = n(rng) + 1;
    const double received_share =
        static_cast<double>(got) / static_cast<double>(lost + got);
    EXPECT_NEAR(received_share + m::packet_loss_ratio(lost, got), 1.0, 1e-15);
  }
}

TEST(E2e, SumOfComponents) {
  PacketOutcome o;
  o.status = PacketStatus::Delivered;
  o.d_proc_ms = 0.1;
  o.d_queue_ms = 2.0;
  o.d_trans_ms = 3.685;
  o.d_prop_ms = 0.6;
  EXPECT_NEAR(*m::e2e_delay_ms(o), 6.385, 1e-12);
  o.d_proc_ms = o.d_queue_ms = o.d_trans_ms = o.d_prop_ms = 0.0;
  EXPECT_EQ(*m::e2e_delay_ms(o), 0.0);
  o.status = PacketStatus::Dropped;
  EXPECT_FALSE(m::e2e_delay_ms(o).has_value());
}

TEST(Jitter, Examples) {
  EXPECT_EQ(m::packet_jitter_ms(100.0, 100.0), 0.0);
  EXPECT_EQ(m::packet_jitter_ms(105.5, 100.0), 5.5);
}

TEST(Throughput, Examples) {
  EXPECT_EQ(m::throughput_bps(1'250'000, 1.0), 1e7);
  EXPECT_EQ(m::throughput_bps(0, 3.0), 0.0);
  EXPECT_THROW(m::throughput_bps(1, 0.0), iptvsim::DomainError);
}

TEST(Acceptability, Boundaries) {
  EXPECT_TRUE(m::acceptability(1e-3, 6.4, 0.0).all());
  EXPECT_FALSE(m::acceptability(0.01, 6.4, 0.0).plr_ok);
  EXPECT_FALSE(m::acceptability(std::nextafter(1e-3, 1.0), 0, 0).plr_ok);
  EXPECT_FALSE(m::acceptability(0, 400.0, 0).e2e_ok);
  EXPECT_TRUE(m::acceptability(0, std::nextafter(400.0, 0.0), 0).e2e_ok);
  EXPECT_FALSE(m::acceptability(0, 0, 50.0).jitter_ok);
  EXPECT_TRUE(m::acceptability(0, 0, std::nextafter(50.0, 0.0)).jitter_ok);
}

TEST(Summarize, SyntheticLogMatchesHandValues) {
  const auto log = iptvsim::testing::synthetic_log();
  const auto streams = iptvsim::testing::synthetic_streams();
  const iptvsim::testing::LogExpectations want;
  const auto r = m::summarize(log, streams, iptvsim::testing::kLogWindowS);
  EXPECT_EQ(r.sent, want.sent);
  EXPECT_EQ(r.delivered, want.delivered);
  EXPECT_EQ(r.dropped(), want.dropped);
  EXPECT_EQ(r.in_flight, want.in_flight);
  EXPECT_EQ(r.dropped_by_reason[static_cast<int>(DropReason::DeadlineExpired)], 2u);
  EXPECT_EQ(r.dropped_by_reason[static_cast<int>(DropReason::BufferOverflow)], 1u);
  EXPECT_EQ(r.dropped_by_reason[static_cast<int>(DropReason::LinkOutage)], 1u);
  EXPECT_NEAR(r.plr, want.plr, 1e-9);
  EXPECT_NEAR(r.mean_e2e_ms, want.mean_e2e_ms, 1e-9);
  EXPECT_NEAR(r.p99_e2e_ms, want.p99_e2e_ms, 1e-9);
  EXPECT_NEAR(r.mean_jitter_ms, want.mean_jitter_ms, 1e-9);
  EXPECT_NEAR(r.throughput_bps, want.throughput_bps, 1e-9);
  EXPECT_NEAR(r.dropped_bps, want.dropped_bps, 1e-9);
  ASSERT_EQ(r.flows.size(), 1u);
  EXPECT_EQ(r.flows[0].delivered, 15u);
  EXPECT_FALSE(r.verdict.plr_ok);
  EXPECT_TRUE(r.verdict.e2e_ok);
  EXPECT_TRUE(r.verdict.jitter_ok);
}

TEST(Summarize, EmptyLog) {
  const auto r = m::summarize({}, {}, 60.0);
  EXPECT_EQ(r.sent, 0u);
  EXPECT_EQ(r.plr, 0.0);
  EXPECT_EQ(r.throughput_bps, 0.0);
}

TEST(Summarize, ConstantDelayGivesZeroJitter) {
  std::vector<PacketOutcome> log;
  for (std::uint64_t k = 0; k < 200; ++k) {
    PacketOutcome o;
    o.packet_id = k;
    o.flow = "a";
    o.frame_index = k;
    o.size_bytes = 741;
    o.created_at_ms = static_cast<double>(k) * 1000.0 / 21.6;
    o.status = PacketStatus::Delivered;
    o.d_queue_ms = 7.25;
    o.delivered_at_ms = o.created_at_ms + 7.25;
    log.push_back(o);
  }
  const std::vector<m::StreamInfo> streams = {{"a", 1000.0 / 21.6}};
  const auto r = m::summarize(log, streams, 10.0);
  EXPECT_NEAR(r.mean_jitter_ms, 0.0, 1e-9);
  EXPECT_NEAR(r.rfc3550_jitter_ms, 0.0, 1e-9);
}

// Recount a random log in one pass and compare with the report.
TEST(SummarizeProperty, CountsReconcileWithLog) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> status(0, 4), flow(0, 2), size(1, 1500);
  std::uniform_real_distribution<double> delay(0.0, 30.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PacketOutcome> log;
    std::map<std::string, std::uint64_t> frame_of;
    for (std::uint64_t i = 0; i < 300; ++i) {
      PacketOutcome o;
      o.packet_id = i;
      o.flow = "f" + std::to_string(flow(rng));
      o.frame_index = frame_of[o.flow]++;
      o.size_bytes = static_cast<std::uint32_t>(size(rng));
      o.created_at_ms = static_cast<double>(i) * 10.0;
      const int s = status(rng);
      if (s <= 2) {
        o.status = PacketStatus::Delivered;
        o.d_queue_ms = delay(rng);
        o.delivered_at_ms = o.created_at_ms + o.d_queue_ms;
      } else if (s == 3) {
        o.status = PacketStatus::Dropped;
        o.reason = static_cast<DropReason>(i % 3);
        o.dropped_at_ms = o.created_at_ms;
      }
      log.push_back(o);
    }
    std::uint64_t delivered = 0, dropped = 0, in_flight = 0, bytes = 0;
    for (const auto& o : log) {
      delivered += o.status == PacketStatus::Delivered;
      dropped += o.status == PacketStatus::Dropped;
      in_flight += o.status == PacketStatus::InFlight;
      if (o.status == PacketStatus::Delivered) bytes += o.size_bytes;
    }
    const std::vector<m::StreamInfo> streams = {{"f0", 10}, {"f1", 10}, {"f2", 10}};
    const auto r = m::summarize(log, streams, 3.0);
    EXPECT_EQ(r.sent, log.size());
    EXPECT_EQ(r.delivered, delivered);
    EXPECT_EQ(r.dropped(), dropped);
    EXPECT_EQ(r.in_flight, in_flight);
    EXPECT_EQ(r.sent, r.delivered + r.dropped() + r.in_flight);
    EXPECT_EQ(r.delivered_bytes, bytes);
    EXPECT_GE(r.plr, 0.0);
    EXPECT_LE(r.plr, 1.0);

    // Whole-window throughput equals the mean of the 1 s bins.
    const auto bins = m::time_series(log, streams, 3.0);
    ASSERT_EQ(bins.size(), 3u);
    double mean = 0.0;
    std::uint64_t drops = 0;
    for (const auto& b : bins) {
      mean += b.throughput_bps / 3.0;
      drops += b.drops;
    }
    EXPECT_NEAR(mean, r.throughput_bps, 1e-9 * r.throughput_bps);
    EXPECT_EQ(drops, dropped);
  }
}

TEST(TimeSeries, PartialLastBin) {
  const auto log = iptvsim::testing::synthetic_log();
  const auto bins = m::time_series(log, iptvsim::testing::synthetic_streams(), 0.5);
  ASSERT_EQ(bins.size(), 1u);
  // Everything lands in the single half-second bin.
  EXPECT_NEAR(bins[0].throughput_bps, 15 * 8000 / 0.5, 1e-9);
  EXPECT_EQ(bins[0].drops, 4u);
}
