#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "iptvsim/traffic.hpp"

namespace tr = iptvsim::traffic;
using tr::FrameKind;

namespace {

tr::MediaTrace parse(const std::string& text, FrameKind kind = FrameKind::Video,
                     double fps = 30.0) {
  std::istringstream in(text);
  return tr::parse_trace(in, kind, fps);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const tr::TraceError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(ParseTrace, DerivesTimestampsFromFrameRate) {
  const auto t = parse(
      "index,t_ms,size_bytes,kind\n"
      "0,,1000,video\n"
      "1,,2000,video\n"
      "2,,1500,video\n");
  ASSERT_EQ(t.frames.size(), 3u);
  EXPECT_EQ(t.frames[0].t_ms, 0.0);
  EXPECT_NEAR(t.frames[1].t_ms, 33.33, 0.005);
  EXPECT_NEAR(t.frames[2].t_ms, 66.67, 0.005);
  EXPECT_EQ(t.frames[1].size_bytes, 2000u);
}

TEST(ParseTrace, LabelCommentAndBlankLines) {
  const auto t = parse(
      "# label: SVC\n"
      "# anything else\n"
      "\n"
      "index,t_ms,size_bytes,kind\n"
      "0,0,10,video\n");
  EXPECT_EQ(t.label, "SVC");
  EXPECT_EQ(t.frames.size(), 1u);
}

TEST(ParseTrace, EmptyTraceIsAnError) {
  EXPECT_THROW(parse(""), tr::TraceError);
  try {
    parse("index,t_ms,size_bytes,kind\n");
    FAIL();
  } catch (const tr::TraceError& e) {
    EXPECT_NE(std::string(e.what()).find("empty trace"), std::string::npos);
  }
}

TEST(ParseTrace, ErrorsCarryLineNumbers) {
  const std::string head = "index,t_ms,size_bytes,kind\n0,0,100,video\n";
  EXPECT_EQ(error_line(head + "1,10,-5,video\n"), 3u);
  EXPECT_EQ(error_line(head + "1,10,0,video\n"), 3u);
  EXPECT_EQ(error_line(head + "1,-1,5,video\n"), 3u);
  EXPECT_EQ(error_line("index,t_ms,size_bytes,kind\n0,50,100,video\n1,40,5,video\n"), 3u);
  EXPECT_EQ(error_line(head + "2,10,5,video\n"), 3u);
  EXPECT_EQ(error_line(head + "1,10,5,audio\n"), 3u);
  EXPECT_EQ(error_line(head + "1,10,5\n"), 3u);
  EXPECT_EQ(error_line("idx,t,size,kind\n"), 1u);
}

TEST(ParseTrace, RejectsBadFrameRate) {
  EXPECT_THROW(parse("index,t_ms,size_bytes,kind\n0,0,1,video\n", FrameKind::Video, 0.0),
               tr::TraceError);
}

TEST(LoadTrace, MissingFile) {
  EXPECT_THROW(tr::load_trace("/nonexistent/trace.csv", FrameKind::Video, 30.0),
               tr::TraceError);
}

TEST(LoadTrace, ShippedTracesAreCanonical) {
  for (const char* name : {"svc", "mpeg4", "avc"}) {
    const std::string path =
        std::string(IPTVSIM_SOURCE_DIR) + "/data/traces/" + name + ".csv";
    const auto t = tr::load_trace(path, FrameKind::Video, 30.0);
    EXPECT_EQ(t.frames.size(), 3600u);
    std::ostringstream out;
    tr::write_trace(out, t);
    EXPECT_EQ(out.str(), slurp(path)) << name;
  }
}

TEST(WriteTrace, RoundTripsRandomTraces) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> size(1, 200000);
  std::uniform_real_distribution<double> gap(0.0, 80.0);
  for (int trial = 0; trial < 50; ++trial) {
    tr::MediaTrace t;
    t.label = "L" + std::to_string(trial);
    double now = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      t.frames.push_back({k, now, size(rng), FrameKind::Audio});
      now += gap(rng);
    }
    std::ostringstream once;
    tr::write_trace(once, t);
    std::istringstream in(once.str());
    const auto back = tr::parse_trace(in, FrameKind::Audio, 21.6);
    std::ostringstream twice;
    tr::write_trace(twice, back);
    EXPECT_EQ(once.str(), twice.str());
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      EXPECT_EQ(back.frames[i].t_ms, t.frames[i].t_ms);
    }
  }
}

TEST(SynthesizeCbr, Examples) {
  const auto a = tr::synthesize_cbr(1.0, 21.6, 741, FrameKind::Audio);
  ASSERT_EQ(a.frames.size(), 22u);
  EXPECT_LT(a.frames.back().t_ms, 1000.0);
  EXPECT_EQ(a.frames.back().index, 21u);
  EXPECT_EQ(tr::synthesize_cbr(0.01, 21.6, 741, FrameKind::Audio).frames.size(), 1u);
  EXPECT_EQ(tr::synthesize_cbr(1.0, 30, 1000, FrameKind::Video).frames.size(), 30u);
  EXPECT_THROW(tr::synthesize_cbr(0.0, 30, 1000, FrameKind::Video), iptvsim::DomainError);
  EXPECT_THROW(tr::synthesize_cbr(1.0, 30, 0, FrameKind::Video), iptvsim::DomainError);
}

// Count frames k with k/fps < duration using exact integer arithmetic on
// rational inputs: duration = dn/dd seconds, fps = fn/fd.
TEST(SynthesizeCbr, CountMatchesRationalOracle) {
  for (int dn = 1; dn <= 40; ++dn) {
    for (int fn = 1; fn <= 300; fn += 7) {
      const int dd = 4, fd = 10;
      // k * fd / fn < dn / dd  <=>  k * fd * dd < dn * fn
      const long long bound = static_cast<long long>(dn) * fn;
      const long long step = static_cast<long long>(fd) * dd;
      const long long want = (bound + step - 1) / step;
      const auto got =
          tr::synthesize_cbr(double(dn) / dd, double(fn) / fd, 100, FrameKind::Audio);
      EXPECT_EQ(static_cast<long long>(got.frames.size()), want) << dn << "/" << fn;
    }
  }
}

TEST(Packetize, Examples) {
  const auto sizes = [](const std::vector<iptvsim::mac::Packet>& ps) {
    std::vector<std::uint32_t> out;
    for (const auto& p : ps) out.push_back(p.size_bytes);
    return out;
  };
  tr::FrameRecord f{4, 133.0, 3000, FrameKind::Video};
  const auto ps = tr::packetize(f, 1460);
  EXPECT_EQ(sizes(ps), (std::vector<std::uint32_t>{1460, 1460, 80}));
  for (const auto& p : ps) {
    EXPECT_EQ(p.created_at_ms, 133.0);
    EXPECT_EQ(p.frame_index, 4u);
  }
  f.size_bytes = 100;
  EXPECT_EQ(sizes(tr::packetize(f, 1460)), (std::vector<std::uint32_t>{100}));
  f.size_bytes = 2920;
  EXPECT_EQ(sizes(tr::packetize(f, 1460)), (std::vector<std::uint32_t>{1460, 1460}));
}

TEST(PacketizeProperty, ConservesBytes) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint32_t> size(1, 500000), mtu(1, 9000);
  for (int i = 0; i < 5000; ++i) {
    const tr::FrameRecord f{0, 0.0, size(rng), FrameKind::Video};
    const auto m = mtu(rng);
    const auto ps = tr::packetize(f, m);
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      sum += ps[k].size_bytes;
      if (k + 1 < ps.size()) {
        EXPECT_EQ(ps[k].size_bytes, m);
      }
    }
    EXPECT_EQ(sum, f.size_bytes);
    EXPECT_EQ(ps.size(), (f.size_bytes + m - 1) / m);
  }
}
