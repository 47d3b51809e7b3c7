#pragma once

// Media sources: trace-driven VBR video, synthetic CBR audio, and
// fragmentation of frames into MTU-sized packets.
//
// Canonical trace CSV:
//
//   # label: SVC            (optional)
//   index,t_ms,size_bytes,kind
//   0,0,13021,video
//   1,,9877,video           (empty t_ms: derived as index * 1000 / fps)

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iptvsim/common.hpp"
#include "iptvsim/mac.hpp"

namespace iptvsim::traffic {

enum class FrameKind { Video, Audio };

inline std::string_view kind_name(FrameKind k) {
  return k == FrameKind::Video ? "video" : "audio";
}

struct FrameRecord {
  std::uint64_t index = 0;
  double t_ms = 0.0;
  std::uint32_t size_bytes = 0;
  FrameKind kind = FrameKind::Video;
};

struct MediaTrace {
  std::vector<FrameRecord> frames;
  double nominal_fps = 30.0;
  std::string label;

  double nominal_interarrival_ms() const { return 1000.0 / nominal_fps; }

  /// Sum of frame sizes in bits over the span of `duration_s`.
  double mean_rate_bps(double duration_s) const {
    double bits = 0.0;
    for (const auto& f : frames) {
      if (f.t_ms < duration_s * 1000.0) bits += 8.0 * f.size_bytes;
    }
    return bits / duration_s;
  }
};

class TraceError : public std::runtime_error {
public:
  TraceError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

inline constexpr std::string_view kTraceHeader = "index,t_ms,size_bytes,kind";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses a canonical trace. `kind` is the stream the caller expects; rows
/// of a different kind are rejected.
inline MediaTrace parse_trace(std::istream& in, FrameKind kind, double nominal_fps) {
  if (!(nominal_fps > 0.0)) {
    throw TraceError("nominal fps must be positive", 0);
  }
  MediaTrace trace;
  trace.nominal_fps = nominal_fps;
  bool header_seen = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = detail::trim(line.substr(1));
      constexpr std::string_view kLabel = "label:";
      if (body.substr(0, kLabel.size()) == kLabel) {
        trace.label = std::string(detail::trim(body.substr(kLabel.size())));
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) {
        throw TraceError("expected header '" + std::string(kTraceHeader) + "'",
                         line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != 4) {
      throw TraceError("expected 4 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    FrameRecord rec;
    if (!detail::parse_number(fields[0], rec.index)) {
      throw TraceError("bad index '" + std::string(fields[0]) + "'", line_no);
    }
    if (rec.index != trace.frames.size()) {
      throw TraceError("index " + std::to_string(rec.index) +
                           " is not consecutive (expected " +
                           std::to_string(trace.frames.size()) + ")",
                       line_no);
    }
    if (fields[1].empty()) {
      rec.t_ms = static_cast<double>(rec.index) * 1000.0 / nominal_fps;
    } else if (!detail::parse_number(fields[1], rec.t_ms)) {
      throw TraceError("bad t_ms '" + std::string(fields[1]) + "'", line_no);
    }
    if (rec.t_ms < 0.0) {
      throw TraceError("t_ms must be non-negative", line_no);
    }
    if (!trace.frames.empty() && rec.t_ms < trace.frames.back().t_ms) {
      throw TraceError("t_ms decreases", line_no);
    }
    long long size = 0;
    if (!detail::parse_number(fields[2], size)) {
      throw TraceError("bad size_bytes '" + std::string(fields[2]) + "'", line_no);
    }
    if (size <= 0 || size > static_cast<long long>(UINT32_MAX)) {
      throw TraceError("size_bytes must be positive", line_no);
    }
    rec.size_bytes = static_cast<std::uint32_t>(size);
    if (fields[3] != kind_name(kind)) {
      throw TraceError("kind '" + std::string(fields[3]) + "' does not match " +
                           std::string(kind_name(kind)),
                       line_no);
    }
    rec.kind = kind;
    trace.frames.push_back(rec);
  }
  if (trace.frames.empty()) {
    throw TraceError("empty trace", 0);
  }
  return trace;
}

inline MediaTrace load_trace(const std::string& path, FrameKind kind,
                             double nominal_fps) {
  std::ifstream in(path);
  if (!in) {
    throw TraceError("cannot open trace file '" + path + "'", 0);
  }
  try {
    return parse_trace(in, kind, nominal_fps);
  } catch (const TraceError& e) {
    throw TraceError(path + ": " + e.what(), e.line());
  }
}

/// Writes the canonical form read by parse_trace.
inline void write_trace(std::ostream& out, const MediaTrace& trace) {
  if (!trace.label.empty()) out << "# label: " << trace.label << '\n';
  out << kTraceHeader << '\n';
  for (const auto& f : trace.frames) {
    out << f.index << ',' << iptvsim::detail::format_double(f.t_ms) << ','
        << f.size_bytes << ',' << kind_name(f.kind) << '\n';
  }
}

/// Constant-size frames at t = k / fps for every k with t < duration.
inline MediaTrace synthesize_cbr(double duration_s, double fps,
                                 std::uint32_t frame_size_bytes, FrameKind kind) {
  iptvsim::detail::require(duration_s > 0.0, "synthesize_cbr: duration must be positive");
  iptvsim::detail::require(fps > 0.0, "synthesize_cbr: fps must be positive");
  iptvsim::detail::require(frame_size_bytes > 0,
                           "synthesize_cbr: frame size must be positive");
  MediaTrace trace;
  trace.nominal_fps = fps;
  trace.label = "CBR";
  const auto count =
      static_cast<std::uint64_t>(std::ceil(duration_s * fps - 1e-9));
  trace.frames.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    trace.frames.push_back(
        {k, static_cast<double>(k) * 1000.0 / fps, frame_size_bytes, kind});
  }
  return trace;
}

/// Splits a frame into ceil(size / mtu) packets; all but the last carry
/// exactly mtu bytes. Packets are stamped with the frame time; ids and flow
/// are left for the caller.
inline std::vector<mac::Packet> packetize(const FrameRecord& frame,
                                          std::uint32_t mtu_payload_bytes) {
  iptvsim::detail::require(mtu_payload_bytes > 0, "packetize: mtu must be positive");
  std::vector<mac::Packet> out;
  std::uint32_t left = frame.size_bytes;
  out.reserve((left + mtu_payload_bytes - 1) / mtu_payload_bytes);
  while (left > 0) {
    mac::Packet p;
    p.size_bytes = std::min(left, mtu_payload_bytes);
    p.created_at_ms = frame.t_ms;
    p.frame_index = frame.index;
    left -= p.size_bytes;
    out.push_back(p);
  }
  return out;
}

}  // namespace iptvsim::traffic
