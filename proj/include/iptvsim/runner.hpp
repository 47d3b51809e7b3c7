#pragma once

// Scenario-family matrices and plot-ready pivots.
//
// A matrix expands a base configuration into one cell per (MCS, axis value)
// pair by patching the JSON document, so every cell's configuration can be
// written out and re-run on its own.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "iptvsim/config.hpp"
#include "iptvsim/engine.hpp"
#include "iptvsim/mac.hpp"
#include "iptvsim/phy.hpp"
#include "iptvsim/traffic.hpp"

namespace iptvsim::runner {

using nlohmann::json;

/// Bad command-line or plot request (unknown metric, family, ...).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Family { Codec, PathLoss, Class };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Codec:
      return "codec";
    case Family::PathLoss:
      return "path_loss";
    case Family::Class:
      return "service_class";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "codec" || s == "CodecFamily") return Family::Codec;
  if (s == "path_loss" || s == "PathLossFamily") return Family::PathLoss;
  if (s == "service_class" || s == "class" || s == "ClassFamily") return Family::Class;
  return std::nullopt;
}

/// Row count of a family grid: 3 codecs (x 7 MCS when expanded),
/// 7 MCS x 4 path-loss models, 7 MCS x 5 service classes.
inline std::size_t expected_rows(Family f, bool expand_codecs = false) {
  switch (f) {
    case Family::Codec:
      return expand_codecs ? 21 : 3;
    case Family::PathLoss:
      return 28;
    case Family::Class:
      return 35;
  }
  return 0;
}

struct MatrixCell {
  Family family = Family::Codec;
  std::string mcs;
  std::string axis_value;
  json config;
};

struct MatrixRow {
  Family family = Family::Codec;
  std::string mcs;
  std::string axis_value;
  double mean_jitter_ms = 0.0;
  double mean_e2e_ms = 0.0;
  double dropped_bps = 0.0;
  double throughput_bps = 0.0;
  std::uint64_t dropped_packets = 0;
  std::string status = "ok";
  std::string error;  // not serialized

  friend bool operator==(const MatrixRow& a, const MatrixRow& b) {
    return a.family == b.family && a.mcs == b.mcs && a.axis_value == b.axis_value &&
           a.mean_jitter_ms == b.mean_jitter_ms && a.mean_e2e_ms == b.mean_e2e_ms &&
           a.dropped_bps == b.dropped_bps && a.throughput_bps == b.throughput_bps &&
           a.dropped_packets == b.dropped_packets && a.status == b.status;
  }
};

namespace detail {

inline void absolutize_sources(json& cfg, const std::filesystem::path& base_dir) {
  if (!cfg.contains("sources") || !cfg["sources"].is_object()) return;
  for (auto& [name, src] : cfg["sources"].items()) {
    if (src.is_object() && src.contains("trace") && src["trace"].is_string()) {
      std::filesystem::path p = src["trace"].get<std::string>();
      if (p.is_relative()) {
        src["trace"] = std::filesystem::absolute(base_dir / p).lexically_normal().string();
      }
    }
  }
}

inline std::vector<std::string> mcs_names(const json& cfg) {
  // The table may be overridden; build_scenario validates it per cell.
  std::vector<std::string> names;
  if (cfg.contains("phy") && cfg["phy"].contains("mcs_table")) {
    for (const auto& row : cfg["phy"]["mcs_table"]) {
      names.push_back(row.value("modulation", "?") + "-" + row.value("coding", "?"));
    }
  } else {
    for (const auto& p : phy::default_mcs_table()) names.push_back(p.name());
  }
  return names;
}

inline const json& section(const json& m, const char* key) {
  if (!m.contains(key)) {
    throw std::runtime_error(std::string("config.matrix.") + key + " is missing");
  }
  return m.at(key);
}

inline void set_fixed_mcs(json& cfg, const std::string& name) {
  const bool force = cfg.contains("mcs") && cfg["mcs"].value("force", false);
  cfg["mcs"] = json{{"mode", "fixed"}, {"profile", name}, {"force", force}};
}

}  // namespace detail

/// Expands the family grid. Throws std::runtime_error when the base
/// configuration lacks the matrix axes or the grid has the wrong size.
inline std::vector<MatrixCell> expand_matrix(Family family, const json& base,
                                             const std::filesystem::path& base_dir,
                                             bool expand_codecs = false) {
  json cfg = base;
  detail::absolutize_sources(cfg, base_dir);
  if (!cfg.contains("matrix")) throw std::runtime_error("config.matrix is missing");
  const json m = cfg["matrix"];
  cfg.erase("matrix");
  const auto mcs_list = detail::mcs_names(cfg);

  std::vector<MatrixCell> cells;
  switch (family) {
    case Family::Codec: {
      const auto& codecs = detail::section(m, "codecs");
      const std::string src = m.value("codec_source", "video");
      std::vector<std::string> mcs_axis;
      if (expand_codecs) {
        mcs_axis = mcs_list;
      } else {
        if (!cfg.contains("mcs") || cfg["mcs"].value("mode", "") != "fixed") {
          throw std::runtime_error("codec family needs a fixed mcs in the base config");
        }
        mcs_axis.push_back(cfg["mcs"].value("profile", ""));
      }
      for (const auto& mcs : mcs_axis) {
        for (const auto& codec : codecs) {
          MatrixCell c{family, mcs, codec.value("label", ""), cfg};
          std::filesystem::path trace = codec.value("trace", "");
          if (trace.is_relative()) trace = std::filesystem::absolute(base_dir / trace);
          c.config["sources"][src]["trace"] = trace.lexically_normal().string();
          c.config["sources"][src]["label"] = c.axis_value;
          detail::set_fixed_mcs(c.config, mcs);
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    case Family::PathLoss: {
      const auto& models = detail::section(m, "path_loss_models");
      for (const auto& mcs : mcs_list) {
        for (const auto& model : models) {
          MatrixCell c{family, mcs, model.value("model", ""), cfg};
          c.config["link_budget"]["path_loss"] = model;
          detail::set_fixed_mcs(c.config, mcs);
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    case Family::Class: {
      const auto& class_qos = detail::section(m, "class_qos");
      // Flows outside `class_flows` (cross traffic) keep their own class.
      std::vector<std::string> swept;
      if (m.contains("class_flows")) {
        swept = m["class_flows"].get<std::vector<std::string>>();
      } else {
        for (const auto& flow : cfg.value("flows", json::array())) {
          swept.push_back(flow.value("id", ""));
        }
      }
      for (const auto& mcs : mcs_list) {
        for (auto cls : mac::kClassPriority) {
          const std::string name(mac::class_name(cls));
          if (!class_qos.contains(name)) {
            throw std::runtime_error("config.matrix.class_qos." + name + " is missing");
          }
          MatrixCell c{family, mcs, name, cfg};
          for (auto& flow : c.config["flows"]) {
            const std::string id = flow.value("id", "");
            if (std::find(swept.begin(), swept.end(), id) == swept.end()) continue;
            if (!class_qos[name].contains(id)) {
              throw std::runtime_error("config.matrix.class_qos." + name +
                                       " has no entry for flow '" + id + "'");
            }
            flow["class"] = name;
            flow["qos"] = class_qos[name][id];
          }
          detail::set_fixed_mcs(c.config, mcs);
          cells.push_back(std::move(c));
        }
      }
      break;
    }
  }
  if (cells.size() != expected_rows(family, expand_codecs)) {
    throw std::runtime_error(std::string(family_name(family)) + " matrix has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(expected_rows(family, expand_codecs)));
  }
  return cells;
}

inline MatrixRow run_cell(const MatrixCell& cell) {
  MatrixRow row;
  row.family = cell.family;
  row.mcs = cell.mcs;
  row.axis_value = cell.axis_value;
  try {
    const auto scenario = config::build_scenario(cell.config);
    const auto result = engine::run(scenario);
    const auto& r = result.report;
    row.mean_jitter_ms = r.mean_jitter_ms;
    row.mean_e2e_ms = r.mean_e2e_ms;
    row.dropped_bps = r.dropped_bps;
    row.throughput_bps = r.throughput_bps;
    row.dropped_packets = r.dropped();
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
  }
  return row;
}

/// Runs every cell, possibly in parallel; rows come back in cell order.
inline std::vector<MatrixRow> run_matrix(const std::vector<MatrixCell>& cells,
                                         unsigned threads = 0) {
  std::vector<MatrixRow> rows(cells.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cells[i]);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

inline constexpr std::string_view kMatrixHeader =
    "family,mcs,axis_value,mean_jitter_ms,mean_e2e_ms,dropped_bps,throughput_bps,"
    "dropped_packets,status";

inline constexpr std::string_view kMetricColumns[] = {
    "mean_jitter_ms", "mean_e2e_ms", "dropped_bps", "throughput_bps", "dropped_packets"};

inline double metric_value(const MatrixRow& r, std::string_view metric) {
  if (metric == "mean_jitter_ms") return r.mean_jitter_ms;
  if (metric == "mean_e2e_ms") return r.mean_e2e_ms;
  if (metric == "dropped_bps") return r.dropped_bps;
  if (metric == "throughput_bps") return r.throughput_bps;
  if (metric == "dropped_packets") return static_cast<double>(r.dropped_packets);
  throw UsageError("unknown metric '" + std::string(metric) + "'");
}

inline void write_matrix_csv(std::ostream& out, const std::vector<MatrixRow>& rows) {
  using iptvsim::detail::format_double;
  out << kMatrixHeader << '\n';
  for (const auto& r : rows) {
    out << family_name(r.family) << ',' << r.mcs << ',' << r.axis_value << ','
        << format_double(r.mean_jitter_ms) << ',' << format_double(r.mean_e2e_ms) << ','
        << format_double(r.dropped_bps) << ',' << format_double(r.throughput_bps) << ','
        << r.dropped_packets << ',' << r.status << '\n';
  }
}

inline std::vector<MatrixRow> read_matrix_csv(std::istream& in) {
  std::vector<MatrixRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (traffic::detail::trim(line) != kMatrixHeader) {
    throw UsageError("not a matrix.csv file (unexpected header)");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (traffic::detail::trim(line).empty()) continue;
    const auto f = traffic::detail::split(line, ',');
    const auto family = f.size() == 9 ? parse_family(f[0]) : std::nullopt;
    MatrixRow r;
    bool ok = family.has_value();
    if (ok) {
      r.family = *family;
      r.mcs = std::string(f[1]);
      r.axis_value = std::string(f[2]);
      ok = traffic::detail::parse_number(f[3], r.mean_jitter_ms) &&
           traffic::detail::parse_number(f[4], r.mean_e2e_ms) &&
           traffic::detail::parse_number(f[5], r.dropped_bps) &&
           traffic::detail::parse_number(f[6], r.throughput_bps) &&
           traffic::detail::parse_number(f[7], r.dropped_packets);
      r.status = std::string(f[8]);
    }
    if (!ok) throw UsageError("matrix.csv line " + std::to_string(line_no) + " is malformed");
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Grouped-bar layout: one row per MCS, one column per axis value.
struct Pivot {
  Family family = Family::Codec;
  std::string metric;
  std::vector<std::string> columns;
  std::vector<std::string> mcs;
  std::vector<std::vector<std::optional<double>>> cells;  // [mcs][column]
};

inline Pivot pivot(const std::vector<MatrixRow>& rows, std::string_view metric,
                   Family group_by) {
  if (std::find(std::begin(kMetricColumns), std::end(kMetricColumns), metric) ==
      std::end(kMetricColumns)) {
    throw UsageError("unknown metric '" + std::string(metric) + "'");
  }
  Pivot p;
  p.family = group_by;
  p.metric = metric;
  for (const auto& r : rows) {
    if (r.family != group_by) continue;
    if (std::find(p.columns.begin(), p.columns.end(), r.axis_value) == p.columns.end()) {
      p.columns.push_back(r.axis_value);
    }
    if (std::find(p.mcs.begin(), p.mcs.end(), r.mcs) == p.mcs.end()) p.mcs.push_back(r.mcs);
  }
  p.cells.assign(p.mcs.size(), std::vector<std::optional<double>>(p.columns.size()));
  for (const auto& r : rows) {
    if (r.family != group_by || r.status != "ok") continue;
    const auto i = static_cast<std::size_t>(
        std::find(p.mcs.begin(), p.mcs.end(), r.mcs) - p.mcs.begin());
    const auto j = static_cast<std::size_t>(
        std::find(p.columns.begin(), p.columns.end(), r.axis_value) - p.columns.begin());
    p.cells[i][j] = metric_value(r, metric);
  }
  return p;
}

inline void write_pivot_csv(std::ostream& out, const Pivot& p) {
  out << "mcs";
  for (const auto& c : p.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < p.mcs.size(); ++i) {
    out << p.mcs[i];
    for (const auto& v : p.cells[i]) {
      out << ',';
      if (v) out << iptvsim::detail::format_double(*v);
    }
    out << '\n';
  }
}

/// (family, mcs, axis value, metric value) triple recovered from a pivot.
struct Triple {
  Family family;
  std::string mcs;
  std::string axis_value;
  double value;

  friend bool operator==(const Triple&, const Triple&) = default;
};

inline std::vector<Triple> unpivot(std::istream& in, Family family) {
  std::vector<Triple> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  std::vector<std::string> header;
  for (auto h : traffic::detail::split(traffic::detail::trim(line), ',')) header.emplace_back(h);
  while (std::getline(in, line)) {
    if (traffic::detail::trim(line).empty()) continue;
    const auto f = traffic::detail::split(line, ',');
    for (std::size_t j = 1; j < f.size() && j < header.size(); ++j) {
      double v = 0.0;
      if (f[j].empty()) continue;
      if (!traffic::detail::parse_number(f[j], v)) throw UsageError("bad pivot cell");
      out.push_back({family, std::string(f[0]), header[j], v});
    }
  }
  return out;
}

/// Reads matrix.csv text and returns the pivot as CSV text.
inline std::string emit_plot_data(std::istream& matrix_csv, std::string_view metric,
                                  std::string_view group_by) {
  const auto family = parse_family(group_by);
  if (!family) throw UsageError("unknown group-by '" + std::string(group_by) + "'");
  std::ostringstream out;
  write_pivot_csv(out, pivot(read_matrix_csv(matrix_csv), metric, *family));
  return out.str();
}

/// File-name-safe cell identifier, e.g. "path_loss__64QAM-3-4__erceg".
inline std::string cell_slug(const MatrixCell& c) {
  std::string s = std::string(family_name(c.family)) + "__" + c.mcs + "__" + c.axis_value;
  for (auto& ch : s) {
    if (ch == '/' || ch == ' ' || ch == '\\') ch = '-';
  }
  return s;
}

}  // namespace iptvsim::runner
