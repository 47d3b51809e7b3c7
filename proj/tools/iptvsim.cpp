// iptvsim command-line front end.
//
//   iptvsim run       --config cfg.json --out dir [--seed N] [--duration S] [--packets-log]
//   iptvsim matrix    --family path_loss --config base.json --out dir [--expand-codecs]
//   iptvsim plot-data --matrix dir/matrix.csv --metric mean_jitter_ms --group-by path_loss
//   iptvsim validate  --config cfg.json
//
// Exit codes: 0 success, 1 I/O failure or failed matrix row, 2 invalid
// configuration or usage.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iptvsim/iptvsim.hpp"

namespace fs = std::filesystem;
using iptvsim::config::ConfigError;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_s;

  void apply(json& cfg) const {
    if (seed) cfg["seed"] = *seed;
    if (duration_s) cfg["duration_s"] = *duration_s;
  }
};

// Loading a config is an I/O step; a parse error is a validation error.
std::optional<json> read_config(const fs::path& path, int& exit_code) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path.string() << '\n';
    exit_code = kExitIo;
    return std::nullopt;
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "error: " << path.string() << ": " << e.what() << '\n';
    exit_code = kExitUsage;
    return std::nullopt;
  }
}

void print_issues(const ConfigError& e) {
  for (const auto& issue : e.issues()) std::cerr << "invalid: " << issue << '\n';
}

bool write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << '\n';
    return false;
  }
  return true;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir, const Overrides& ov,
            bool packets_log) {
  int code = kExitOk;
  auto cfg = read_config(config_path, code);
  if (!cfg) return code;
  ov.apply(*cfg);

  iptvsim::engine::Scenario scenario;
  try {
    scenario = iptvsim::config::build_scenario(*cfg, config_path.parent_path());
  } catch (const ConfigError& e) {
    print_issues(e);
    return kExitUsage;
  } catch (const iptvsim::traffic::TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }

  const auto result = iptvsim::engine::run(scenario);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitIo;
  }
  bool ok = write_file(out_dir / "report.json",
                       iptvsim::report::to_json(scenario, result).dump(2) + "\n");
  std::ostringstream ts;
  iptvsim::report::write_timeseries_csv(
      ts, iptvsim::metrics::time_series(
              iptvsim::engine::measured_outcomes(scenario, result.outcomes),
              iptvsim::engine::measured_streams(scenario), scenario.duration_s));
  ok = write_file(out_dir / "timeseries.csv", ts.str()) && ok;
  if (packets_log) {
    std::ostringstream pk;
    iptvsim::report::write_packets_csv(pk, result.outcomes);
    ok = write_file(out_dir / "packets.csv", pk.str()) && ok;
  }
  if (!ok) return kExitIo;

  const auto& r = result.report;
  std::cout << "sent=" << r.sent << " delivered=" << r.delivered << " dropped=" << r.dropped()
            << " plr=" << iptvsim::detail::format_double(r.plr)
            << " mean_e2e_ms=" << iptvsim::detail::format_double(r.mean_e2e_ms)
            << " mean_jitter_ms=" << iptvsim::detail::format_double(r.mean_jitter_ms)
            << " throughput_bps=" << iptvsim::detail::format_double(r.throughput_bps) << '\n';
  return kExitOk;
}

int cmd_matrix(const std::string& family_arg, const fs::path& config_path,
               const fs::path& out_dir, const Overrides& ov, bool expand_codecs,
               unsigned threads) {
  const auto family = iptvsim::runner::parse_family(family_arg);
  if (!family) {
    std::cerr << "error: unknown family '" << family_arg << "'\n";
    return kExitUsage;
  }
  int code = kExitOk;
  auto cfg = read_config(config_path, code);
  if (!cfg) return code;
  ov.apply(*cfg);

  std::vector<iptvsim::runner::MatrixCell> cells;
  try {
    cells = iptvsim::runner::expand_matrix(*family, *cfg, config_path.parent_path(),
                                           expand_codecs);
  } catch (const std::exception& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitUsage;
  }

  std::error_code ec;
  fs::create_directories(out_dir / "cells", ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitIo;
  }
  for (const auto& c : cells) {
    if (!write_file(out_dir / "cells" / (iptvsim::runner::cell_slug(c) + ".json"),
                    c.config.dump(2) + "\n")) {
      return kExitIo;
    }
  }

  const auto rows = iptvsim::runner::run_matrix(cells, threads);
  std::ostringstream csv;
  iptvsim::runner::write_matrix_csv(csv, rows);
  if (!write_file(out_dir / "matrix.csv", csv.str())) return kExitIo;

  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      ++failed;
      std::cerr << "row failed: " << r.mcs << " / " << r.axis_value << ": " << r.error << '\n';
    }
  }
  std::cout << iptvsim::runner::family_name(*family) << ": " << rows.size() << " rows, "
            << failed << " failed\n";
  return failed ? kExitIo : kExitOk;
}

int cmd_plot_data(const fs::path& matrix_path, const std::string& metric,
                  const std::string& group_by, const std::optional<fs::path>& out_path) {
  std::ifstream in(matrix_path);
  if (!in) {
    std::cerr << "error: cannot open " << matrix_path.string() << '\n';
    return kExitIo;
  }
  std::string text;
  try {
    text = iptvsim::runner::emit_plot_data(in, metric, group_by);
  } catch (const iptvsim::runner::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (out_path) return write_file(*out_path, text) ? kExitOk : kExitIo;
  std::cout << text;
  return kExitOk;
}

int cmd_validate(const fs::path& config_path) {
  int code = kExitOk;
  auto cfg = read_config(config_path, code);
  if (!cfg) return code;
  try {
    const auto s = iptvsim::config::build_scenario(*cfg, config_path.parent_path());
    std::cout << "ok: " << s.flows.size() << " flow(s), " << s.duration_s << " s\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    print_issues(e);
    return kExitUsage;
  } catch (const iptvsim::traffic::TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event IPTV VoD over fixed WiMAX simulator"};
  app.require_subcommand(1);

  fs::path config_path;
  fs::path out_dir = "out";
  Overrides ov;
  bool packets_log = false;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", ov.seed, "Override the RNG seed");
  run->add_option("--duration", ov.duration_s, "Override the simulated duration (s)");
  run->add_flag("--packets-log", packets_log, "Also write packets.csv");

  std::string family;
  bool expand_codecs = false;
  unsigned threads = 0;
  auto* matrix = app.add_subcommand("matrix", "Run a scenario-family matrix");
  matrix->add_option("--family", family, "codec | path_loss | service_class")->required();
  matrix->add_option("--config", config_path, "Base scenario JSON with a matrix section")
      ->required();
  matrix->add_option("--out", out_dir, "Output directory");
  matrix->add_option("--seed", ov.seed, "Override the RNG seed");
  matrix->add_option("--duration", ov.duration_s, "Override the simulated duration (s)");
  matrix->add_flag("--expand-codecs", expand_codecs, "Run every codec at every MCS (21 rows)");
  matrix->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  fs::path matrix_csv;
  std::string metric;
  std::string group_by;
  std::optional<fs::path> plot_out;
  auto* plot = app.add_subcommand("plot-data", "Pivot matrix.csv into a grouped-bar table");
  plot->add_option("--matrix", matrix_csv, "matrix.csv written by the matrix command")
      ->required();
  plot->add_option("--metric", metric, "Metric column")->required();
  plot->add_option("--group-by", group_by, "codec | path_loss | service_class")->required();
  plot->add_option("--out", plot_out, "Output file (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Check a scenario config");
  validate->add_option("--config", config_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, ov, packets_log);
    if (*matrix) return cmd_matrix(family, config_path, out_dir, ov, expand_codecs, threads);
    if (*plot) return cmd_plot_data(matrix_csv, metric, group_by, plot_out);
    if (*validate) return cmd_validate(config_path);
  } catch (const iptvsim::DomainError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
