#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "iptvsim/config.hpp"
#include "iptvsim/runner.hpp"

namespace rn = iptvsim::runner;
using nlohmann::json;
using rn::Family;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(IPTVSIM_SOURCE_DIR) / "configs";

// Short runs keep the suite fast; the grid shape does not depend on duration.
json short_base(double duration_s = 2.0) {
  auto j = iptvsim::config::load_json(kConfigs / "base.json");
  j["duration_s"] = duration_s;
  return j;
}

rn::MatrixRow row(Family f, std::string mcs, std::string axis, double v) {
  rn::MatrixRow r;
  r.family = f;
  r.mcs = std::move(mcs);
  r.axis_value = std::move(axis);
  r.mean_jitter_ms = v;
  r.mean_e2e_ms = v * 2;
  r.dropped_bps = v * 3;
  r.throughput_bps = v * 4;
  r.dropped_packets = static_cast<std::uint64_t>(v);
  return r;
}

}  // namespace

TEST(Family, Names) {
  for (auto f : {Family::Codec, Family::PathLoss, Family::Class}) {
    EXPECT_EQ(rn::parse_family(rn::family_name(f)), f);
  }
  EXPECT_EQ(rn::parse_family("ClassFamily"), Family::Class);
  EXPECT_FALSE(rn::parse_family("weather").has_value());
}

TEST(ExpandMatrix, RowCounts) {
  const auto j = short_base();
  EXPECT_EQ(rn::expand_matrix(Family::Codec, j, kConfigs).size(), 3u);
  EXPECT_EQ(rn::expand_matrix(Family::Codec, j, kConfigs, true).size(), 21u);
  EXPECT_EQ(rn::expand_matrix(Family::PathLoss, j, kConfigs).size(), 28u);
  EXPECT_EQ(rn::expand_matrix(Family::Class, j, kConfigs).size(), 35u);
}

TEST(ExpandMatrix, CellsAreDistinctAndBuild) {
  const auto j = short_base();
  for (auto f : {Family::Codec, Family::PathLoss, Family::Class}) {
    std::set<std::string> slugs;
    for (const auto& c : rn::expand_matrix(f, j, kConfigs)) {
      EXPECT_TRUE(slugs.insert(rn::cell_slug(c)).second);
      EXPECT_FALSE(c.config.contains("matrix"));
      EXPECT_NO_THROW(iptvsim::config::build_scenario(c.config)) << rn::cell_slug(c);
    }
  }
}

TEST(ExpandMatrix, ClassSweepLeavesCrossTrafficAlone) {
  for (const auto& c : rn::expand_matrix(Family::Class, short_base(), kConfigs)) {
    for (const auto& f : c.config["flows"]) {
      if (f["id"] == "cross") {
        EXPECT_EQ(f["class"], "nrtPS");
      } else {
        EXPECT_EQ(f["class"], c.axis_value);
      }
    }
  }
}

TEST(ExpandMatrix, MissingAxesThrow) {
  auto j = short_base();
  j.erase("matrix");
  EXPECT_THROW(rn::expand_matrix(Family::PathLoss, j, kConfigs), std::runtime_error);
  j = short_base();
  j["matrix"]["path_loss_models"].erase(0);
  EXPECT_THROW(rn::expand_matrix(Family::PathLoss, j, kConfigs), std::runtime_error);
}

// Each row is reproducible from its own cell configuration alone.
TEST(RunMatrix, RowsReproduceStandalone) {
  const auto cells = rn::expand_matrix(Family::PathLoss, short_base(), kConfigs);
  const auto rows = rn::run_matrix(cells, 4);
  ASSERT_EQ(rows.size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(rows[i].status, "ok") << rows[i].error;
    const auto again = rn::run_cell({cells[i].family, cells[i].mcs, cells[i].axis_value,
                                     json::parse(cells[i].config.dump())});
    EXPECT_EQ(again, rows[i]) << rn::cell_slug(cells[i]);
  }
  EXPECT_EQ(rn::run_matrix(cells, 1), rows);
}

TEST(RunMatrix, FailedCellIsReported) {
  auto cells = rn::expand_matrix(Family::Codec, short_base(), kConfigs);
  cells[1].config["flows"][0]["class"] = "GOLD";
  const auto rows = rn::run_matrix(cells, 2);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "failed");
  EXPECT_NE(rows[1].error.find("GOLD"), std::string::npos);
}

TEST(MatrixCsv, RoundTrip) {
  std::vector<rn::MatrixRow> rows = {row(Family::Class, "QPSK-1/2", "UGS", 1.0 / 3.0),
                                     row(Family::Class, "QPSK-1/2", "BE", 1e-300),
                                     row(Family::PathLoss, "64QAM-3/4", "erceg", 12345.678)};
  rows[1].status = "failed";
  std::stringstream s;
  rn::write_matrix_csv(s, rows);
  EXPECT_EQ(rn::read_matrix_csv(s), rows);
}

TEST(MatrixCsv, RejectsForeignFiles) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(rn::read_matrix_csv(bad_header), rn::UsageError);
  std::istringstream bad_row(std::string(rn::kMatrixHeader) + "\ncodec,x,y,1,2\n");
  EXPECT_THROW(rn::read_matrix_csv(bad_row), rn::UsageError);
}

TEST(Pivot, ShapeFollowsFamily) {
  std::vector<rn::MatrixRow> rows;
  const auto mcs = iptvsim::phy::default_mcs_table();
  const char* models[] = {"free_space", "erceg", "pedestrian", "vehicular"};
  const char* classes[] = {"UGS", "ertPS", "rtPS", "nrtPS", "BE"};
  double v = 0.0;
  for (const auto& p : mcs) {
    for (const char* m : models) rows.push_back(row(Family::PathLoss, p.name(), m, v += 1));
    for (const char* c : classes) rows.push_back(row(Family::Class, p.name(), c, v += 1));
  }
  const auto pl = rn::pivot(rows, "throughput_bps", Family::PathLoss);
  EXPECT_EQ(pl.mcs.size(), 7u);
  EXPECT_EQ(pl.columns.size(), 4u);
  const auto cl = rn::pivot(rows, "mean_jitter_ms", Family::Class);
  EXPECT_EQ(cl.mcs.size(), 7u);
  EXPECT_EQ(cl.columns.size(), 5u);
  EXPECT_EQ(cl.columns.front(), "UGS");
  EXPECT_EQ(pl.mcs.front(), "QPSK-1/2");
}

TEST(Pivot, EmptyInputGivesHeaderOnly) {
  std::ostringstream out;
  rn::write_pivot_csv(out, rn::pivot({}, "dropped_bps", Family::Codec));
  EXPECT_EQ(out.str(), "mcs\n");
  std::istringstream only_header(std::string(rn::kMatrixHeader) + "\n");
  EXPECT_EQ(rn::emit_plot_data(only_header, "dropped_bps", "codec"), "mcs\n");
}

TEST(Pivot, UnknownMetricOrGroupIsUsageError) {
  EXPECT_THROW(rn::pivot({}, "mos", Family::Codec), rn::UsageError);
  std::istringstream in(std::string(rn::kMatrixHeader) + "\n");
  EXPECT_THROW(rn::emit_plot_data(in, "dropped_bps", "weather"), rn::UsageError);
}

TEST(Pivot, FailedRowsLeaveEmptyCells) {
  std::vector<rn::MatrixRow> rows = {row(Family::Codec, "m", "A", 1.0),
                                     row(Family::Codec, "m", "B", 2.0)};
  rows[1].status = "failed";
  std::ostringstream out;
  rn::write_pivot_csv(out, rn::pivot(rows, "mean_jitter_ms", Family::Codec));
  EXPECT_EQ(out.str(), "mcs,A,B\nm,1,\n");
}

// Unpivoting the emitted table recovers every (family, mcs, axis, value).
TEST(PivotProperty, UnpivotRecoversTriples) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(0.0, 1e7);
  const auto mcs = iptvsim::phy::default_mcs_table();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<rn::MatrixRow> rows;
    std::vector<rn::Triple> want;
    for (const auto& p : mcs) {
      for (const char* axis : {"free_space", "erceg", "pedestrian", "vehicular"}) {
        auto r = row(Family::PathLoss, p.name(), axis, 0.0);
        r.mean_e2e_ms = val(rng);
        rows.push_back(r);
        want.push_back({Family::PathLoss, p.name(), axis, r.mean_e2e_ms});
      }
    }
    std::stringstream csv;
    rn::write_matrix_csv(csv, rows);
    std::istringstream pivoted(rn::emit_plot_data(csv, "mean_e2e_ms", "path_loss"));
    EXPECT_EQ(rn::unpivot(pivoted, Family::PathLoss), want);
  }
}

TEST(CellSlug, IsFileNameSafe) {
  const rn::MatrixCell c{Family::Class, "64QAM-3/4", "rtPS", json::object()};
  EXPECT_EQ(rn::cell_slug(c), "service_class__64QAM-3-4__rtPS");
}
