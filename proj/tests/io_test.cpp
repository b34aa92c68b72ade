#include "teleportsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace tsim {
namespace {

std::string fixture(const std::string& rel) {
  return std::string(TSIM_SOURCE_DIR) + "/" + rel;
}

class TempFile {
 public:
  explicit TempFile(const std::string& content) {
    path_ = ::testing::TempDir() + "tsim_io_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".txt";
    std::ofstream out(path_);
    out << content;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

TEST(ReadTable, SkipsCommentsAndBlankLinesAndSplitsCells) {
  const TempFile f(
      "# header comment\n"
      "\n"
      "1.0, 2.0 3.0\t4\n"
      "5 6 7 8  # trailing comment\n");
  const auto rows = read_table(f.path());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].line, 3);
  ASSERT_EQ(rows[0].cells.size(), 4u);
  EXPECT_EQ(rows[0].cells[0], "1.0");
  EXPECT_EQ(rows[1].line, 4);
  ASSERT_EQ(rows[1].cells.size(), 4u);
  EXPECT_EQ(rows[1].cells[3], "8");
}

TEST(ReadTable, MissingFileIsRejected) {
  EXPECT_THROW(read_table("/nonexistent/path/table.txt"), InputError);
}

TEST(ReadPowerScan, ParsesShippedFixture) {
  const auto pts = read_power_scan(fixture("data/power_scan.txt"));
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_DOUBLE_EQ(pts[0].pump_power_mw, 0.5);
  EXPECT_DOUBLE_EQ(pts[0].integration_s, 10.0);
  EXPECT_GT(pts.back().coincidences, pts.back().accidentals);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GT(pts[i].pump_power_mw, pts[i - 1].pump_power_mw);
  }
}

TEST(ReadPowerScan, ReportsLineOfBadNumber) {
  const TempFile f("0.5 100 100 10 1 10\n1.0 oops 100 10 1 10\n");
  try {
    read_power_scan(f.path());
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":2"), std::string::npos);
    EXPECT_NE(msg.find("oops"), std::string::npos);
  }
}

TEST(ReadDipScan, ParsesAndValidatesColumns) {
  const TempFile good("-20 1000 10\n0 400 10\n20 1010 10\n");
  const DipScan scan = read_dip_scan(good.path());
  ASSERT_EQ(scan.size(), 3u);
  EXPECT_DOUBLE_EQ(scan[1].delay_ps, 0.0);
  EXPECT_DOUBLE_EQ(scan[1].coincidences, 400.0);
  const TempFile bad("-20 1000\n");
  EXPECT_THROW(read_dip_scan(bad.path()), InputError);
}

TEST(ReadFringeScan, ParsesColumns) {
  const TempFile f("0 120 2\n1.57 80 2\n3.14 40 2\n");
  const auto pts = read_fringe_scan(f.path());
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_DOUBLE_EQ(pts[2].phase_rad, 3.14);
  EXPECT_DOUBLE_EQ(pts[2].integration_s, 2.0);
}

TEST(ReadDecoyTable, ParsesShippedFixtureInOrder) {
  const auto data = read_decoy_table(fixture("data/decoy_measured.txt"));
  ASSERT_EQ(data.size(), 4u);
  EXPECT_EQ(data[0].state_label, "e");
  EXPECT_EQ(data[1].state_label, "l");
  EXPECT_EQ(data[2].state_label, "+");
  EXPECT_EQ(data[3].state_label, "+i");
  for (const DecoyDataset& d : data) {
    EXPECT_DOUBLE_EQ(d.mu_signal, 0.088);
    EXPECT_DOUBLE_EQ(d.mu_decoy, 0.029);
    EXPECT_DOUBLE_EQ(d.mu_vacuum, 0.0);
  }
  EXPECT_DOUBLE_EQ(data[0].gain_signal, 9.92);
  EXPECT_DOUBLE_EQ(data[3].error_vacuum, 0.476);
}

TEST(ReadDecoyTable, AssignsRolesByIntensityNotRowOrder) {
  const TempFile f(
      "e 0 0.66 0.466\n"
      "e 0.029 3.78 0.097\n"
      "e 0.088 9.92 0.072\n");
  const auto data = read_decoy_table(f.path());
  ASSERT_EQ(data.size(), 1u);
  EXPECT_DOUBLE_EQ(data[0].mu_signal, 0.088);
  EXPECT_DOUBLE_EQ(data[0].gain_signal, 9.92);
  EXPECT_DOUBLE_EQ(data[0].gain_vacuum, 0.66);
}

TEST(ReadDecoyTable, RejectsWrongRowCountAndBadLadders) {
  const TempFile two_rows("e 0.088 9.92 0.072\ne 0.029 3.78 0.097\n");
  EXPECT_THROW(read_decoy_table(two_rows.path()), InputError);
  const TempFile no_vacuum(
      "e 0.088 9.92 0.072\ne 0.029 3.78 0.097\ne 0.01 1.0 0.3\n");
  EXPECT_THROW(read_decoy_table(no_vacuum.path()), InputError);
  const TempFile bad_error(
      "e 0.088 9.92 1.5\ne 0.029 3.78 0.097\ne 0 0.66 0.466\n");
  EXPECT_THROW(read_decoy_table(bad_error.path()), InputError);
}

TEST(ReadTomographyCounts, ParsesShippedFixture) {
  const TomographyCounts c =
      read_tomography_counts(fixture("data/tomography_plus.txt"));
  EXPECT_EQ(c.n_e, 500000);
  EXPECT_EQ(c.n_l, 500000);
  EXPECT_EQ(c.n_plus, 0);
  EXPECT_EQ(c.n_minus, 1000000);
  EXPECT_EQ(c.n_plus_i, 500000);
  EXPECT_EQ(c.n_minus_i, 500000);
}

TEST(ReadTomographyCounts, RejectsBadBasisRows) {
  const TempFile missing("e 10\nl 10\n+ 10\n- 10\n+i 10\n");
  EXPECT_THROW(read_tomography_counts(missing.path()), InputError);
  const TempFile dup("e 10\nl 10\n+ 10\n- 10\n+i 10\n-i 10\ne 20\n");
  EXPECT_THROW(read_tomography_counts(dup.path()), InputError);
  const TempFile unknown("e 10\nl 10\n+ 10\n- 10\n+i 10\nq 10\n");
  EXPECT_THROW(read_tomography_counts(unknown.path()), InputError);
  const TempFile fractional("e 10.5\nl 10\n+ 10\n- 10\n+i 10\n-i 10\n");
  EXPECT_THROW(read_tomography_counts(fractional.path()), InputError);
  const TempFile negative("e -1\nl 10\n+ 10\n- 10\n+i 10\n-i 10\n");
  EXPECT_THROW(read_tomography_counts(negative.path()), InputError);
}

TEST(WriteTable, RoundTripsThroughReadTable) {
  const std::string path = ::testing::TempDir() + "tsim_write_table.txt";
  write_table(path, {"x", "y"},
              {{1.0, 2.3456789012345}, {-7.5e-10, 42.0}});
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("#", 0), 0u);
  const auto rows = read_table(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[0].cells[1]), 2.3456789012345, 1e-9);
  EXPECT_NEAR(std::stod(rows[1].cells[0]), -7.5e-10, 1e-19);
  std::remove(path.c_str());
  EXPECT_THROW(write_table("/nonexistent/dir/out.txt", {"x"}, {{1.0}}),
               InputError);
}

}  // namespace
}  // namespace tsim
