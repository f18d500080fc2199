#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "thinfilm/io.hpp"

using namespace thinfilm;
namespace fs = std::filesystem;

namespace {

constexpr double kM = 2.0 / 45.0;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("thinfilm_test_io_" + name);
  fs::remove_all(p);
  return p;
}

JkoTrajectory short_run() {
  const SmythHill s(kM);
  JkoConfig c;
  c.n_cells = 64;
  c.p_values = {1.5, 1.25};
  return run(s.quantiles(64).translated(0.2), 0.005, c, s);
}

// Rewrites one CSV column through f, keeping the header.
void edit_column(const fs::path& path, std::size_t column, double (*f)(double)) {
  std::istringstream in(io::read_file(path));
  std::string line, out;
  std::getline(in, line);
  out = line + "\n";
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    cells[column] = io::format_double(f(std::stod(cells[column])));
    for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
    out += "\n";
  }
  io::write_atomic(path, out);
}

}  // namespace

TEST(Format, DoubleRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const double x = std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100);
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
}

TEST(Atomic, WriteReplacesAndLeavesNoTemporary) {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  io::write_atomic(dir / "a.txt", "first");
  io::write_atomic(dir / "a.txt", "second");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "second");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
  EXPECT_THROW(io::read_file(dir / "missing.txt"), io::FormatError);
  fs::remove_all(dir);
}

TEST(Csv, GridRoundTrip) {
  const GridDensity g = SmythHill(kM).sample(-1.5, 1e-2, 301);
  const GridDensity r = io::parse_grid_csv(io::grid_csv(g), "mem");
  ASSERT_EQ(r.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(r[i], g[i]);
  EXPECT_NEAR(r.dx(), g.dx(), 1e-15);
}

TEST(Csv, QuantileRoundTripAndMass) {
  const QuantileDensity q = SmythHill(kM).quantiles(100);
  const QuantileDensity r = io::parse_quantile_csv(io::quantile_csv(q), "mem", kM);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(r[i], q[i]);
  // Without a mass the spacing of the fractions gives it.
  EXPECT_NEAR(io::parse_quantile_csv(io::quantile_csv(q), "mem").mass(), kM, 1e-14);
}

TEST(Csv, RejectsMalformed) {
  EXPECT_THROW(io::parse_grid_csv("x,v\n0,1\n1,1\n", "short.csv"), io::FormatError);
  std::string bad = "x,v\n";
  for (int i = 0; i < 10; ++i) bad += std::to_string(i) + "," + (i == 4 ? "-1" : "1") + "\n";
  try {
    io::parse_grid_csv(bad, "neg.csv");
    FAIL();
  } catch (const io::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("neg.csv"), std::string::npos);
  }
  EXPECT_THROW(io::parse_grid_csv("y,v\n", "hdr.csv"), io::FormatError);
  EXPECT_THROW(io::parse_quantile_csv("s,X\n0.25,1\n0.75,0\n", "dec.csv", 1.0), io::FormatError);
  EXPECT_THROW(io::parse_quantile_csv("s,X\n0.2,0\n0.75,1\n", "frac.csv", 1.0), io::FormatError);
}

TEST(Json, ConfigRoundTrip) {
  JkoConfig c;
  c.tau = 2.5e-4;
  c.n_cells = 123;
  c.p_values = {1.1, 1.9};
  c.inner_tol = 3e-7;
  const JkoConfig r = io::jko_config_from_json(io::to_json(c));
  EXPECT_EQ(r.tau, c.tau);
  EXPECT_EQ(r.n_cells, c.n_cells);
  EXPECT_EQ(r.p_values, c.p_values);
  EXPECT_EQ(r.inner_tol, c.inner_tol);
}

TEST(Trajectory, RoundTrip) {
  const JkoTrajectory traj = short_run();
  const fs::path dir = scratch("roundtrip");
  io::write_trajectory(dir, traj, 0.005, {{"ic", "smyth-translated:0.2"}});
  const io::LoadedTrajectory l = io::load_trajectory(dir);
  EXPECT_EQ(l.config.at("ic"), "smyth-translated:0.2");
  ASSERT_EQ(l.trajectory.snapshots.size(), traj.snapshots.size());
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    const Snapshot &a = traj.snapshots[n], &b = l.trajectory.snapshots[n];
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.record.H_rel, b.record.H_rel);
    EXPECT_EQ(a.record.normp1(1.25), b.record.normp1(1.25));
    EXPECT_EQ(a.diagnostics.w2_sq_moved, b.diagnostics.w2_sq_moved);
    for (std::size_t i = 0; i < a.state.size(); ++i) EXPECT_EQ(a.state[i], b.state[i]);
  }
  fs::remove_all(dir);
}

TEST(Trajectory, OutputIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  io::write_trajectory(a, short_run(), 0.005);
  io::write_trajectory(b, short_run(), 0.005);
  for (const char* f : {"records.csv", "diagnostics.csv", "snapshots/000005.csv"})
    EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Trajectory, NegatedSnapshotIsRejectedByName) {
  const fs::path dir = scratch("negated");
  io::write_trajectory(dir, short_run(), 0.005);
  const fs::path snap = dir / "snapshots" / io::snapshot_name(3);
  edit_column(snap, 1, [](double x) { return -x; });
  try {
    io::load_trajectory(dir);
    FAIL() << "corrupt snapshot accepted";
  } catch (const io::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(snap.string()), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(Trajectory, NegativeRecordAndMissingFilesAreRejected) {
  const fs::path dir = scratch("negrec");
  io::write_trajectory(dir, short_run(), 0.005);
  // Column 9 is sup_v.
  edit_column(dir / "records.csv", 9, [](double x) { return -x; });
  EXPECT_THROW(io::load_trajectory(dir), io::FormatError);
  io::write_trajectory(dir, short_run(), 0.005);
  fs::remove(dir / "diagnostics.csv");
  EXPECT_THROW(io::load_trajectory(dir), io::FormatError);
  io::write_atomic(dir / "config.json", "{not json");
  EXPECT_THROW(io::load_trajectory(dir), io::FormatError);
  fs::remove_all(dir);
}
