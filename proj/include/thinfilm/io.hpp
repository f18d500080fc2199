#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinfilm/density.hpp"
#include "thinfilm/functionals.hpp"
#include "thinfilm/inequalities.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/rates.hpp"
#include "thinfilm/transport.hpp"

namespace thinfilm::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Malformed or unreadable input; the message names the file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double x);

/// Writes to a sibling temporary file, then renames it over path.
void write_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

// CSV -----------------------------------------------------------------------

std::string grid_csv(const GridDensity& v);
std::string quantile_csv(const QuantileDensity& q);
std::string plan_csv(const TransportPlan& plan);
std::string records_csv(std::span<const FunctionalRecord> records, std::span<const double> p_values);
std::string diagnostics_csv(const JkoTrajectory& traj);

GridDensity parse_grid_csv(const std::string& text, const std::string& origin);
/// The mass is M = N (s_1 - s_0) unless given.
QuantileDensity parse_quantile_csv(const std::string& text, const std::string& origin,
                                   double mass = 0.0);
GridDensity load_grid(const fs::path& path);

// JSON ----------------------------------------------------------------------

json to_json(const FunctionalRecord& r);
json to_json(const InequalityReport& r);
json to_json(std::span<const InequalityReport> reports);
json to_json(const JkoConfig& c);
JkoConfig jko_config_from_json(const json& j);
json to_json(const RateFit& f);
json to_json(const ConvergenceReport& r);

std::string rates_csv(const ConvergenceReport& r);
/// time followed by each rate series.
std::string plot_data_csv(const JkoTrajectory& traj, std::span<const double> p_values);

// Trajectory directory -------------------------------------------------------
//
//   config.json          JkoConfig, mass, t_final and caller metadata
//   snapshots/NNNNNN.csv quantile CSV per step
//   records.csv          one FunctionalRecord row per snapshot
//   diagnostics.csv      one row per snapshot (step 0 has zero diagnostics)

std::string snapshot_name(std::size_t step);

/// Streams snapshots into dir as they arrive; summary files on finish().
class TrajectoryWriter {
 public:
  TrajectoryWriter(fs::path dir, json metadata);
  void write_snapshot(std::size_t step, const Snapshot& snapshot);
  /// Rewrites config.json, records.csv and diagnostics.csv from traj.
  void finish(const JkoTrajectory& traj, double t_final, const std::string& status);
  const fs::path& dir() const noexcept { return dir_; }

 private:
  fs::path dir_;
  json metadata_;
};

/// Writes a complete trajectory in one go.
void write_trajectory(const fs::path& dir, const JkoTrajectory& traj, double t_final,
                      const json& metadata = json::object());

struct LoadedTrajectory {
  JkoTrajectory trajectory;
  json config;
};

/// Reads config.json, records.csv, diagnostics.csv and every snapshot.
/// Throws FormatError naming the offending file; a snapshot whose positions
/// are not increasing or a record with a negative density-derived value
/// counts as corrupt.
LoadedTrajectory load_trajectory(const fs::path& dir);

}  // namespace thinfilm::io
