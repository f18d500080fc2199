#include "thinfilm/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace thinfilm::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& origin, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
    std::ostringstream os;
    os << origin << ":" << line << ": not a number: '" << cell << "'";
    throw FormatError(os.str());
  }
  return x;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table parse_table(const std::string& text, const std::string& origin) {
  Table t;
  std::istringstream is(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      std::ostringstream os;
      os << origin << ":" << number << ": expected " << t.header.size() << " columns, found "
         << cells.size();
      throw FormatError(os.str());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, origin, number));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw FormatError(origin + ": empty file");
  return t;
}

void require_header(const Table& t, const std::vector<std::string>& expected,
                    const std::string& origin) {
  if (t.header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw FormatError(origin + ": expected header '" + want + "'");
  }
}

std::string join_row(std::span<const double> values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  return line;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string line;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) line += ',';
    line += names[i];
  }
  line += '\n';
  return line;
}

const std::vector<std::string> kDiagnosticColumns{
    "step",           "time",        "objective_initial", "objective_final",
    "inner_iters",    "converged",   "gradient_ratio",    "w2_sq_moved",
    "el_residual",    "edge_slope_indicator"};

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << contents;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// CSV -----------------------------------------------------------------------

std::string grid_csv(const GridDensity& v) {
  std::string out = "x,v\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double row[2] = {v.x(i), v[i]};
    out += join_row(row);
  }
  return out;
}

std::string quantile_csv(const QuantileDensity& q) {
  std::string out = "s,X\n";
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double row[2] = {q.fraction(i), q[i]};
    out += join_row(row);
  }
  return out;
}

std::string plan_csv(const TransportPlan& plan) {
  std::string out = "s,X_source,X_target\n";
  for (std::size_t i = 0; i < plan.source.size(); ++i) {
    const double row[3] = {plan.source.fraction(i), plan.source[i], plan.map_values[i]};
    out += join_row(row);
  }
  return out;
}

std::string records_csv(std::span<const FunctionalRecord> records,
                        std::span<const double> p_values) {
  std::string out = join_names(record_columns(p_values));
  for (const auto& r : records) out += join_row(record_values(r));
  return out;
}

std::string diagnostics_csv(const JkoTrajectory& traj) {
  std::string out = join_names(kDiagnosticColumns);
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    const Snapshot& s = traj.snapshots[n];
    const auto& d = s.diagnostics;
    const double row[] = {static_cast<double>(n), s.time, d.objective_initial,
                          d.objective_final, static_cast<double>(d.inner_iters),
                          d.converged ? 1.0 : 0.0, d.gradient_ratio, d.w2_sq_moved,
                          d.el_residual, d.edge_slope_indicator};
    out += join_row(row);
  }
  return out;
}

GridDensity parse_grid_csv(const std::string& text, const std::string& origin) {
  const Table t = parse_table(text, origin);
  require_header(t, {"x", "v"}, origin);
  if (t.rows.size() < GridDensity::kMinSamples)
    throw FormatError(origin + ": fewer than 8 samples");
  const double x0 = t.rows[0][0];
  const double dx = (t.rows.back()[0] - x0) / static_cast<double>(t.rows.size() - 1);
  std::vector<double> values;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double expect = x0 + dx * static_cast<double>(i);
    if (std::abs(t.rows[i][0] - expect) > 1e-6 * dx)
      throw FormatError(origin + ": x is not a uniform grid at row " + std::to_string(i + 1));
    if (!(t.rows[i][1] >= 0.0))
      throw FormatError(origin + ": negative or invalid density at row " + std::to_string(i + 1));
    values.push_back(t.rows[i][1]);
  }
  return GridDensity(x0, dx, std::move(values));
}

QuantileDensity parse_quantile_csv(const std::string& text, const std::string& origin,
                                   double mass) {
  const Table t = parse_table(text, origin);
  require_header(t, {"s", "X"}, origin);
  if (t.rows.size() < 2) throw FormatError(origin + ": fewer than 2 positions");
  const std::size_t n = t.rows.size();
  if (!(mass > 0.0)) mass = static_cast<double>(n) * (t.rows[1][0] - t.rows[0][0]);
  std::vector<double> x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * mass / static_cast<double>(n);
    if (std::abs(t.rows[i][0] - s) > 1e-9 * mass)
      throw FormatError(origin + ": mass fractions are not cell-centred at row " +
                        std::to_string(i + 1));
    if (i > 0 && !(t.rows[i][1] > x.back()))
      throw FormatError(origin + ": positions not increasing at row " + std::to_string(i + 1));
    x.push_back(t.rows[i][1]);
  }
  return QuantileDensity(mass, std::move(x));
}

GridDensity load_grid(const fs::path& path) {
  return parse_grid_csv(read_file(path), path.string());
}

// JSON ----------------------------------------------------------------------

json to_json(const FunctionalRecord& r) {
  json j;
  std::vector<double> p_values;
  for (const auto& [p, value] : r.normp1_sq) p_values.push_back(p);
  const auto names = record_columns(p_values);
  const auto values = record_values(r);
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = values[i];
  return j;
}

json to_json(const InequalityReport& r) {
  json j{{"name", r.name},   {"lhs", r.lhs},       {"rhs", r.rhs},
         {"slack", r.slack}, {"tolerance", r.tolerance}, {"passed", r.passed}};
  j["context"] = json::object();
  for (const auto& [k, v] : r.context) j["context"][k] = v;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(std::span<const InequalityReport> reports) {
  json a = json::array();
  for (const auto& r : reports) a.push_back(to_json(r));
  return a;
}

json to_json(const JkoConfig& c) {
  return json{{"tau", c.tau},
              {"n_cells", c.n_cells},
              {"eps_mono", c.eps_mono},
              {"inner_tol", c.inner_tol},
              {"max_inner_iters", c.max_inner_iters},
              {"el_check_tol", c.el_check_tol},
              {"p_values", c.p_values}};
}

JkoConfig jko_config_from_json(const json& j) {
  JkoConfig c;
  c.tau = j.value("tau", c.tau);
  c.n_cells = j.value("n_cells", c.n_cells);
  c.eps_mono = j.value("eps_mono", c.eps_mono);
  c.inner_tol = j.value("inner_tol", c.inner_tol);
  c.max_inner_iters = j.value("max_inner_iters", c.max_inner_iters);
  c.el_check_tol = j.value("el_check_tol", c.el_check_tol);
  if (j.contains("p_values")) c.p_values = j.at("p_values").get<std::vector<double>>();
  return c;
}

json to_json(const RateFit& f) {
  return json{{"quantity", f.quantity},   {"t_lo", f.t_lo},
              {"t_hi", f.t_hi},           {"rate", f.rate},
              {"amplitude", f.amplitude}, {"r_squared", f.r_squared},
              {"samples", f.samples},     {"floor_hits", f.floor_hits},
              {"zero_crossings", f.zero_crossings}};
}

json to_json(const ConvergenceReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j = to_json(c.fit);
    j["target"] = c.target;
    j["slack"] = c.slack;
    j["passed"] = c.passed;
    j["status"] = c.status;
    checks.push_back(std::move(j));
  }
  return json{{"t_lo", r.t_lo},
              {"t_hi", r.t_hi},
              {"already_converged", r.already_converged},
              {"first_entropy_increase", r.first_entropy_increase},
              {"passed", r.passed()},
              {"fits", std::move(checks)}};
}

std::string rates_csv(const ConvergenceReport& r) {
  std::string out = "quantity,t_lo,t_hi,rate,target,slack,pass\n";
  for (const auto& c : r.checks) {
    out += c.fit.quantity + "," + format_double(r.t_lo) + "," + format_double(r.t_hi) + "," +
           format_double(c.fit.rate) + "," + format_double(c.target) + "," +
           format_double(c.slack) + "," + (c.passed ? "1" : "0") + "\n";
  }
  return out;
}

std::string plot_data_csv(const JkoTrajectory& traj, std::span<const double> p_values) {
  auto names = rate_series_names(p_values);
  names.insert(names.begin(), "time");
  std::string out = join_names(names);
  const auto series = rate_series(traj, p_values);
  std::vector<double> row(names.size());
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    row[0] = traj.snapshots[n].time;
    for (std::size_t k = 0; k < series.size(); ++k) row[k + 1] = series[k][n];
    out += join_row(row);
  }
  return out;
}

// Trajectory directory -------------------------------------------------------

std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.csv", step);
  return buf;
}

TrajectoryWriter::TrajectoryWriter(fs::path dir, json metadata)
    : dir_(std::move(dir)), metadata_(std::move(metadata)) {
  fs::create_directories(dir_ / "snapshots");
}

void TrajectoryWriter::write_snapshot(std::size_t step, const Snapshot& snapshot) {
  write_atomic(dir_ / "snapshots" / snapshot_name(step), quantile_csv(snapshot.state));
}

void TrajectoryWriter::finish(const JkoTrajectory& traj, double t_final,
                              const std::string& status) {
  std::vector<FunctionalRecord> records;
  records.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) records.push_back(s.record);
  write_atomic(dir_ / "records.csv", records_csv(records, traj.config.p_values));
  write_atomic(dir_ / "diagnostics.csv", diagnostics_csv(traj));
  json config = metadata_;
  config["jko"] = to_json(traj.config);
  config["mass"] = traj.snapshots.empty() ? 0.0 : traj.mass();
  config["t_final"] = t_final;
  config["steps"] = traj.steps();
  config["status"] = status;
  write_atomic(dir_ / "config.json", config.dump(2) + "\n");
}

void write_trajectory(const fs::path& dir, const JkoTrajectory& traj, double t_final,
                      const json& metadata) {
  TrajectoryWriter writer(dir, metadata);
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n)
    writer.write_snapshot(n, traj.snapshots[n]);
  writer.finish(traj, t_final, "complete");
}

LoadedTrajectory load_trajectory(const fs::path& dir) {
  LoadedTrajectory out;
  const fs::path config_path = dir / "config.json";
  try {
    out.config = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw FormatError(config_path.string() + ": " + e.what());
  }
  JkoTrajectory& traj = out.trajectory;
  double mass = 0.0;
  try {
    traj.config = jko_config_from_json(out.config.at("jko"));
    mass = out.config.at("mass").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(config_path.string() + ": " + e.what());
  }

  const fs::path records_path = dir / "records.csv";
  const Table records = parse_table(read_file(records_path), records_path.string());
  require_header(records, record_columns(traj.config.p_values), records_path.string());
  const fs::path diag_path = dir / "diagnostics.csv";
  const Table diags = parse_table(read_file(diag_path), diag_path.string());
  require_header(diags, kDiagnosticColumns, diag_path.string());
  if (diags.rows.size() != records.rows.size())
    throw FormatError(diag_path.string() + ": row count differs from records.csv");

  for (std::size_t n = 0; n < records.rows.size(); ++n) {
    const auto& row = records.rows[n];
    FunctionalRecord r;
    double* fields[] = {&r.time,  &r.E,         &r.H,     &r.alpha,     &r.beta,
                        &r.D,     &r.D_literal, &r.extra_dissipation,   &r.M4,
                        &r.sup_v, &r.E_rel,     &r.H_rel, &r.alpha_rel, &r.beta_rel,
                        &r.norm11_sq, &r.l1_distance};
    constexpr std::size_t kFixed = sizeof fields / sizeof fields[0];
    for (std::size_t k = 0; k < kFixed; ++k) *fields[k] = row[k];
    for (std::size_t k = 0; k < traj.config.p_values.size(); ++k)
      r.normp1_sq.emplace_back(traj.config.p_values[k], row[kFixed + k]);
    if (!(r.sup_v >= 0.0) || !(r.M4 >= 0.0) || !std::isfinite(r.H))
      throw FormatError(records_path.string() + ": invalid record at row " +
                        std::to_string(n + 2));

    const auto& d = diags.rows[n];
    JkoStepDiagnostics diag;
    diag.objective_initial = d[2];
    diag.objective_final = d[3];
    diag.inner_iters = static_cast<int>(d[4]);
    diag.converged = d[5] != 0.0;
    diag.gradient_ratio = d[6];
    diag.w2_sq_moved = d[7];
    diag.el_residual = d[8];
    diag.edge_slope_indicator = d[9];

    const fs::path snap_path = dir / "snapshots" / snapshot_name(n);
    QuantileDensity state =
        parse_quantile_csv(read_file(snap_path), snap_path.string(), mass);
    if (state.size() != traj.config.n_cells)
      throw FormatError(snap_path.string() + ": wrong number of positions");
    traj.snapshots.push_back(Snapshot{r.time, std::move(state), std::move(r), diag});
  }
  if (traj.snapshots.empty()) throw FormatError(records_path.string() + ": no records");
  return out;
}

}  // namespace thinfilm::io
