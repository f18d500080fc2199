// thinfilm: simulate, check, rates, w2, crossval, resume.
//
// Settings resolve as defaults, then flags given on the command line, then
// keys of the --config JSON file; a key in the file wins over its flag.
// Exit codes: 0 success, 1 domain failure, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include "thinfilm/corpus.hpp"
#include "thinfilm/fdm_oracle.hpp"
#include "thinfilm/inequalities.hpp"
#include "thinfilm/initial_condition.hpp"
#include "thinfilm/io.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/rates.hpp"
#include "thinfilm/transport.hpp"

namespace {

using namespace thinfilm;
using io::json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One subcommand's settings: bound variables plus the JSON key each maps to.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file whose keys override flags");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, const std::string& key, T& target,
                   const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, target, help)->capture_default_str();
    loaders_[key] = [&target, key](const json& j) {
      try {
        target = j.get<T>();
      } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
      }
    };
    return opt;
  }

  /// Applies the config file, if any; unknown keys are a usage error.
  void resolve() {
    if (config_path_.empty()) return;
    json j;
    try {
      j = json::parse(io::read_file(config_path_));
    } catch (const json::exception& e) {
      throw UsageError(config_path_ + ": " + e.what());
    } catch (const io::FormatError& e) {
      throw UsageError(e.what());
    }
    if (!j.is_object()) throw UsageError(config_path_ + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      auto it = loaders_.find(key);
      if (it == loaders_.end()) throw UsageError(config_path_ + ": unknown key '" + key + "'");
      it->second(value);
    }
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::function<void(const json&)>> loaders_;
};

JkoConfig jko_config(double tau, std::size_t cells, double inner_tol, int max_iters,
                     std::vector<double> p_values) {
  JkoConfig c;
  c.tau = tau;
  c.n_cells = cells;
  c.inner_tol = inner_tol;
  c.max_inner_iters = max_iters;
  c.p_values = std::move(p_values);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void print_summary(std::span<const InequalityReport> reports) {
  std::printf("%-30s %9s %9s %14s %14s\n", "check", "passed", "checked", "first_failure",
              "worst_slack");
  for (const SuiteSummary& s : summarize(reports)) {
    char first[32] = "-";
    if (s.first_failure >= 0.0) std::snprintf(first, sizeof first, "%.6g", s.first_failure);
    std::printf("%-30s %9zu %9zu %14s %14.6g\n", s.name.c_str(), s.passed, s.checked, first,
                s.worst_slack);
  }
}

void report_first_failure(std::span<const InequalityReport> reports) {
  for (const auto& r : reports)
    if (!r.passed) {
      auto t = r.context.find("time");
      std::fprintf(stderr, "first violation: %s", r.name.c_str());
      if (t != r.context.end()) std::fprintf(stderr, " at t = %.6g", t->second);
      std::fprintf(stderr, " (lhs %.10g, rhs %.10g, tolerance %.3g)\n", r.lhs, r.rhs,
                   r.tolerance);
      return;
    }
}

// simulate / resume ------------------------------------------------------------

int write_run(io::TrajectoryWriter& writer, JkoTrajectory& traj, double t_final,
              const std::function<void(const StepObserver&)>& body) {
  std::size_t next = traj.snapshots.size();
  auto observer = [&](const Snapshot& s) {
    writer.write_snapshot(next++, s);
    return true;
  };
  try {
    body(observer);
  } catch (const RunFailure& f) {
    traj = f.partial();
    writer.finish(traj, t_final, "failed");
    std::fprintf(stderr, "step failure: %s; %zu steps kept in %s\n", f.what(), traj.steps(),
                 writer.dir().c_str());
    return kFail;
  }
  writer.finish(traj, t_final, "complete");
  std::printf("%zu steps written to %s\n", traj.steps(), writer.dir().c_str());
  return kOk;
}

struct SimulateArgs {
  std::string ic = "smyth-translated:0.5";
  double mass = 2.0 / 45.0;
  double tau = 1e-3;
  std::size_t cells = 400;
  double t_final = 3.0;
  std::string out;
  std::vector<double> p_values = kDefaultPValues;
  std::uint64_t seed = 0;
  double inner_tol = JkoConfig{}.inner_tol;
  int max_inner_iters = JkoConfig{}.max_inner_iters;
};

int simulate(const SimulateArgs& a) {
  if (a.out.empty()) throw UsageError("simulate: --out is required");
  if (!(a.t_final >= 0.0)) throw UsageError("simulate: t_final must be nonnegative");
  const JkoConfig config = jko_config(a.tau, a.cells, a.inner_tol, a.max_inner_iters, a.p_values);
  InitialCondition ic;
  try {
    ic = parse_initial_condition(a.ic, a.mass);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SmythHill smyth(ic.mass);
  const QuantileDensity q0 = ic.quantiles(config.n_cells);
  json meta{{"command", "simulate"}, {"ic", a.ic}, {"seed", a.seed}};
  io::TrajectoryWriter writer(a.out, meta);
  JkoTrajectory traj;
  return write_run(writer, traj, a.t_final, [&](const StepObserver& observer) {
    traj = run(q0, a.t_final, config, smyth, observer);
  });
}

int resume(const std::string& dir, double t_final) {
  io::LoadedTrajectory loaded = io::load_trajectory(dir);
  JkoTrajectory& traj = loaded.trajectory;
  if (t_final <= traj.snapshots.back().time + 0.5 * traj.config.tau)
    std::printf("nothing to do: trajectory already reaches t = %.6g\n",
                traj.snapshots.back().time);
  const SmythHill smyth(traj.mass());
  io::TrajectoryWriter writer(dir, loaded.config);
  return write_run(writer, traj, t_final,
                   [&](const StepObserver& observer) { extend(traj, t_final, smyth, observer); });
}

// check ----------------------------------------------------------------------

struct CheckArgs {
  std::string dir;
  std::string suite = "all";
  std::string json_out;
  std::size_t static_samples = 11;
  std::size_t corpus = 0;
  std::uint64_t seed = 20261016;
  std::vector<std::string> skip;
  double c1 = kDefaultDynamicTolerance.c1;
  double c2 = kDefaultDynamicTolerance.c2;
};

void append(std::vector<InequalityReport>& out, std::vector<InequalityReport> more) {
  for (auto& r : more) out.push_back(std::move(r));
}

std::vector<InequalityReport> static_on_grid(const GridDensity& v, const SmythHill& smyth,
                                             double time) {
  auto reps = static_suite(v, smyth);
  reps.push_back(check_talagrand_half(v, smyth));
  reps.push_back(check_infbnd_optimised(v));
  for (auto& r : reps) r.context["time"] = time;
  return reps;
}

std::vector<InequalityReport> convexity_pair(const QuantileDensity& a, const QuantileDensity& b,
                                             double time) {
  std::vector<InequalityReport> reps;
  for (double t : {0.25, 0.5, 0.75}) {
    reps.push_back(check_displacement_convexity(a, b, t, 1.0));
    reps.push_back(check_displacement_convexity(a, b, t, 0.5));
  }
  reps.push_back(check_alpha_w2(a, b));
  for (auto& r : reps) r.context["time"] = time;
  return reps;
}

int check(const CheckArgs& a) {
  if (a.suite != "static" && a.suite != "dynamic" && a.suite != "all")
    throw UsageError("check: --suite must be static, dynamic or all");
  if (a.dir.empty() == (a.corpus == 0))
    throw UsageError("check: give either a trajectory directory or --corpus N");
  std::vector<InequalityReport> reports;

  if (a.corpus > 0) {
    if (a.suite == "dynamic") throw UsageError("check: the corpus has no dynamic suite");
    const SmythHill smyth(2.0 / 45.0);
    const auto corpus = bump_corpus(a.corpus, a.seed, smyth);
    std::vector<QuantileDensity> qs;
    for (const auto& e : corpus) qs.push_back(grid_to_quantile(e.density, kStaticQuantileCells));
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      append(reports, static_on_grid(corpus[k].density, smyth, static_cast<double>(k)));
      const QuantileDensity& b = qs[(k + 1) % qs.size()];
      const QuantileDensity nb(qs[k].mass(),
                               std::vector<double>(b.positions().begin(), b.positions().end()));
      append(reports, convexity_pair(qs[k], nb, static_cast<double>(k)));
    }
  } else {
    const io::LoadedTrajectory loaded = io::load_trajectory(a.dir);
    const JkoTrajectory& traj = loaded.trajectory;
    const SmythHill smyth(traj.mass());
    if (a.suite != "dynamic") {
      const std::size_t n = traj.snapshots.size();
      const std::size_t samples = std::max<std::size_t>(1, std::min(a.static_samples, n));
      const double c = smyth.support_radius();
      std::size_t previous = n;
      for (std::size_t k = 0; k < samples; ++k) {
        const std::size_t idx = samples == 1 ? 0 : k * (n - 1) / (samples - 1);
        if (idx == previous) continue;
        const Snapshot& s = traj.snapshots[idx];
        const auto rec = quantile_to_grid_window(s.state, -c, c, 8 * s.state.size() + 1);
        append(reports, static_on_grid(rec.density, smyth, s.time));
        if (previous < n) append(reports, convexity_pair(traj.snapshots[previous].state, s.state, s.time));
        previous = idx;
      }
    }
    if (a.suite != "static") {
      DynamicSuiteOptions opt;
      opt.tolerance = DynamicTolerance{a.c1, a.c2};
      append(reports, dynamic_suite(traj, opt));
      const std::size_t bad = first_entropy_increase(traj);
      InequalityReport mono = make_report(
          "H_rel.monotone", bad ? traj.snapshots[bad].record.H_rel : 0.0,
          bad ? traj.snapshots[bad - 1].record.H_rel : 0.0, 0.0);
      if (bad) mono.context["time"] = traj.snapshots[bad].time;
      reports.push_back(std::move(mono));
    }
  }

  const std::set<std::string> skip(a.skip.begin(), a.skip.end());
  std::vector<InequalityReport> kept;
  for (auto& r : reports)
    if (!skip.count(r.name)) kept.push_back(std::move(r));

  print_summary(kept);
  if (!a.json_out.empty()) io::write_atomic(a.json_out, io::to_json(kept).dump(1) + "\n");
  const bool ok = std::all_of(kept.begin(), kept.end(), [](const auto& r) { return r.passed; });
  if (!ok) report_first_failure(kept);
  return ok ? kOk : kFail;
}

// rates ----------------------------------------------------------------------

struct RatesArgs {
  std::string dir;
  std::vector<double> p_values = kDefaultPValues;
  double t_lo = -1.0;
  double t_hi = -1.0;
  std::string json_out, csv_out, plot_out;
};

int rates(const RatesArgs& a) {
  if (a.dir.empty()) throw UsageError("rates: trajectory directory required");
  const io::LoadedTrajectory loaded = io::load_trajectory(a.dir);
  const auto& traj = loaded.trajectory;
  for (double p : a.p_values)
    if (std::isnan(traj.snapshots.front().record.normp1(p)))
      throw UsageError("rates: p = " + std::to_string(p) + " was not recorded in this run");
  ConvergenceOptions opt;
  opt.t_lo = a.t_lo;
  opt.t_hi = a.t_hi;
  const ConvergenceReport report = convergence_report(traj, a.p_values, opt);
  std::printf("window [%.4g, %.4g]%s\n", report.t_lo, report.t_hi,
              report.already_converged ? "  (already converged)" : "");
  if (report.first_entropy_increase)
    std::printf("H_rel increases at step %zu\n", report.first_entropy_increase);
  std::printf("%-16s %10s %10s %10s %8s %6s %s\n", "quantity", "rate", "target", "r2",
              "samples", "pass", "status");
  for (const auto& c : report.checks)
    std::printf("%-16s %10.4f %10.4f %10.6f %8zu %6s %s\n", c.fit.quantity.c_str(), c.fit.rate,
                c.target, c.fit.r_squared, c.fit.samples, c.passed ? "yes" : "no",
                c.status.c_str());
  if (!a.json_out.empty()) io::write_atomic(a.json_out, io::to_json(report).dump(2) + "\n");
  if (!a.csv_out.empty()) io::write_atomic(a.csv_out, io::rates_csv(report));
  if (!a.plot_out.empty()) io::write_atomic(a.plot_out, io::plot_data_csv(traj, a.p_values));
  return report.passed() ? kOk : kFail;
}

// w2 -------------------------------------------------------------------------

int w2_files(const std::string& fa, const std::string& fb, std::size_t n) {
  if (fa.empty() || fb.empty()) throw UsageError("w2: two GridDensity CSV files required");
  const GridDensity a = io::load_grid(fa), b = io::load_grid(fb);
  if (std::abs(a.mass() - b.mass()) > kMassTolerance * std::max(a.mass(), b.mass())) {
    std::fprintf(stderr, "w2: masses differ (%.12g vs %.12g)\n", a.mass(), b.mass());
    return kFail;
  }
  const QuantileDensity qa = grid_to_quantile(a, n);
  const QuantileDensity qb0 = grid_to_quantile(b, n);
  const QuantileDensity qb(qa.mass(),
                           std::vector<double>(qb0.positions().begin(), qb0.positions().end()));
  std::printf("%s\n", io::format_double(w2(qa, qb)).c_str());
  return kOk;
}

// crossval -------------------------------------------------------------------

struct CrossvalArgs {
  std::string ic = "smyth-gaussian:0.05";
  double mass = 2.0 / 45.0;
  double tau = 1e-4;
  std::size_t cells = 400;
  double t_final = 0.05;
  std::string scheme = "explicit";
  double dt = 0.0;
  double tolerance = 1e-2;
  double mass_tolerance = 1e-8;
  std::string json_out;
};

int crossval(const CrossvalArgs& a) {
  const JkoConfig jc = jko_config(a.tau, a.cells, JkoConfig{}.inner_tol,
                                  JkoConfig{}.max_inner_iters, {});
  InitialCondition ic;
  try {
    ic = parse_initial_condition(a.ic, a.mass);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!ic.grid) throw UsageError("crossval: the initial condition must be grid data");
  FdmConfig fc;
  fc.dt = a.dt;
  fc.inflow_walls = true;
  if (a.scheme == "explicit")
    fc.scheme = FdmScheme::kExplicitEuler;
  else if (a.scheme == "semi-implicit")
    fc.scheme = FdmScheme::kSemiImplicit;
  else
    throw UsageError("crossval: --scheme must be explicit or semi-implicit");

  CrossvalResult r;
  try {
    r = crossvalidate(*ic.grid, a.t_final, jc, fc);
  } catch (const OracleAbort& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kFail;
  }
  const bool ok = r.l1_gap <= a.tolerance && r.fdm_mass_drift <= a.mass_tolerance &&
                  r.jko_mass_drift <= a.mass_tolerance;
  json j{{"l1_gap", r.l1_gap},
         {"reconstruction_floor", r.reconstruction_floor},
         {"fdm_change", r.fdm_change},
         {"jko_change", r.jko_change},
         {"fdm_mass_drift", r.fdm_mass_drift},
         {"jko_mass_drift", r.jko_mass_drift},
         {"jko_steps", r.jko_steps},
         {"tolerance", a.tolerance},
         {"passed", ok}};
  std::printf("%s\n", j.dump(2).c_str());
  if (!a.json_out.empty()) io::write_atomic(a.json_out, j.dump(2) + "\n");
  return ok ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimising-movement scheme for the rescaled thin-film equation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the scheme and write a trajectory");
  Settings sim_set(sim_cmd);
  sim_set.add("--ic", "ic", sim.ic, "initial condition spec");
  sim_set.add("--mass", "mass", sim.mass, "mass M");
  sim_set.add("--tau", "tau", sim.tau, "time step");
  sim_set.add("--cells", "cells", sim.cells, "number of quantile cells N");
  sim_set.add("--t-final", "t_final", sim.t_final, "final time");
  sim_set.add("--out", "out", sim.out, "output directory");
  sim_set.add("--p", "p_values", sim.p_values, "p values for the weighted norms");
  sim_set.add("--seed", "seed", sim.seed, "seed recorded with the run");
  sim_set.add("--inner-tol", "inner_tol", sim.inner_tol, "inner solver tolerance");
  sim_set.add("--max-inner-iters", "max_inner_iters", sim.max_inner_iters,
              "inner solver iteration cap");

  CheckArgs chk;
  CLI::App* chk_cmd = app.add_subcommand("check", "Run inequality suites");
  Settings chk_set(chk_cmd);
  chk_set.add("dir", "dir", chk.dir, "trajectory directory");
  chk_set.add("--suite", "suite", chk.suite, "static, dynamic or all");
  chk_set.add("--json", "json", chk.json_out, "write the reports here");
  chk_set.add("--static-samples", "static_samples", chk.static_samples,
              "snapshots checked by the static suite");
  chk_set.add("--corpus", "corpus", chk.corpus, "check N seeded bump mixtures instead");
  chk_set.add("--seed", "seed", chk.seed, "corpus seed");
  chk_set.add("--skip", "skip", chk.skip, "report names left out of the verdict");
  chk_set.add("--c1", "c1", chk.c1, "dynamic tolerance coefficient of tau");
  chk_set.add("--c2", "c2", chk.c2, "dynamic tolerance coefficient of 1/N");

  RatesArgs rat;
  CLI::App* rat_cmd = app.add_subcommand("rates", "Fit decay rates of a trajectory");
  Settings rat_set(rat_cmd);
  rat_set.add("dir", "dir", rat.dir, "trajectory directory");
  rat_set.add("--p", "p_values", rat.p_values, "p values");
  rat_set.add("--t-lo", "t_lo", rat.t_lo, "fit window start (negative: default)");
  rat_set.add("--t-hi", "t_hi", rat.t_hi, "fit window end (negative: final time)");
  rat_set.add("--json", "json", rat.json_out, "report JSON");
  rat_set.add("--csv", "csv", rat.csv_out, "report CSV");
  rat_set.add("--plot-data", "plot_data", rat.plot_out, "time series CSV");

  std::string wa, wb;
  std::size_t wn = kStaticQuantileCells;
  CLI::App* w2_cmd = app.add_subcommand("w2", "W2 distance between two GridDensity files");
  Settings w2_set(w2_cmd);
  w2_set.add("file_a", "file_a", wa, "first density");
  w2_set.add("file_b", "file_b", wb, "second density");
  w2_set.add("--quantiles", "quantiles", wn, "common quantile resolution");

  CrossvalArgs xv;
  CLI::App* xv_cmd = app.add_subcommand("crossval", "Compare the scheme with the FDM oracle");
  Settings xv_set(xv_cmd);
  xv_set.add("--ic", "ic", xv.ic, "grid initial condition spec");
  xv_set.add("--mass", "mass", xv.mass, "mass M");
  xv_set.add("--tau", "tau", xv.tau, "scheme time step");
  xv_set.add("--cells", "cells", xv.cells, "quantile cells");
  xv_set.add("--t-final", "t_final", xv.t_final, "final time");
  xv_set.add("--scheme", "scheme", xv.scheme, "explicit or semi-implicit");
  xv_set.add("--dt", "dt", xv.dt, "oracle time step (0: automatic)");
  xv_set.add("--tolerance", "tolerance", xv.tolerance, "allowed L1 gap");
  xv_set.add("--mass-tolerance", "mass_tolerance", xv.mass_tolerance, "allowed mass drift");
  xv_set.add("--json", "json", xv.json_out, "write the result here");

  std::string rdir;
  double rt = 0.0;
  CLI::App* res_cmd = app.add_subcommand("resume", "Extend a trajectory directory in place");
  Settings res_set(res_cmd);
  res_set.add("dir", "dir", rdir, "trajectory directory");
  res_set.add("--t-final", "t_final", rt, "new final time")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim_cmd) {
      sim_set.resolve();
      return simulate(sim);
    }
    if (*chk_cmd) {
      chk_set.resolve();
      return check(chk);
    }
    if (*rat_cmd) {
      rat_set.resolve();
      return rates(rat);
    }
    if (*w2_cmd) {
      w2_set.resolve();
      return w2_files(wa, wb, wn);
    }
    if (*xv_cmd) {
      xv_set.resolve();
      return crossval(xv);
    }
    if (*res_cmd) {
      res_set.resolve();
      if (rdir.empty()) throw UsageError("resume: trajectory directory required");
      return resume(rdir, rt);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const io::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  } catch (const InsufficientData& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
  return kUsage;
}
