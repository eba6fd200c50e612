#pragma once

// The five command-line operations, callable in-process. Each takes a
// validated ScenarioConfig, writes its output file(s), and prints a
// human-readable summary to `log`.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "modgame/analysis.hpp"
#include "modgame/config.hpp"
#include "modgame/extensions.hpp"
#include "modgame/integrate.hpp"
#include "modgame/report.hpp"

namespace modgame {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3 };

inline std::string output_path(const ScenarioConfig& c, const char* fallback) {
  return c.out.empty() ? std::string(fallback) : c.out;
}

// ---------------------------------------------------------------------------

inline EquilibriumReport cmd_equilibria(const ScenarioConfig& c, std::ostream& log) {
  validate(c);
  EquilibriumReport r{std::string(to_string(c.model)), c.np, c.a, {}};
  if (c.model == ModelKind::standard) {
    const auto eqs = classified_equilibria(ModelParams(c.np, c.a));
    r.equilibria.assign(eqs.begin(), eqs.end());
  } else if (c.model == ModelKind::incentives) {
    const auto eqs = incentives_equilibria(IncentiveParams(c.np, c.a));
    r.equilibria.assign(eqs.begin(), eqs.end());
  } else {
    throw ConfigError("equilibria requires model = standard or incentives");
  }
  log << "model " << r.model << ", np = " << c.np << ", a = " << c.a << "\n"
      << equilibria_table(r.equilibria);
  const auto path = output_path(c, "equilibria.json");
  write_file_atomic(path, equilibria_json(r));
  log << "wrote " << path << "\n";
  return r;
}

// ---------------------------------------------------------------------------

struct SimulationSummary {
  Outcome terminal = Outcome::unresolved;
  std::vector<TrajectoryRow> rows;
  std::vector<RegimeCrossing> crossings;
};

inline SimulationSummary cmd_simulate(const ScenarioConfig& c, std::ostream& log) {
  validate(c);
  const SimulationOptions opt{c.T, c.dt, c.stride};
  const ReducedState s0{c.x0, c.z0};
  SimulationSummary out;
  if (c.model == ModelKind::epidemic) {
    const EpidemicParams ep = c.epidemic();
    if (!ep.stable_population()) {
      log << "note: lambda != mu, total population is not conserved\n";
    }
    const auto traj = simulate_epidemic(c.a, ep, {c.x0, c.z0, c.np}, opt);
    out.rows = trajectory_rows(traj);
    out.crossings = regime_crossings(c.a, traj);
    const auto& last = traj.final_state();
    if (last.np > 0.0 && last.np < 1.0) {
      const auto eqs = attractors(ModelParams(last.np, c.a));
      out.terminal = label_state(eqs, last.reduced());
    }
    if (traj.degenerate) log << "warning: n_p reached 0 or 1 and was clamped\n";
    for (const auto& x : out.crossings) {
      log << "regime crossing at t = " << x.t << " (n_p = " << x.np << "): " << x.what << " -> "
          << (x.now ? "true" : "false") << "\n";
    }
    log << "final state: x = " << last.x << ", z = " << last.z << ", n_p = " << last.np << "\n";
  } else {
    Trajectory traj = c.model == ModelKind::standard
                          ? simulate(ModelParams(c.np, c.a), s0, opt)
                          : simulate(IncentiveParams(c.np, c.a), s0, opt);
    out.rows = trajectory_rows(traj);
    out.terminal = traj.terminal_label;
    log << "final state: x = " << traj.final_state().x << ", z = " << traj.final_state().z << "\n";
  }
  log << "terminal label: " << to_string(out.terminal) << "\n";
  std::ostringstream csv;
  write_trajectory_csv(csv, out.rows);
  const auto path = output_path(c, "trajectory.csv");
  write_file_atomic(path, csv.str());
  log << "wrote " << path << " (" << out.rows.size() << " rows)\n";
  return out;
}

// ---------------------------------------------------------------------------

struct BasinSummary {
  BasinMap map;
  SeparatrixEstimate separatrix;
  std::optional<double> analytic_x;  // set when the closed-form basin applies
};

inline BasinSummary cmd_basin(const ScenarioConfig& c, std::ostream& log) {
  validate(c);
  const OmegaOptions opt{c.dt, c.t_max, kConvergedSpeed, kCaptureRadius};
  BasinSummary s;
  if (c.model == ModelKind::standard) {
    const ModelParams p(c.np, c.a);
    s.map = basin_map(p, c.grid, opt);
    if (closed_form_basin_applies(p)) s.analytic_x = interior_x(p);
  } else if (c.model == ModelKind::incentives) {
    s.map = basin_map(IncentiveParams(c.np, c.a), c.grid, opt);
  } else {
    throw ConfigError("basin requires model = standard or incentives");
  }
  s.separatrix = measure_separatrix(s.map);

  log << "basin map " << c.grid << "x" << c.grid << " (model " << to_string(c.model)
      << ", np = " << c.np << ", a = " << c.a << ")\n";
  for (Outcome o : kAllOutcomes) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-10s %6zu  (%.2f%%)\n", std::string(to_string(o)).c_str(),
                  s.map.count(o), 100.0 * s.map.fraction(o));
    log << buf;
  }
  if (s.separatrix.mean) log << "measured separatrix x = " << *s.separatrix.mean << "\n";
  if (s.analytic_x) log << "analytic separatrix x* = " << *s.analytic_x << "\n";

  std::ostringstream csv;
  write_basin_csv(csv, s.map);
  const auto path = output_path(c, "basin.csv");
  write_file_atomic(path, csv.str());
  log << "wrote " << path << "\n";
  return s;
}

// ---------------------------------------------------------------------------

inline std::vector<FieldSample> cmd_portrait(const ScenarioConfig& c, std::ostream& log) {
  validate(c);
  std::vector<FieldSample> samples;
  std::vector<Equilibrium> eqs;
  if (c.model == ModelKind::incentives) {
    const IncentiveParams p(c.np, c.a);
    samples = field_sample(p, c.grid);
    const auto e = incentives_equilibria(p);
    eqs.assign(e.begin(), e.end());
  } else {
    // Epidemic mode draws the frozen field at the configured n_p.
    const ModelParams p(c.np, c.a);
    samples = field_sample(p, c.grid);
    const auto e = classified_equilibria(p);
    eqs.assign(e.begin(), e.end());
  }
  std::ostringstream csv;
  write_field_csv(csv, samples);
  const auto path = output_path(c, "portrait.csv");
  write_file_atomic(path, csv.str());
  log << "wrote " << path << " (" << samples.size() << " samples)\n";
  if (!c.svg.empty()) {
    char title[128];
    std::snprintf(title, sizeof title, "%s model, n_p = %g, a = %g",
                  std::string(to_string(c.model)).c_str(), c.np, c.a);
    write_file_atomic(c.svg, render_portrait_svg(samples, eqs, title));
    log << "wrote " << c.svg << "\n";
  }
  return samples;
}

// ---------------------------------------------------------------------------

inline std::vector<double> sweep_axis(double lo, double hi, std::size_t steps) {
  std::vector<double> v;
  if (steps == 1) return {lo};
  for (std::size_t k = 0; k < steps; ++k) {
    v.push_back(k + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(k) /
                                              static_cast<double>(steps - 1));
  }
  return v;
}

inline RegimeCell regime_cell(ModelKind model, double np, double a) {
  RegimeCell cell{np, a};
  if (model == ModelKind::incentives) {
    const IncentiveParams p(np, a);
    const auto eqs = incentives_equilibria(p);
    cell.utopia_stable = incentives_utopia_stable(p);
    cell.dystopia_stable = incentives_dystopia_stable(p);
    const auto& e9 = eqs[8].point;
    cell.interior_exists = e9.x > 0.0 && e9.x < 1.0 && e9.z > 0.0 && e9.z < 1.0;
    cell.corner01_stable = eqs[1].classification == Stability::stable_node;
    cell.corner10_stable = eqs[2].classification == Stability::stable_node;
  } else {
    const ModelParams p(np, a);
    const auto corners = corner_stability(p);
    cell.utopia_stable = utopia_stable(p);
    cell.dystopia_stable = dystopia_stable(p);
    cell.interior_exists = interior_exists(p);
    cell.corner01_stable = corners.corner01;
    cell.corner10_stable = corners.corner10;
  }
  return cell;
}

inline std::vector<RegimeCell> regime_sweep(const ScenarioConfig& c) {
  std::vector<RegimeCell> cells;
  for (double np : sweep_axis(c.np_min, c.np_max, c.np_steps)) {
    for (double a : sweep_axis(c.a_min, c.a_max, c.a_steps)) {
      cells.push_back(regime_cell(c.model, np, a));
    }
  }
  return cells;
}

inline std::vector<RegimeCell> cmd_sweep(const ScenarioConfig& c, std::ostream& log) {
  validate(c);
  if (c.model == ModelKind::epidemic) throw ConfigError("sweep requires model = standard or incentives");
  const auto cells = regime_sweep(c);
  std::size_t both = 0, utopia = 0, dystopia = 0, neither = 0;
  for (const auto& cell : cells) {
    const auto r = cell.regime();
    both += r == "both-stable";
    utopia += r == "utopia-only";
    dystopia += r == "dystopia-only";
    neither += r == "neither";
  }
  log << "swept " << cells.size() << " cells: both-stable " << both << ", utopia-only " << utopia
      << ", dystopia-only " << dystopia << ", neither " << neither << "\n";
  std::ostringstream csv;
  write_sweep_csv(csv, cells);
  const auto path = output_path(c, "sweep.csv");
  write_file_atomic(path, csv.str());
  log << "wrote " << path << "\n";
  return cells;
}

}  // namespace modgame
