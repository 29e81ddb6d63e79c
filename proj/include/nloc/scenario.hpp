#pragma once
// Scenario ingestion and run orchestration for the command-line front end.
// Scenarios are JSON documents (schema "nloc-scenario/1") naming a flux, an
// exit weight, a constraint, an initial datum and engine parameters. Parsing
// is strict: unknown fields are errors, and every referenced builder runs its
// own validation so assumption violations surface with the failing rule's
// name. Emitters write CSV/JSONL/JSON (and optional SVG) with %.17g numbers
// so repeated runs produce byte-identical files.

#include <string>
#include <vector>

#include "nloc/exact.hpp"
#include "nloc/monitor.hpp"
#include "nloc/split.hpp"

namespace nloc {

struct Scenario {
  std::string engine;  // "split" or "exact"
  FluxModel flux;
  WeightFunction weight;
  LipschitzConstraint lip;  // populated when engine == "split"
  StepConstraint step;      // populated when engine == "exact"
  DensityProfile rho0;
  SplitConfig split_cfg;
  ExactConfig exact_cfg;
  std::string source_json;  // exact bytes, persisted next to the outputs
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// the bundled corridor benchmark: LWR flux, linear ramp weight on [-1, 0],
// three-level exit efficiency (0.21, 0.168, 0.021), block datum on
// [-5.75, -2], maximal-flux policy, horizon T = 95
Scenario corridor_scenario(int n_fan = 12, SolverPolicy policy = SolverPolicy::rq);

Trajectory run_scenario(const Scenario& sc);

// the monitor checks appropriate to the scenario's engine, for reports.json
std::vector<CheckReport> standard_checks(const Scenario& sc, const Trajectory& traj);

// fronts.csv, xi.csv, profiles.csv, events.jsonl, reports.json,
// evacuation.json and a byte copy of the scenario; SVG renderings on request
void write_outputs(const Scenario& sc, const Trajectory& traj, const std::string& dir,
                   bool with_svg = false);

// grid x grid sweep of the Riemann classification over [0,R]^2:
// region_map.csv rows (rho_l, rho_r, label) and a three-tone region_map.pgm
void write_region_map(const FluxModel& f, const StepConstraint& p, int grid,
                      const std::string& dir);

// re-check emitted front rows against the run's flux (Rankine-Hugoniot and
// chord conditions); used by the `validate` verb on a finished output dir
CheckReport validate_output_dir(const std::string& dir);

// NLOC_LWR_OUT env var when set, else "out"
std::string default_out_dir();

}  // namespace nloc
