// command-line front end: run scenario files, sweep the Riemann classification
// into a region map, run the bundled corridor benchmark, and re-validate the
// files a finished run emitted.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "nloc/scenario.hpp"

using namespace nloc;

namespace {

void print_summary(const Trajectory& traj, const std::string& dir) {
  std::printf("%zu events, %zu segments", traj.events.size(), traj.segments.size());
  if (traj.evacuated)
    std::printf(", evacuated at t=%.12g", traj.evacuation_time);
  else
    std::printf(", remaining mass %.12g", traj.remaining_mass);
  std::printf(" -> %s\n", dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"front tracking for a conservation law with a nonlocally constrained exit"};
  app.require_subcommand(1);

  std::string path, out_override;
  bool svg = false;
  int grid = 201;
  int n_fan = 12;
  std::string policy = "rq";

  CLI::App* run = app.add_subcommand("run", "run a scenario file and write its outputs");
  run->add_option("scenario", path, "scenario JSON file")->required();
  run->add_option("--out", out_override, "output directory (default $NLOC_LWR_OUT, else ./out)");
  run->add_flag("--svg", svg, "also render fronts.svg and profile.svg");

  CLI::App* rmap = app.add_subcommand("region-map", "classify Riemann data over [0,R]^2");
  rmap->add_option("scenario", path, "scenario JSON file with a step constraint")->required();
  rmap->add_option("--grid", grid, "samples per axis")->check(CLI::Range(2, 4001));
  rmap->add_option("--out", out_override, "output directory");

  CLI::App* corridor = app.add_subcommand("corridor", "run the bundled corridor benchmark");
  corridor->add_option("--n-fan", n_fan, "rarefaction discretization exponent")
      ->check(CLI::Range(1, 24));
  corridor->add_option("--policy", policy, "rq (maximal exit flux) or rp (minimal)")
      ->check(CLI::IsMember({"rq", "rp"}));
  corridor->add_option("--out", out_override, "output directory");
  corridor->add_flag("--svg", svg, "also render fronts.svg and profile.svg");

  CLI::App* val = app.add_subcommand("validate", "re-check the fronts a finished run emitted");
  val->add_option("dir", path, "output directory of a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::string dir = out_override.empty() ? default_out_dir() : out_override;
    if (run->parsed()) {
      Scenario sc = load_scenario(path);
      Trajectory traj = run_scenario(sc);
      write_outputs(sc, traj, dir, svg);
      print_summary(traj, dir);
    } else if (rmap->parsed()) {
      Scenario sc = load_scenario(path);
      if (sc.engine != "exact")
        throw std::invalid_argument("region-map requires a step-constraint scenario");
      write_region_map(sc.flux, sc.step, grid, dir);
      std::printf("%dx%d classification -> %s\n", grid, grid, dir.c_str());
    } else if (corridor->parsed()) {
      Scenario sc =
          corridor_scenario(n_fan, policy == "rq" ? SolverPolicy::rq : SolverPolicy::rp);
      Trajectory traj = run_scenario(sc);
      write_outputs(sc, traj, dir, svg);
      print_summary(traj, dir);
    } else if (val->parsed()) {
      CheckReport rep = validate_output_dir(path);
      if (rep.pass) {
        std::printf("%s: pass\n", rep.check.c_str());
      } else {
        std::printf("%s: FAIL worst=%.6g (%s)\n", rep.check.c_str(), rep.worst_violation,
                    rep.context.c_str());
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
