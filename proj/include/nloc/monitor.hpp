#pragma once
// Post-hoc validators over recorded trajectories: the Temple functional and its
// per-interaction decrease table, the total-variation and efficiency-jump
// bounds, an L1 stability harness, and entropy checks (Rankine-Hugoniot,
// Oleinik chords, exit constraint). Everything here reads immutable Trajectory
// data and reports violations instead of throwing.

#include <string>
#include <vector>

#include "nloc/split.hpp"
#include "nloc/tracker.hpp"

namespace nloc {

struct CheckReport {
  std::string check;
  bool pass = true;
  double worst_violation = 0.0;  // largest margin by which a bound was broken
  std::string context;           // where that happened; empty when clean
};

// Temple functional of a tracked state under frozen efficiency q:
//   tv_psi    sum of |Psi(right) - Psi(left)| over the fronts
//   gamma     0 when the exit traces straddle rho_bar and f^n(trace) == q on
//             both sides (an active constrained front), else 4 (f_max - q)
//   big_gamma 5 * 2^-h * f_max * (T/dt - floor(t/dt))
TempleRecord temple(const FrontBook& book, const PiecewiseLinearFlux& fn, double q, int h,
                    double dt, double T);

// upsilon non-increasing along the logged records and across every event, and
// dropping by at least 2^-n f_max whenever an event increases the wave count
CheckReport check_temple_monotone(const Trajectory& traj, const FluxModel& f, int n);

// observed upsilon change at each labeled event against the interaction table:
// I1a, I3a/b/c exactly 0; I1b/I1c exactly -2^(1-n) f_max per lattice level the
// arriving fan piece spans (one, unless collinear runs folded); U1a -9, U1b
// and U-noop -5, U2a/b/c -1 in units of 2^-h f_max; I0 merely non-positive
CheckReport check_interaction_table(const Trajectory& traj, const FluxModel& f, int n, int h);

// TV(Psi rho(t)) <= TV(Psi rho_0) + 4 f_max + 10 w(0-) Lip(p) f_max t
CheckReport check_tv_bound(const Trajectory& traj, const FluxModel& f, const WeightFunction& w,
                           const LipschitzConstraint& p);

// consecutive efficiency values sit on the 2^-h f_max lattice and move by at
// most one step, and the weighted average drifts by at most
// dt_h * f_max * w(0-) between consecutive readings
CheckReport check_efficiency_jumps(const Trajectory& traj, const FluxModel& f,
                                   const WeightFunction& w, const LipschitzConstraint& p, int h);

// per segment: Rankine-Hugoniot residual <= 1e-10; Oleinik chord condition at
// the flux-mesh nodes interior to each shock; constrained fronts stationary at
// the exit, straddling rho_bar, carrying exactly the active efficiency; both
// exit traces obey f(trace) <= q. First overload checks split runs against the
// lattice flux f^n, second checks exact runs against f with the fan mesh.
CheckReport validate_entropy(const Trajectory& traj, const PiecewiseLinearFlux& fn);
CheckReport validate_entropy(const Trajectory& traj, const FluxModel& f, int n_fan);

// logged total mass never drifts from the initial mass by more than 1e-9
CheckReport check_conservation(const Trajectory& traj);

// the flux is continuous across the exit: |f(rho(0-)) - f(rho(0+))| <= 1e-12
// at every logged trace
CheckReport check_flux_trace(const Trajectory& traj, const FluxModel& f);

// exact L1 distance between two piecewise-constant profiles over [lo, hi],
// integrated cell by cell on the merged breakpoint grid
double l1_distance(const DensityProfile& a, const DensityProfile& b, double lo, double hi);

struct StabilityReport {
  double T = 0.0, L = 0.0;
  double M = 0.0;  // Lip(f): how fast the comparison window widens
  double C = 0.0;  // 2 Lip(p) w(0-): the exponential rate
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};

// run both data through the splitting scheme and compare the L1 distance of
// the two states at time T over [-L, L] against e^(CT) times the distance of
// the (mesh-quantized) initial data over the window widened by M T
StabilityReport stability_pair(const DensityProfile& rho0, const DensityProfile& rho0_tilde,
                               const FluxModel& f, const WeightFunction& w,
                               const LipschitzConstraint& p, const SplitConfig& cfg, double L);

}  // namespace nloc
