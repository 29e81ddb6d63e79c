#pragma once
// Event-driven engine for the nonlocally constrained law. Between events the
// solution is piecewise constant with straight fronts, so the weighted average
// Xi is a closed-form quadratic in time on every window where no front crosses
// a weight knot. The engine advances from event to event: front collisions and
// exit arrivals (handled by the tracker), Xi passing an efficiency threshold
// (a quadratic root; the exit is re-solved at the new cap), and the knot
// crossings that merely re-anchor the quadratic.

#include <vector>

#include "nloc/profile.hpp"
#include "nloc/riemann.hpp"
#include "nloc/tracker.hpp"

namespace nloc {

// which admissible solution to pick when the datum allows several: Rq takes
// the maximal exit flux, Rp the minimal one
enum class SolverPolicy { rq, rp };

struct ExactConfig {
  int n_fan = 10;        // rarefaction discretization exponent
  double T = 1.0;        // time horizon
  std::vector<double> profile_times;
  SolverPolicy policy = SolverPolicy::rq;
  long max_events = 10'000'000;
};

// Xi over one inter-event window: Xi(t0 + d) = a + b d + c d^2
struct XiWindow {
  double a = 0.0, b = 0.0, c = 0.0;

  double eval(double d) const { return a + d * (b + d * c); }
  double slope(double d) const { return b + 2.0 * c * d; }
};

// assemble the window polynomial from the current fronts; valid until the next
// collision, exit arrival, or weight-knot crossing
XiWindow xi_window(const FrontBook& book, const WeightFunction& w);

// earliest positive dt at which some front reaches a weight knot it is moving
// toward (the exit knot 0 is excluded: reaching it is a tracker event)
struct KnotHit {
  double dt = 0.0;
  int front = -1;
  double knot = 0.0;
};
bool next_knot_hit(const FrontBook& book, const WeightFunction& w, KnotHit& hit);

// smallest d in (0, d_hi] with win(d) == target and sign(win'(d)) == dir;
// tangencies never count as crossings
bool threshold_root(const XiWindow& win, double target, int dir, double d_hi, double& out);

Trajectory run_exact(const DensityProfile& rho0, const FluxModel& f, const WeightFunction& w,
                     const StepConstraint& p, const ExactConfig& cfg);

}  // namespace nloc
