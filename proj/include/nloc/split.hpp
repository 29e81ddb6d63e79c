#pragma once
// Operator-splitting engine: the exit efficiency is frozen on time steps of
// length dt_h, the conservation law runs by front tracking over the lattice
// flux f^n, and at each step boundary the weighted average Xi is re-read and
// the efficiency snaps to the dyadic constraint lattice p^h.

#include <vector>

#include "nloc/profile.hpp"
#include "nloc/riemann.hpp"
#include "nloc/tracker.hpp"

namespace nloc {

// Lipschitz, non-increasing exit efficiency given by samples (xi_i, p_i),
// interpolated linearly and clamped at the ends. xi starts at 0.
struct LipschitzConstraint {
  std::vector<double> xi;
  std::vector<double> p;
  double lip = 0.0;  // max descent slope, = Lip(p) for non-increasing p

  double eval(double x) const;
  double at_zero() const { return p.front(); }
  double domain_end() const { return xi.back(); }
};

LipschitzConstraint build_lipschitz_constraint(std::vector<double> xi, std::vector<double> p);

// step approximation p^h of a Lipschitz constraint: values are consecutive
// dyadic flux levels k * 2^-h * f_max (descending), thresholds their preimages
// under p. Evaluation is right-continuous.
struct ConstraintLattice {
  int h = 0;
  double f_max = 0.0;
  double lattice_step = 0.0;  // 2^-h * f_max
  StepConstraint step;
  std::vector<int> level_idx;  // lattice index of each value, descending by 1
  double sup_error = 0.0;      // max |p - p^h| over the domain

  double value_at(double xi) const { return step.right_at(xi); }
  int index_at(double xi) const;
};

ConstraintLattice build_constraint_lattice(const FluxModel& f, const LipschitzConstraint& p,
                                           int h);

// frozen-constraint step length: dt_h = 1 / (2^(h+1) * w(0-) * Lip(p))
double compute_dt(int h, const WeightFunction& w, double lip_p);

struct SplitConfig {
  int n = 6;   // flux lattice exponent, must exceed h
  int h = 2;   // constraint lattice exponent
  double T = 1.0;
  std::vector<double> profile_times;
  long max_steps = 10'000'000;
  double dt_override = 0.0;  // testing hook: nonzero replaces dt_h
};

// advance the book under a frozen efficiency q until t_end, resolving front
// collisions and exit arrivals as they come. Events landing within 1e-9 past
// t_end are pulled into this window (processed before the boundary update).
// When traj is given, events, segments and exit traces are appended to it.
void advance_frozen(FrontBook& book, const PiecewiseLinearFlux& fn, double q, double t_end,
                    Trajectory* traj = nullptr);

// full splitting run from rho0 (quantized onto the flux mesh) up to time T
Trajectory run_splitting(const DensityProfile& rho0, const FluxModel& f, const WeightFunction& w,
                         const LipschitzConstraint& p, const SplitConfig& cfg);

}  // namespace nloc
