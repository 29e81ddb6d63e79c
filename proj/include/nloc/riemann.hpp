#pragma once
// Riemann solvers at the exit: the classical solver for bell-shaped flux, the
// constrained solver at x = 0 for a fixed efficiency q, the classification of
// Riemann data into classical / nonclassical / multi-solution cases, and the
// extremal solvers Rq (maximal exit flux) and Rp (minimal exit flux).
//
// For a Riemann datum the weighted average equals rho_l, so the constraint is
// read one-sided at rho_l: p(rho_l-) and p(rho_l+).

#include <string>
#include <vector>

#include "nloc/flux.hpp"

namespace nloc {

enum class FrontKind { shock, fan, nonclassical };

struct Front {
  double speed = 0;
  double left = 0;   // state on the left of the discontinuity
  double right = 0;  // state on the right
  FrontKind kind = FrontKind::shock;
};

// self-similar wave fan emitted from one point; fronts sorted by speed
struct WaveFan {
  std::vector<Front> fronts;

  bool empty() const { return fronts.empty(); }
  // state adjacent to the ray x = 0: just left of it / just right of it
  double left_trace(double rho_l) const;
  double right_trace(double rho_r) const;
};

// step constraint: p = p_i on (xi_i, xi_{i+1}), strictly decreasing values;
// at a threshold only the two one-sided values are exposed
class StepConstraint {
 public:
  int threshold_count() const { return static_cast<int>(xi_.size()); }
  const std::vector<double>& thresholds() const { return xi_; }
  const std::vector<double>& values() const { return p_; }

  double left_at(double xi) const;   // p(xi-)
  double right_at(double xi) const;  // p(xi+)

  friend StepConstraint build_step_constraint(const std::vector<double>& xi,
                                              const std::vector<double>& p);

 private:
  std::vector<double> xi_;  // xi_1 < ... < xi_m, may be empty (constant p)
  std::vector<double> p_;   // p_0 > ... > p_m, all positive
};

StepConstraint build_step_constraint(const std::vector<double>& xi, const std::vector<double>& p);

// how rarefactions are discretized when solving over the exact flux: interior
// states snap to mesh nodes of the fan mesh, endpoints stay exact
struct FanGrid {
  FluxModel flux;
  FluxMesh mesh;

  // strictly monotone chain from a to b (inclusive) through interior nodes
  std::vector<double> chain(double a, double b) const;
};

FanGrid build_fan_grid(const FluxModel& f, int n_fan);

// classical solver over the piecewise-linear flux: states must be mesh nodes;
// increasing data produce a single shock, decreasing data a fan of fronts
// between consecutive nodes moving at the segment slopes
WaveFan classical_riemann(const PiecewiseLinearFlux& fn, double rho_l, double rho_r);

// classical solver over the exact flux; fans discretized through the grid
WaveFan classical_riemann(const FanGrid& g, double rho_l, double rho_r);

// constrained solver at x = 0 with efficiency q: classical fan if its flux
// trace at 0 is <= q, otherwise R[rho_l, rho_hat(q)] / stationary nonclassical
// front carrying flux q / R[rho_check(q), rho_r]
WaveFan constrained_local_riemann(const PiecewiseLinearFlux& fn, double rho_l, double rho_r,
                                  double q);
WaveFan constrained_local_riemann(const FanGrid& g, double rho_l, double rho_r, double q);

enum class CaseLabel {
  C1, C2, C3, C4, C5,
  N1, N2, N3, N4a, N4b, N5a, N5b,
  CN2, CN3, NNN4, CNN5, NNN5,
};

std::string to_string(CaseLabel label);
bool is_classical_label(CaseLabel label);      // C1..C5
bool is_nonclassical_label(CaseLabel label);   // N1..N5b
bool is_pathological_label(CaseLabel label);   // CN2, CN3, NNN4, CNN5, NNN5

// one label per datum; boundary equalities resolve in the order C1..C5,
// N1..N5b, then the multi-solution labels
CaseLabel classify(const FluxModel& f, const StepConstraint& p, double rho_l, double rho_r);

// one admissible local-in-time solution: the classical fan or a nonclassical
// fan at constraint level p_bar
struct LocalSolution {
  WaveFan fan;
  bool classical = true;
  double p_bar = 0;  // meaningful when !classical
};

// the finite set of admissible self-similar solutions; a singleton exactly
// when the datum is classical (C) or nonclassical (N)
std::vector<LocalSolution> enumerate_local_solutions(const FanGrid& g, const StepConstraint& p,
                                                     double rho_l, double rho_r);

// extremal solvers: Rq maximizes the flux at the exit, Rp minimizes it
WaveFan solve_Rq(const FanGrid& g, const StepConstraint& p, double rho_l, double rho_r);
WaveFan solve_Rp(const FanGrid& g, const StepConstraint& p, double rho_l, double rho_r);

}  // namespace nloc
