#pragma once
// Shared wave-front-tracking state and run logs. A FrontBook holds the moving
// discontinuities of a piecewise-constant solution at one instant; engines
// advance it event by event (front collisions, arrivals at the exit, constraint
// updates) and append to a Trajectory as they go.

#include <array>
#include <string>
#include <vector>

#include "nloc/profile.hpp"
#include "nloc/riemann.hpp"

namespace nloc {

// One tracked discontinuity. left == right marks a zero-strength tracer used
// to carry rarefaction edges exactly; tracers move but carry no jump.
struct TrackedFront {
  long id = -1;
  double x = 0.0;
  double speed = 0.0;
  double left = 0.0;
  double right = 0.0;
  FrontKind kind = FrontKind::shock;
};

// Straight-line piece of a front trajectory in the (x, t) plane. A front that
// changes speed (by interacting) closes its current segment and opens a new
// one under the same id.
struct FrontSegment {
  long id = -1;
  double t0 = 0.0, x0 = 0.0;
  double t1 = 0.0, x1 = 0.0;
  double left = 0.0, right = 0.0;
  FrontKind kind = FrontKind::shock;
};

struct EventRecord {
  double t = 0.0;
  double x = 0.0;
  std::string label;        // I0..I4*, U1a..U2c, U-noop, init, crossing, ...
  int waves_before = 0;     // jump-carrying fronts (tracers excluded)
  int waves_after = 0;
  double ups_before = 0.0;  // Temple functional, when the engine tracks it
  double ups_after = 0.0;
  double detail = 0.0;      // label-specific: boundary shift, new q, ...
};

struct ProfileSnapshot {
  double t = 0.0;
  DensityProfile rho;
};

struct TempleRecord {
  double t = 0.0;
  double tv_psi = 0.0;
  double gamma = 0.0;      // exit penalty term
  double big_gamma = 0.0;  // remaining-steps term
  double upsilon = 0.0;
  int wave_count = 0;
};

struct Trajectory {
  std::vector<FrontSegment> segments;
  std::vector<EventRecord> events;
  std::vector<ProfileSnapshot> profiles;
  std::vector<TempleRecord> temple;
  XiTrace xi;
  std::vector<std::array<double, 2>> mass_log;     // (t, total mass)
  std::vector<std::array<double, 4>> zero_trace;   // (t, rho(0-), rho(0+), q)
  double T = 0.0;
  double mass0 = 0.0;
  bool evacuated = false;
  double evacuation_time = -1.0;
  double remaining_mass = 0.0;
};

// Piecewise-constant state of the tracked solution at time t. Fronts are kept
// sorted by position; far_left is the constant state left of every front.
class FrontBook {
 public:
  double t = 0.0;
  double far_left = 0.0;
  std::vector<TrackedFront> fronts;

  // next collision/arrival event; returns false if no front ever interacts
  struct Event {
    double t = 0.0;
    double x = 0.0;
    int i = -1;      // index of the (first) participating front
    int j = -1;      // second front for a collision, -1 for an exit arrival
    bool at_zero = false;
  };
  bool next_event(double t_end, Event& ev) const;

  // move every front along its straight line to time tt >= t
  void advance_to(double tt);

  // replace fronts [i, j] (inclusive) by the fan emitted at (x, t); new fronts
  // take ids from next_id. Fronts of the fan are laid down at position x.
  void splice(int i, int j, double x, const WaveFan& fan);

  // the profile at the current time; collapses coincident fronts (last value
  // wins) and drops zero-strength tracers
  DensityProfile profile() const;

  // rho(0-) for side < 0, rho(0+) for side >= 0; `before` reads the pre-event
  // limit when fronts are transiently stacked at the exit
  double trace(int side, bool before = false) const;
  int wave_count() const;        // fronts with left != right
  long next_id = 0;

  // open segments for the segment log, parallel to fronts
  std::vector<FrontSegment> open;
  void log_open_all(double t0);
  void close_segment(int i, double t1, std::vector<FrontSegment>& out);
};

// build a book at time t0 by resolving every jump of rho with classical fans
// away from x = 0 and the constrained solver at x = 0 (flux cap q there).
// The FanGrid variant brackets each initial rarefaction with zero-strength
// tracers riding the exact one-sided characteristic speeds.
FrontBook init_book(const DensityProfile& rho, const PiecewiseLinearFlux& fn, double q,
                    double t0 = 0.0);
FrontBook init_book(const DensityProfile& rho, const FanGrid& g, double q, double t0 = 0.0);

double book_mass(const FrontBook& book);

// integral of the profile left of the exit (the not-yet-evacuated mass)
double mass_left_of_zero(const DensityProfile& rho);

// resolve one event returned by next_event: collisions away from the exit get
// the classical solver, anything at x = 0 absorbs the whole stack of standing
// fronts and gets the constrained solver with efficiency q. Closed segments
// are appended to segs; the label follows the interaction taxonomy (I0 away
// from the exit, I1..I4 with sub-letter at it).
struct EventOutcome {
  std::string label;
  double x = 0.0;
  bool at_zero = false;
  bool nc_after = false;  // nonclassical front standing at the exit afterwards
  int waves_before = 0;
  int waves_after = 0;
};

EventOutcome process_event(FrontBook& book, const PiecewiseLinearFlux& fn, double q,
                           const FrontBook::Event& ev, std::vector<FrontSegment>& segs);
EventOutcome process_event(FrontBook& book, const FanGrid& g, double q,
                           const FrontBook::Event& ev, std::vector<FrontSegment>& segs);

// absorb and re-solve the stack at x = 0 under efficiency q (used when the
// active constraint level changes without any front arriving)
EventOutcome resolve_at_zero(FrontBook& book, const PiecewiseLinearFlux& fn, double q,
                             std::vector<FrontSegment>& segs);
EventOutcome resolve_at_zero(FrontBook& book, const FanGrid& g, double q,
                             std::vector<FrontSegment>& segs);

}  // namespace nloc
