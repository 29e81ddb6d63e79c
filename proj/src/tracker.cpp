#include "nloc/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nloc {

namespace {

// tie window for simultaneous events; within it prefer events at the exit,
// then the leftmost position
constexpr double kTieTol = 1e-12;

bool better(const FrontBook::Event& a, const FrontBook::Event& b) {
  double scale = std::max(1.0, std::max(std::abs(a.t), std::abs(b.t)));
  if (a.t < b.t - kTieTol * scale) return true;
  if (a.t > b.t + kTieTol * scale) return false;
  if (a.at_zero != b.at_zero) return a.at_zero;
  if (a.x != b.x) return a.x < b.x;
  return a.i < b.i;
}

}  // namespace

bool FrontBook::next_event(double t_end, Event& ev) const {
  bool found = false;
  Event best;
  int k = static_cast<int>(fronts.size());
  for (int i = 0; i + 1 < k; ++i) {
    const TrackedFront& a = fronts[static_cast<size_t>(i)];
    const TrackedFront& b = fronts[static_cast<size_t>(i + 1)];
    double ds = a.speed - b.speed;
    if (ds <= 0.0) continue;  // not approaching
    double dt = (b.x - a.x) / ds;
    if (dt < 0.0) dt = 0.0;  // ulp-crossed neighbors collide now
    Event cand;
    cand.t = t + dt;
    if (cand.t > t_end) continue;
    // place the collision using the steadier participant; a stationary front
    // at the exit pins the collision to x = 0 exactly
    cand.x = std::abs(a.speed) <= std::abs(b.speed) ? a.x + a.speed * dt : b.x + b.speed * dt;
    if (a.x == 0.0 && a.speed == 0.0) cand.x = 0.0;
    if (b.x == 0.0 && b.speed == 0.0) cand.x = 0.0;
    cand.i = i;
    cand.j = i + 1;
    cand.at_zero = cand.x == 0.0;
    if (!found || better(cand, best)) best = cand, found = true;
  }
  for (int i = 0; i < k; ++i) {
    const TrackedFront& a = fronts[static_cast<size_t>(i)];
    if (a.x == 0.0 || (a.x < 0.0) == (a.speed <= 0.0)) continue;  // moving away
    Event cand;
    cand.t = t - a.x / a.speed;
    if (cand.t < t) cand.t = t;
    if (cand.t > t_end) continue;
    cand.x = 0.0;
    cand.i = i;
    cand.j = -1;
    cand.at_zero = true;
    if (!found || better(cand, best)) best = cand, found = true;
  }
  if (found) ev = best;
  return found;
}

void FrontBook::advance_to(double tt) {
  if (tt < t) throw std::runtime_error("FrontBook::advance_to: time runs backward");
  double dt = tt - t;
  if (dt == 0.0) return;
  for (TrackedFront& fr : fronts) fr.x += fr.speed * dt;
  t = tt;
  // rounding can let a colliding pair overshoot by an ulp; repair those, keeping
  // anything sitting exactly on the exit pinned there, and refuse larger gaps
  for (size_t i = fronts.size(); i-- > 1;) {
    double& xl = fronts[i - 1].x;
    double& xr = fronts[i].x;
    if (xl <= xr) continue;
    if (xl - xr > 1e-12 * std::max(1.0, std::abs(xl)))
      throw std::runtime_error("FrontBook::advance_to: front ordering lost");
    if (xr == 0.0)
      xl = 0.0;
    else if (xl == 0.0)
      xr = 0.0;
    else
      xl = xr;
  }
}

void FrontBook::log_open_all(double t0) {
  open.clear();
  open.reserve(fronts.size());
  for (const TrackedFront& fr : fronts) {
    FrontSegment s;
    s.id = fr.id;
    s.t0 = t0;
    s.x0 = fr.x;
    s.left = fr.left;
    s.right = fr.right;
    s.kind = fr.kind;
    open.push_back(s);
  }
}

void FrontBook::close_segment(int i, double t1, std::vector<FrontSegment>& out) {
  FrontSegment s = open[static_cast<size_t>(i)];
  s.t1 = t1;
  s.x1 = fronts[static_cast<size_t>(i)].x;
  out.push_back(s);
}

void FrontBook::splice(int i, int j, double x, const WaveFan& fan) {
  int k = static_cast<int>(fronts.size());
  if (i < 0 || i > k || j < i - 1 || j >= k)  // j == i - 1 is a pure insertion
    throw std::runtime_error("FrontBook::splice: bad range");
  // the event point is predicted from pre-advance positions and can land an
  // ulp outside the surviving neighbors; pin it back inside, refuse more
  if (i > 0 && x < fronts[i - 1].x) {
    if (fronts[i - 1].x - x > 1e-12 * std::max(1.0, std::abs(x)))
      throw std::runtime_error("FrontBook::splice: event point left of the book");
    x = fronts[i - 1].x;
  }
  if (j + 1 < k && x > fronts[j + 1].x) {
    if (x - fronts[j + 1].x > 1e-12 * std::max(1.0, std::abs(x)))
      throw std::runtime_error("FrontBook::splice: event point right of the book");
    x = fronts[j + 1].x;
  }
  fronts.erase(fronts.begin() + i, fronts.begin() + j + 1);
  open.erase(open.begin() + i, open.begin() + j + 1);
  std::vector<TrackedFront> add;
  std::vector<FrontSegment> add_open;
  add.reserve(fan.fronts.size());
  for (const Front& w : fan.fronts) {
    TrackedFront fr;
    fr.id = next_id++;
    fr.x = x;
    fr.speed = w.speed;
    fr.left = w.left;
    fr.right = w.right;
    fr.kind = w.kind;
    add.push_back(fr);
    FrontSegment s;
    s.id = fr.id;
    s.t0 = t;
    s.x0 = x;
    s.left = fr.left;
    s.right = fr.right;
    s.kind = fr.kind;
    add_open.push_back(s);
  }
  fronts.insert(fronts.begin() + i, add.begin(), add.end());
  open.insert(open.begin() + i, add_open.begin(), add_open.end());
}

DensityProfile FrontBook::profile() const {
  std::vector<double> bps, vals;
  bps.reserve(fronts.size());
  vals.reserve(fronts.size() + 1);
  vals.push_back(far_left);
  for (const TrackedFront& fr : fronts) {
    if (fr.left == fr.right) continue;  // tracer
    if (!bps.empty() && fr.x == bps.back()) {
      vals.back() = fr.right;  // coincident fronts: last one wins
      continue;
    }
    if (!bps.empty() && fr.x < bps.back())
      throw std::runtime_error("FrontBook::profile: fronts out of order");
    bps.push_back(fr.x);
    vals.push_back(fr.right);
  }
  return make_profile(std::move(bps), std::move(vals));
}

double FrontBook::trace(int side, bool before) const {
  // one-sided limits at the exit: fronts parked exactly at 0 are attributed to
  // the side they are about to move into (t -> t+), or came from when reading
  // the pre-event state (t -> t-), so transient stacks read like the separated
  // solution on the requested side of the instant
  double v = far_left;
  for (const TrackedFront& fr : fronts) {
    if (fr.x > 0.0) break;
    bool take;
    if (fr.x < 0.0)
      take = true;
    else if (before)
      take = side < 0 ? fr.speed > 0.0 : fr.speed >= 0.0;
    else
      take = side < 0 ? fr.speed < 0.0 : fr.speed <= 0.0;
    if (!take) break;
    v = fr.right;
  }
  return v;
}

int FrontBook::wave_count() const {
  int c = 0;
  for (const TrackedFront& fr : fronts)
    if (fr.left != fr.right) ++c;
  return c;
}

double book_mass(const FrontBook& book) { return mass(book.profile()); }

namespace {

// fan chains produced by the solvers have strictly increasing speeds, so the
// spliced block stays sorted; tracers bracketing a t = 0 rarefaction ride at
// the exact one-sided characteristic speeds of the original flux
void push_fan(FrontBook& book, double x, const WaveFan& fan) {
  for (const Front& w : fan.fronts) {
    TrackedFront fr;
    fr.id = book.next_id++;
    fr.x = x;
    fr.speed = w.speed;
    fr.left = w.left;
    fr.right = w.right;
    fr.kind = w.kind;
    book.fronts.push_back(fr);
  }
}

void push_tracer(FrontBook& book, double x, double value, double speed) {
  TrackedFront fr;
  fr.id = book.next_id++;
  fr.x = x;
  fr.speed = speed;
  fr.left = value;
  fr.right = value;
  fr.kind = FrontKind::fan;
  book.fronts.push_back(fr);
}

bool is_rarefaction(const WaveFan& fan) {
  return !fan.empty() && fan.fronts.front().kind == FrontKind::fan;
}

WaveFan solve_classical(const PiecewiseLinearFlux& fn, double l, double r) {
  return classical_riemann(fn, l, r);
}
WaveFan solve_classical(const FanGrid& g, double l, double r) { return classical_riemann(g, l, r); }

// one-sided characteristic speeds of the reference flux (tracer speeds); only
// the FanGrid variant is reached, the PL overload keeps the template closed
double edge_speed(const PiecewiseLinearFlux&, double, int) {
  throw std::runtime_error("edge tracers are not used over the lattice flux");
}
double edge_speed(const FanGrid& g, double rho, int side) { return g.flux.char_speed(rho, side); }

}  // namespace

namespace {

template <class Solver>
FrontBook init_book_impl(const DensityProfile& rho, const Solver& solver, double q, double t0,
                         bool edge_tracers) {
  FrontBook book;
  book.t = t0;
  book.far_left = rho.values.front();
  int m = rho.jump_count();
  bool zero_is_bp = false;
  for (int k = 0; k < m; ++k)
    if (rho.breakpoints[static_cast<size_t>(k)] == 0.0) zero_is_bp = true;

  for (int k = 0; k < m; ++k) {
    double b = rho.breakpoints[static_cast<size_t>(k)];
    double l = rho.values[static_cast<size_t>(k)];
    double r = rho.values[static_cast<size_t>(k + 1)];
    WaveFan fan;
    if (b == 0.0) {
      fan = constrained_local_riemann(solver, l, r, q);
    } else {
      fan = solve_classical(solver, l, r);
    }
    if (edge_tracers && b != 0.0 && is_rarefaction(fan)) {
      // decreasing jump: trailing edge at lambda(l), leading edge at lambda(r)
      push_tracer(book, b, l, edge_speed(solver, l, -1));
      push_fan(book, b, fan);
      push_tracer(book, b, r, edge_speed(solver, r, +1));
    } else {
      push_fan(book, b, fan);
    }
  }
  if (!zero_is_bp) {
    // the exit sits inside a constant piece; the constraint may still activate
    double v = rho.value_at(0.0, +1);
    WaveFan fan = constrained_local_riemann(solver, v, v, q);
    if (!fan.empty()) {
      // insert at the right spot to keep fronts sorted by position
      FrontBook tmp;
      tmp.next_id = book.next_id;
      push_fan(tmp, 0.0, fan);
      book.next_id = tmp.next_id;
      auto it = std::lower_bound(
          book.fronts.begin(), book.fronts.end(), 0.0,
          [](const TrackedFront& fr, double xx) { return fr.x < xx; });
      book.fronts.insert(it, tmp.fronts.begin(), tmp.fronts.end());
    }
  }
  book.log_open_all(t0);
  return book;
}

WaveFan solve_constrained(const PiecewiseLinearFlux& fn, double l, double r, double q) {
  return constrained_local_riemann(fn, l, r, q);
}
WaveFan solve_constrained(const FanGrid& g, double l, double r, double q) {
  return constrained_local_riemann(g, l, r, q);
}

bool has_nonclassical(const WaveFan& fan) {
  for (const Front& w : fan.fronts)
    if (w.kind == FrontKind::nonclassical) return true;
  return false;
}

// splice the contiguous stack of fronts standing at x = 0 (plus any snapped
// participants) into the constrained resolution; labels the interaction when
// an incoming front index is given
template <class Solver>
EventOutcome absorb_at_zero(FrontBook& book, const Solver& solver, double q, int lo, int hi,
                            int incoming, std::vector<FrontSegment>& segs) {
  int k = static_cast<int>(book.fronts.size());
  int a = lo, b = hi;
  while (a > 0 && book.fronts[static_cast<size_t>(a - 1)].x == 0.0) --a;
  while (b + 1 < k && book.fronts[static_cast<size_t>(b + 1)].x == 0.0) ++b;

  EventOutcome out;
  out.x = 0.0;
  out.at_zero = true;
  out.waves_before = book.wave_count();

  double l = book.fronts[static_cast<size_t>(a)].left;
  double r = book.fronts[static_cast<size_t>(b)].right;

  std::string label = "I";
  if (incoming >= 0) {
    const TrackedFront& in = book.fronts[static_cast<size_t>(incoming)];
    bool from_left = in.speed > 0.0;
    bool fan_kind = in.kind == FrontKind::fan;
    // state wedged between the incomer and the exit, and the opposite trace
    double wedge = from_left ? in.right : in.left;
    double across = from_left ? r : l;
    label += fan_kind ? (from_left ? "1" : "2") : (from_left ? "3" : "4");
    WaveFan fan = solve_constrained(solver, l, r, q);
    out.nc_after = has_nonclassical(fan);
    if (fan_kind) {
      if (wedge != across)
        label += "c";
      else
        label += out.nc_after ? "b" : "a";
    } else {
      if (wedge == across)
        label += "a";
      else
        label += wedge < across ? "b" : "c";
    }
    for (int i = a; i <= b; ++i) book.close_segment(i, book.t, segs);
    book.splice(a, b, 0.0, fan);
    out.label = label;
  } else {
    WaveFan fan = solve_constrained(solver, l, r, q);
    out.nc_after = has_nonclassical(fan);
    for (int i = a; i <= b; ++i) book.close_segment(i, book.t, segs);
    book.splice(a, b, 0.0, fan);
    out.label = "U";
  }
  out.waves_after = book.wave_count();
  return out;
}

template <class Solver>
EventOutcome process_event_impl(FrontBook& book, const Solver& solver, double q,
                                const FrontBook::Event& ev, std::vector<FrontSegment>& segs) {
  if (ev.at_zero) {
    book.fronts[static_cast<size_t>(ev.i)].x = 0.0;
    if (ev.j >= 0) book.fronts[static_cast<size_t>(ev.j)].x = 0.0;
    int incoming = ev.i;
    if (ev.j >= 0 && book.fronts[static_cast<size_t>(ev.i)].speed == 0.0) incoming = ev.j;
    return absorb_at_zero(book, solver, q, ev.i, ev.j >= 0 ? ev.j : ev.i, incoming, segs);
  }
  EventOutcome out;
  out.x = ev.x;
  out.waves_before = book.wave_count();
  double l = book.fronts[static_cast<size_t>(ev.i)].left;
  double r = book.fronts[static_cast<size_t>(ev.j)].right;
  WaveFan fan = solve_classical(solver, l, r);
  book.close_segment(ev.i, book.t, segs);
  book.close_segment(ev.j, book.t, segs);
  book.splice(ev.i, ev.j, ev.x, fan);
  out.label = "I0";
  out.waves_after = book.wave_count();
  return out;
}

template <class Solver>
EventOutcome resolve_at_zero_impl(FrontBook& book, const Solver& solver, double q,
                                  std::vector<FrontSegment>& segs) {
  int k = static_cast<int>(book.fronts.size());
  int at = -1;
  for (int i = 0; i < k; ++i) {
    if (book.fronts[static_cast<size_t>(i)].x == 0.0) {
      at = i;
      break;
    }
  }
  if (at >= 0) return absorb_at_zero(book, solver, q, at, at, -1, segs);
  // no standing front: insert the resolution of the constant state at 0
  EventOutcome out;
  out.x = 0.0;
  out.at_zero = true;
  out.waves_before = book.wave_count();
  double v = book.trace(+1);
  WaveFan fan = solve_constrained(solver, v, v, q);
  out.nc_after = has_nonclassical(fan);
  if (!fan.empty()) {
    int ins = 0;
    while (ins < k && book.fronts[static_cast<size_t>(ins)].x < 0.0) ++ins;
    book.splice(ins, ins - 1, 0.0, fan);
  }
  out.label = "U";
  out.waves_after = book.wave_count();
  return out;
}

}  // namespace

FrontBook init_book(const DensityProfile& rho, const PiecewiseLinearFlux& fn, double q,
                    double t0) {
  return init_book_impl(rho, fn, q, t0, false);
}

FrontBook init_book(const DensityProfile& rho, const FanGrid& g, double q, double t0) {
  return init_book_impl(rho, g, q, t0, true);
}

EventOutcome process_event(FrontBook& book, const PiecewiseLinearFlux& fn, double q,
                           const FrontBook::Event& ev, std::vector<FrontSegment>& segs) {
  return process_event_impl(book, fn, q, ev, segs);
}
EventOutcome process_event(FrontBook& book, const FanGrid& g, double q,
                           const FrontBook::Event& ev, std::vector<FrontSegment>& segs) {
  return process_event_impl(book, g, q, ev, segs);
}

EventOutcome resolve_at_zero(FrontBook& book, const PiecewiseLinearFlux& fn, double q,
                             std::vector<FrontSegment>& segs) {
  return resolve_at_zero_impl(book, fn, q, segs);
}
EventOutcome resolve_at_zero(FrontBook& book, const FanGrid& g, double q,
                             std::vector<FrontSegment>& segs) {
  return resolve_at_zero_impl(book, g, q, segs);
}

double mass_left_of_zero(const DensityProfile& rho) {
  if (rho.values.front() != 0.0)
    throw std::invalid_argument("mass_left_of_zero: profile has a nonzero left tail");
  double m = 0.0;
  int jumps = rho.jump_count();
  for (int k = 0; k < jumps; ++k) {
    double a = rho.breakpoints[static_cast<size_t>(k)];
    if (a >= 0.0) break;
    double b = k + 1 < jumps ? std::min(rho.breakpoints[static_cast<size_t>(k + 1)], 0.0) : 0.0;
    m += rho.values[static_cast<size_t>(k + 1)] * (b - a);
  }
  return m;
}

}  // namespace nloc
