#include "nloc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// weight-segment index whose quadratic stays valid while the front moves from
// x with speed s: at a shared knot the segment the front moves into
int segment_for_motion(const WeightFunction& w, double x, double s) {
  int j = w.segment_of(x);
  const std::vector<double>& kn = w.knots();
  if (s < 0.0 && j > 0 && x == kn[static_cast<size_t>(j)]) --j;
  return j;
}

// push one front of a freshly solved fan at x = 0
void push_front(FrontBook& book, const Front& fr) {
  TrackedFront tf;
  tf.id = book.next_id++;
  tf.x = 0.0;
  tf.speed = fr.speed;
  tf.left = fr.left;
  tf.right = fr.right;
  tf.kind = fr.kind;
  book.fronts.push_back(tf);
}

void push_tracer(FrontBook& book, double value, double speed) {
  Front fr;
  fr.speed = speed;
  fr.left = value;
  fr.right = value;
  fr.kind = FrontKind::fan;
  push_front(book, fr);
}

// book holding the self-similar fan of a single Riemann datum at x = 0, with
// zero-strength tracers riding the exact edges of every rarefaction
FrontBook book_from_fan(const WaveFan& fan, const FluxModel& f, double far_left) {
  FrontBook book;
  book.far_left = far_left;
  const std::vector<Front>& fs = fan.fronts;
  size_t i = 0;
  while (i < fs.size()) {
    if (fs[i].kind != FrontKind::fan) {
      push_front(book, fs[i]);
      ++i;
      continue;
    }
    size_t j = i;
    while (j + 1 < fs.size() && fs[j + 1].kind == FrontKind::fan &&
           fs[j + 1].left == fs[j].right)
      ++j;
    push_tracer(book, fs[i].left, f.char_speed(fs[i].left, -1));
    for (size_t m = i; m <= j; ++m) push_front(book, fs[m]);
    push_tracer(book, fs[j].right, f.char_speed(fs[j].right, +1));
    i = j + 1;
  }
  book.log_open_all(0.0);
  return book;
}

}  // namespace

XiWindow xi_window(const FrontBook& book, const WeightFunction& w) {
  XiWindow win;
  win.a = book.fronts.empty() ? book.far_left : book.fronts.back().right;
  const double iw = w.i_w();
  for (const TrackedFront& fr : book.fronts) {
    const double jump = fr.left - fr.right;
    if (jump == 0.0) continue;
    const double x = fr.x, s = fr.speed;
    if (x > 0.0 || (x == 0.0 && s >= 0.0)) {
      win.a += jump;  // W == 1 beyond the exit
      continue;
    }
    if (x < -iw || (x == -iw && s <= 0.0)) continue;  // W == 0 left of the window
    const WeightFunction::Quad qd = w.quad(segment_for_motion(w, x, s));
    const double u = x - qd.x_left;
    win.a += jump * (qd.c0 + u * (qd.c1 + u * qd.c2));
    win.b += jump * (qd.c1 + 2.0 * qd.c2 * u) * s;
    win.c += jump * qd.c2 * s * s;
  }
  return win;
}

bool next_knot_hit(const FrontBook& book, const WeightFunction& w, KnotHit& hit) {
  const std::vector<double>& kn = w.knots();
  bool found = false;
  for (int i = 0; i < static_cast<int>(book.fronts.size()); ++i) {
    const TrackedFront& fr = book.fronts[static_cast<size_t>(i)];
    const double s = fr.speed;
    if (s == 0.0) continue;
    double target;
    if (s > 0.0) {
      auto it = std::upper_bound(kn.begin(), kn.end(), fr.x);
      if (it == kn.end() || *it == 0.0) continue;
      target = *it;
    } else {
      auto it = std::lower_bound(kn.begin(), kn.end(), fr.x);
      if (it == kn.begin()) continue;
      --it;
      if (*it == 0.0) continue;
      target = *it;
    }
    double dt = (target - fr.x) / s;
    if (dt <= 0.0) dt = std::numeric_limits<double>::denorm_min();
    if (!found || dt < hit.dt) {
      hit.dt = dt;
      hit.front = i;
      hit.knot = target;
      found = true;
    }
  }
  return found;
}

bool threshold_root(const XiWindow& win, double target, int dir, double d_hi, double& out) {
  const double a0 = win.a - target;
  double r1 = kInf, r2 = kInf;
  if (win.c == 0.0) {
    if (win.b == 0.0) return false;
    r1 = -a0 / win.b;
  } else {
    const double disc = win.b * win.b - 4.0 * win.c * a0;
    if (disc <= 0.0) return false;  // a tangency does not cross
    const double sq = std::sqrt(disc);
    const double h = -0.5 * (win.b + std::copysign(sq, win.b));
    r1 = h / win.c;
    r2 = a0 / h;
  }
  const auto admissible = [&](double d) {
    if (!(d > 0.0 && d <= d_hi)) return false;
    const double sl = win.slope(d);
    return dir > 0 ? sl > 0.0 : sl < 0.0;
  };
  double best = kInf;
  if (admissible(r1)) best = r1;
  if (admissible(r2) && r2 < best) best = r2;
  if (best == kInf) return false;
  out = best;
  return true;
}

Trajectory run_exact(const DensityProfile& rho0, const FluxModel& f, const WeightFunction& w,
                     const StepConstraint& p, const ExactConfig& cfg) {
  if (cfg.n_fan < 1 || cfg.n_fan > 24)
    throw std::invalid_argument("run_exact: n_fan out of range [1, 24]");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("run_exact: horizon T must be positive");
  for (double v : rho0.values)
    if (v < 0.0 || v > f.R)
      throw std::invalid_argument("run_exact: initial datum outside [0, R]");
  if (p.values().front() > f.f_max)
    throw std::invalid_argument("run_exact: exit efficiency above the flux maximum");
  std::vector<double> snaps = cfg.profile_times;
  std::sort(snaps.begin(), snaps.end());
  for (double ts : snaps)
    if (ts < 0.0 || ts > cfg.T)
      throw std::invalid_argument("run_exact: profile time outside [0, T]");

  const FanGrid grid = build_fan_grid(f, cfg.n_fan);
  const std::vector<double>& thr = p.thresholds();

  Trajectory traj;
  traj.T = cfg.T;

  double xi = nonlocal_average(rho0, w);
  // interval index: thresholds strictly below Xi; at an exact threshold the
  // policy picks the side (Rq reads p(Xi-), the larger cap)
  int k = static_cast<int>(std::upper_bound(thr.begin(), thr.end(), xi) - thr.begin());
  if (cfg.policy == SolverPolicy::rq && k > 0 && xi == thr[static_cast<size_t>(k - 1)]) --k;
  double q = p.values()[static_cast<size_t>(k)];

  FrontBook book;
  const bool pure = rho0.jump_count() == 1 && rho0.breakpoints[0] == 0.0;
  if (pure) {
    // a single jump at the exit gets the full nonlocal solver, gap fillers
    // included; its nonclassical level (possibly between two step values)
    // becomes the active cap
    const double l = rho0.values[0], r = rho0.values[1];
    const WaveFan fan = cfg.policy == SolverPolicy::rq ? solve_Rq(grid, p, l, r)
                                                       : solve_Rp(grid, p, l, r);
    book = book_from_fan(fan, f, l);
    for (const TrackedFront& fr : book.fronts)
      if (fr.kind == FrontKind::nonclassical && fr.x == 0.0) q = f.eval(fr.left);
  } else {
    book = init_book(rho0, grid, q);
  }

  const bool compact = rho0.values.front() == 0.0 && rho0.values.back() == 0.0;
  if (compact) {
    traj.mass0 = book_mass(book);
    traj.mass_log.push_back({0.0, traj.mass0});
  }

  const auto check_evacuated = [&](double t) {
    if (traj.evacuated) return;
    DensityProfile pr = book.profile();
    if (pr.values.front() != 0.0) return;
    if (mass_left_of_zero(pr) == 0.0) {
      traj.evacuated = true;
      traj.evacuation_time = t;
    }
  };
  const auto log_exit = [&](double t) {
    traj.zero_trace.push_back({t, book.trace(-1), book.trace(+1), q});
    if (compact) traj.mass_log.push_back({t, book_mass(book)});
    check_evacuated(t);
  };

  traj.xi.samples.push_back({0.0, xi, q});
  log_exit(0.0);

  size_t snap_i = 0;
  long budget = cfg.max_events;
  for (;;) {
    if (--budget < 0) throw std::runtime_error("run_exact: event budget exceeded");
    const double t0 = book.t;
    const double t_snap = snap_i < snaps.size() ? snaps[snap_i] : kInf;
    const double t_stop = std::min(cfg.T, t_snap);

    FrontBook::Event bev;
    const bool has_book = book.next_event(t_stop, bev);
    const double t_book = has_book ? bev.t : kInf;

    KnotHit kh;
    const bool has_knot = next_knot_hit(book, w, kh);
    const double t_knot = has_knot ? t0 + kh.dt : kInf;

    const XiWindow win = xi_window(book, w);
    const double d_hi = std::min({t_book, t_knot, t_stop}) - t0;
    double d_cross = kInf;
    bool cross_up = false;
    if (d_hi > 0.0) {
      double d;
      if (k < static_cast<int>(thr.size()) &&
          threshold_root(win, thr[static_cast<size_t>(k)], +1, d_hi, d)) {
        d_cross = d;
        cross_up = true;
      }
      if (k > 0 && threshold_root(win, thr[static_cast<size_t>(k - 1)], -1, d_hi, d) &&
          d < d_cross) {
        d_cross = d;
        cross_up = false;
      }
    }
    const double t_cross = d_cross < kInf ? t0 + d_cross : kInf;

    if (t_cross <= t_book && t_cross <= t_knot && t_cross <= t_stop) {
      // Xi passed a threshold: adopt the new cap and re-solve the exit unless
      // the standing solution already satisfies it
      book.advance_to(t_cross);
      const double thr_hit = cross_up ? thr[static_cast<size_t>(k)]
                                      : thr[static_cast<size_t>(k - 1)];
      k += cross_up ? 1 : -1;
      const double q_new = p.values()[static_cast<size_t>(k)];
      const double r0 = book.trace(-1), r1 = book.trace(+1);
      const int waves_before = book.wave_count();
      const bool resolve = q_new > q ? r1 < r0 : (r1 < r0 || f.eval(r0) > q_new);
      q = q_new;
      if (resolve) {
        std::vector<FrontSegment> closed;
        resolve_at_zero(book, grid, q, closed);
        for (FrontSegment& s : closed) traj.segments.push_back(s);
      }
      EventRecord rec;
      rec.t = t_cross;
      rec.x = 0.0;
      rec.label = cross_up ? "X-up" : "X-down";
      rec.waves_before = waves_before;
      rec.waves_after = book.wave_count();
      rec.detail = q_new;
      traj.events.push_back(rec);
      traj.xi.samples.push_back({t_cross, thr_hit, q});
      log_exit(t_cross);
      continue;
    }

    if (has_book && t_book <= t_knot && t_book <= t_stop) {
      book.advance_to(bev.t);
      std::vector<FrontSegment> closed;
      const EventOutcome out = process_event(book, grid, q, bev, closed);
      for (FrontSegment& s : closed) traj.segments.push_back(s);
      EventRecord rec;
      rec.t = bev.t;
      rec.x = out.x;
      rec.label = out.label;
      rec.waves_before = out.waves_before;
      rec.waves_after = out.waves_after;
      traj.events.push_back(rec);
      traj.xi.samples.push_back({bev.t, win.eval(bev.t - t0), q});
      if (out.at_zero) log_exit(bev.t);
      continue;
    }

    if (has_knot && t_knot <= t_stop) {
      // re-anchor only: pin the front to its knot so the next window starts
      // from an exact breakpoint (never past a neighbour)
      book.advance_to(t_knot);
      double xx = kh.knot;
      if (kh.front + 1 < static_cast<int>(book.fronts.size()))
        xx = std::min(xx, book.fronts[static_cast<size_t>(kh.front + 1)].x);
      if (kh.front > 0) xx = std::max(xx, book.fronts[static_cast<size_t>(kh.front - 1)].x);
      book.fronts[static_cast<size_t>(kh.front)].x = xx;
      traj.xi.samples.push_back({t_knot, win.eval(kh.dt), q});
      continue;
    }

    if (snap_i < snaps.size() && t_snap <= cfg.T) {
      book.advance_to(t_snap);
      traj.profiles.push_back({t_snap, book.profile()});
      if (traj.xi.samples.back().t != t_snap)
        traj.xi.samples.push_back({t_snap, win.eval(t_snap - t0), q});
      ++snap_i;
      continue;
    }

    book.advance_to(cfg.T);
    break;
  }

  for (int i = 0; i < static_cast<int>(book.fronts.size()); ++i)
    book.close_segment(i, book.t, traj.segments);
  if (traj.xi.samples.back().t != cfg.T)
    traj.xi.samples.push_back({cfg.T, nonlocal_average(book.profile(), w), q});
  log_exit(cfg.T);
  const DensityProfile fin = book.profile();
  traj.remaining_mass = fin.values.front() == 0.0
                            ? mass_left_of_zero(fin)
                            : std::numeric_limits<double>::infinity();
  return traj;
}

}  // namespace nloc
