#include "nloc/split.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace nloc {

double LipschitzConstraint::eval(double x) const {
  if (x <= xi.front()) return p.front();
  if (x >= xi.back()) return p.back();
  size_t j = static_cast<size_t>(std::upper_bound(xi.begin(), xi.end(), x) - xi.begin());
  double t = (x - xi[j - 1]) / (xi[j] - xi[j - 1]);
  return p[j - 1] + t * (p[j] - p[j - 1]);
}

LipschitzConstraint build_lipschitz_constraint(std::vector<double> xi, std::vector<double> p) {
  if (xi.size() != p.size() || xi.size() < 2)
    throw std::invalid_argument("lipschitz constraint: need matching samples, at least two");
  if (xi.front() != 0.0)
    throw std::invalid_argument("lipschitz constraint: domain must start at 0");
  for (size_t j = 0; j + 1 < xi.size(); ++j)
    if (!(xi[j] < xi[j + 1]))
      throw std::invalid_argument("lipschitz constraint: xi must increase strictly");
  for (size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0)) throw std::invalid_argument("lipschitz constraint: p must stay positive");
    if (j > 0 && p[j] > p[j - 1])
      throw std::invalid_argument("lipschitz constraint: p must be non-increasing");
  }
  LipschitzConstraint lc;
  lc.xi = std::move(xi);
  lc.p = std::move(p);
  for (size_t j = 0; j + 1 < lc.xi.size(); ++j)
    lc.lip = std::max(lc.lip, (lc.p[j] - lc.p[j + 1]) / (lc.xi[j + 1] - lc.xi[j]));
  return lc;
}

int ConstraintLattice::index_at(double xi) const {
  const std::vector<double>& th = step.thresholds();
  size_t i = static_cast<size_t>(std::upper_bound(th.begin(), th.end(), xi) - th.begin());
  return level_idx[i];
}

namespace {

// leftmost preimage of a level under the non-increasing PL constraint
double preimage(const LipschitzConstraint& p, double level) {
  size_t m = p.xi.size();
  for (size_t j = 0; j < m; ++j) {
    if (p.p[j] == level) return p.xi[j];
    if (p.p[j] < level) {
      // crossed strictly inside segment (j-1, j)
      double t = (p.p[j - 1] - level) / (p.p[j - 1] - p.p[j]);
      return p.xi[j - 1] + t * (p.xi[j] - p.xi[j - 1]);
    }
  }
  throw std::runtime_error("constraint lattice: level below the constraint range");
}

}  // namespace

ConstraintLattice build_constraint_lattice(const FluxModel& f, const LipschitzConstraint& p,
                                           int h) {
  if (h < 0 || h > 24) throw std::invalid_argument("constraint lattice: h out of range [0, 24]");
  double fm = f.f_max;
  double s = std::ldexp(fm, -h);
  double p_hi = p.at_zero();
  double p_lo = p.p.back();
  if (p_hi > fm * (1.0 + 1e-12))
    throw std::invalid_argument("constraint lattice: p exceeds the flux maximum");

  auto level = [&](long k) { return fm * std::ldexp(static_cast<double>(k), -h); };
  long kmax = 1L << h;
  long k_hi = std::min<long>(kmax, static_cast<long>(std::floor(p_hi / s)) + 1);
  while (k_hi >= 1 && level(k_hi) > p_hi) --k_hi;
  long k_lo = std::max<long>(1, static_cast<long>(std::ceil(p_lo / s)) - 1);
  while (k_lo <= kmax && level(k_lo) < p_lo) ++k_lo;

  ConstraintLattice lat;
  lat.h = h;
  lat.f_max = fm;
  lat.lattice_step = s;

  long count = k_hi - k_lo + 1;  // lattice levels inside [p(R), p(0)]
  if (count < 3) {
    if (k_hi < 1)
      throw std::invalid_argument(
          "constraint lattice: no positive lattice level under p(0); refine h");
    lat.step = build_step_constraint({}, {level(k_hi)});
    lat.level_idx = {static_cast<int>(k_hi)};
  } else {
    // preimages of the in-range levels, highest level first (so xi ascending);
    // drop the outermost three per the construction: thresholds are preimages
    // 1..m, values the levels k_hi-1 .. k_lo+1
    long m = count - 3;
    std::vector<double> th, vals;
    std::vector<int> idx;
    for (long j = 1; j <= m; ++j) th.push_back(preimage(p, level(k_hi - j)));
    for (long j = 1; j <= m + 1; ++j) {
      vals.push_back(level(k_hi - j));
      idx.push_back(static_cast<int>(k_hi - j));
    }
    lat.step = build_step_constraint(th, vals);
    lat.level_idx = std::move(idx);
    // threshold spacing backs the frozen-step CFL: gaps at least s / Lip(p)
    for (size_t j = 0; j + 1 < th.size(); ++j)
      if (th[j + 1] - th[j] < s / p.lip - 1e-12 * std::max(1.0, s / p.lip))
        throw std::runtime_error("constraint lattice: threshold spacing below s/Lip(p)");
  }

  // sup |p - p^h| over the combined partition; both are monotone between knots
  std::vector<double> xs = p.xi;
  for (double x : lat.step.thresholds()) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  double sup = 0.0;
  for (double x : xs) {
    sup = std::max(sup, std::abs(p.eval(x) - lat.step.left_at(x)));
    sup = std::max(sup, std::abs(p.eval(x) - lat.step.right_at(x)));
  }
  lat.sup_error = sup;
  if (sup > 2.0 * s + 1e-12 * fm)
    throw std::runtime_error("constraint lattice: approximation error above 2^(1-h) f_max");
  return lat;
}

double compute_dt(int h, const WeightFunction& w, double lip_p) {
  if (h < 0 || h > 24) throw std::invalid_argument("compute_dt: h out of range [0, 24]");
  if (!(lip_p > 0.0))
    throw std::invalid_argument(
        "compute_dt: constant efficiency has no CFL step; run a frozen advance instead");
  return 1.0 / (std::ldexp(1.0, h + 1) * w.at_zero() * lip_p);
}

namespace {

struct TempleCtx {
  const PiecewiseLinearFlux* fn = nullptr;
  double q = 0.0;
  long ell = 0;
  double dt = 0.0;
  double T = 0.0;
  int h = 0;
};

// variation in Psi summed over the front list: equals tv_psi of the profile
// whenever fronts sit at distinct positions, and gives the one-sided limit
// when an event or a fresh resolution leaves a transient stack
double tv_psi_fronts(const FrontBook& book, const PsiMap& psi) {
  double tv = 0.0;
  for (const TrackedFront& fr : book.fronts)
    tv += std::abs(psi.eval(fr.right) - psi.eval(fr.left));
  return tv;
}

double temple_upsilon(const FrontBook& book, const TempleCtx& c, bool before = false) {
  PsiMap psi(*c.fn);
  double tv = tv_psi_fronts(book, psi);
  double rho_bar = c.fn->rho_bar();
  double l = book.trace(-1, before), r = book.trace(+1, before);
  bool active = l > rho_bar && r < rho_bar && c.fn->eval(l) == c.q && c.fn->eval(r) == c.q;
  double gamma = active ? 0.0 : 4.0 * (c.fn->f_max() - c.q);
  double big =
      5.0 * std::ldexp(c.fn->f_max(), -c.h) * (c.T / c.dt - static_cast<double>(c.ell));
  return tv + gamma + big;
}

void log_temple(Trajectory* traj, const FrontBook& book, const TempleCtx& c, double t) {
  if (traj == nullptr) return;
  TempleRecord rec;
  rec.t = t;
  PsiMap psi(*c.fn);
  rec.tv_psi = tv_psi_fronts(book, psi);
  double rho_bar = c.fn->rho_bar();
  double l = book.trace(-1), r = book.trace(+1);
  bool active = l > rho_bar && r < rho_bar && c.fn->eval(l) == c.q && c.fn->eval(r) == c.q;
  rec.gamma = active ? 0.0 : 4.0 * (c.fn->f_max() - c.q);
  rec.big_gamma =
      5.0 * std::ldexp(c.fn->f_max(), -c.h) * (c.T / c.dt - static_cast<double>(c.ell));
  rec.upsilon = rec.tv_psi + rec.gamma + rec.big_gamma;
  rec.wave_count = book.wave_count();
  traj->temple.push_back(rec);
}

void log_zero_trace(Trajectory* traj, const FrontBook& book, double t, double q) {
  if (traj == nullptr) return;
  traj->zero_trace.push_back({t, book.trace(-1), book.trace(+1), q});
}

void check_evacuated(Trajectory* traj, const FrontBook& book, double t) {
  if (traj == nullptr || traj->evacuated) return;
  DensityProfile pr = book.profile();
  if (pr.values.front() != 0.0) return;  // semi-infinite data never evacuate
  if (mass_left_of_zero(pr) == 0.0) {
    traj->evacuated = true;
    traj->evacuation_time = t;
  }
}

// event loop under a frozen efficiency; horizon may exceed t_end by the
// boundary pull-in slack. ctx == nullptr skips the Temple bookkeeping.
void evolve_frozen(FrontBook& book, const PiecewiseLinearFlux& fn, double q, double t_end,
                   double horizon, Trajectory* traj, const TempleCtx* ctx) {
  int stalled = 0;
  double last_t = book.t;
  FrontBook::Event ev;
  while (book.next_event(horizon, ev)) {
    if (ev.t == last_t) {
      if (++stalled > 200000) throw std::runtime_error("front tracking stalled at one instant");
    } else {
      stalled = 0;
      last_t = ev.t;
    }
    book.advance_to(ev.t);
    double ups_before = ctx != nullptr ? temple_upsilon(book, *ctx, /*before=*/true) : 0.0;
    std::vector<FrontSegment> closed;
    EventOutcome out = process_event(book, fn, q, ev, closed);
    if (traj != nullptr) {
      for (FrontSegment& s : closed) traj->segments.push_back(s);
      EventRecord rec;
      rec.t = ev.t;
      rec.x = out.x;
      rec.label = out.label;
      rec.waves_before = out.waves_before;
      rec.waves_after = out.waves_after;
      rec.ups_before = ups_before;
      rec.ups_after = ctx != nullptr ? temple_upsilon(book, *ctx) : 0.0;
      traj->events.push_back(rec);
      if (out.at_zero) {
        log_zero_trace(traj, book, ev.t, q);
        check_evacuated(traj, book, ev.t);
      }
    }
  }
  if (book.t < t_end) book.advance_to(t_end);
}

}  // namespace

void advance_frozen(FrontBook& book, const PiecewiseLinearFlux& fn, double q, double t_end,
                    Trajectory* traj) {
  if (t_end < book.t) throw std::invalid_argument("advance_frozen: t_end before current time");
  evolve_frozen(book, fn, q, t_end, t_end + 1e-9, traj, nullptr);
}

Trajectory run_splitting(const DensityProfile& rho0, const FluxModel& f, const WeightFunction& w,
                         const LipschitzConstraint& p, const SplitConfig& cfg) {
  if (cfg.n <= cfg.h) throw std::invalid_argument("run_splitting: need n > h");
  if (cfg.n > 24) throw std::invalid_argument("run_splitting: n out of range");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("run_splitting: T must be positive");
  for (double v : rho0.values)
    if (v < 0.0 || v > f.R * (1.0 + 1e-12))
      throw std::invalid_argument("run_splitting: datum outside [0, R]");
  for (double tt : cfg.profile_times)
    if (tt < 0.0 || tt > cfg.T)
      throw std::invalid_argument("run_splitting: profile time outside [0, T]");

  PiecewiseLinearFlux fn = build_piecewise_linear(f, cfg.n);
  ConstraintLattice lat = build_constraint_lattice(f, p, cfg.h);
  double dt = cfg.dt_override > 0.0 ? cfg.dt_override : compute_dt(cfg.h, w, p.lip);
  double steps_needed = std::ceil(cfg.T / dt - 1e-12);
  if (steps_needed > static_cast<double>(cfg.max_steps))
    throw std::invalid_argument("run_splitting: step budget exceeded");

  DensityProfile rq = quantize_to_mesh(rho0, fn.mesh);
  double xi0 = nonlocal_average(rq, w);
  double q = lat.value_at(xi0);
  bool compact = rq.values.front() == 0.0 && rq.values.back() == 0.0;

  Trajectory traj;
  traj.T = cfg.T;
  traj.mass0 = compact ? mass(rq) : 0.0;

  FrontBook book = init_book(rq, fn, q, 0.0);
  TempleCtx ctx{&fn, q, 0, dt, cfg.T, cfg.h};

  traj.xi.samples.push_back({0.0, xi0, q});
  log_temple(&traj, book, ctx, 0.0);
  log_zero_trace(&traj, book, 0.0, q);
  if (compact) traj.mass_log.push_back({0.0, book_mass(book)});
  check_evacuated(&traj, book, 0.0);

  std::vector<double> snaps = cfg.profile_times;
  std::sort(snaps.begin(), snaps.end());
  size_t next_snap = 0;
  auto take_snaps = [&](double upto) {
    while (next_snap < snaps.size() && snaps[next_snap] <= upto) {
      double tau = snaps[next_snap++];
      if (tau > book.t) evolve_frozen(book, fn, q, tau, tau, &traj, &ctx);
      traj.profiles.push_back({tau, book.profile()});
    }
  };
  take_snaps(0.0);

  long ell = 0;
  while (true) {
    double te = (static_cast<double>(ell) + 1.0) * dt;
    bool final_step = te >= cfg.T - 1e-12 * std::max(1.0, cfg.T);
    if (final_step) te = cfg.T;
    take_snaps(std::min(te, cfg.T));
    evolve_frozen(book, fn, q, te, final_step ? te : te + 1e-9, &traj, &ctx);

    if (final_step) {
      double xi = nonlocal_average(book.profile(), w);
      traj.xi.samples.push_back({cfg.T, xi, q});
      // the closing record keeps the floor step index: no boundary applies at T
      TempleCtx cend = ctx;
      cend.ell = ell + (te == static_cast<double>(ell + 1) * dt ? 1 : 0);
      log_temple(&traj, book, cend, cfg.T);
      log_zero_trace(&traj, book, cfg.T, q);
      if (compact) traj.mass_log.push_back({cfg.T, book_mass(book)});
      break;
    }

    // boundary update: re-read Xi from the evolved profile, snap q to the
    // lattice, relabel and (when the solution changes) re-solve at the exit
    double xi = nonlocal_average(book.profile(), w);
    double q_new = lat.value_at(xi);
    double ups_before = temple_upsilon(book, ctx);
    double r0 = book.trace(-1), r1 = book.trace(+1);

    std::string label;
    bool resolve = false;
    if (q_new == q) {
      label = "U-noop";
    } else if (q_new > q) {
      if (r1 < r0) {
        label = "U1b";
        resolve = true;
      } else {
        label = "U1a";
      }
    } else {
      if (r1 < r0) {
        label = "U2c";
        resolve = true;
      } else if (fn.eval(r0) <= q_new) {
        label = "U2a";
      } else {
        label = "U2b";
        resolve = true;
      }
    }

    int waves_before = book.wave_count();
    if (resolve) {
      std::vector<FrontSegment> closed;
      resolve_at_zero(book, fn, q_new, closed);
      for (FrontSegment& s : closed) traj.segments.push_back(s);
    }
    ell += 1;
    q = q_new;
    ctx.q = q;
    ctx.ell = ell;

    EventRecord rec;
    rec.t = te;
    rec.x = 0.0;
    rec.label = label;
    rec.waves_before = waves_before;
    rec.waves_after = book.wave_count();
    rec.ups_before = ups_before;
    rec.ups_after = temple_upsilon(book, ctx);
    rec.detail = q_new;
    traj.events.push_back(rec);

    traj.xi.samples.push_back({te, xi, q});
    log_temple(&traj, book, ctx, te);
    log_zero_trace(&traj, book, te, q);
    if (compact) traj.mass_log.push_back({te, book_mass(book)});
    check_evacuated(&traj, book, te);
  }

  // close every still-open segment at the final time
  for (int i = 0; i < static_cast<int>(book.fronts.size()); ++i)
    book.close_segment(i, book.t, traj.segments);
  DensityProfile fin = book.profile();
  traj.remaining_mass = fin.values.front() == 0.0 ? mass_left_of_zero(fin)
                                                  : std::numeric_limits<double>::infinity();
  return traj;
}

}  // namespace nloc
