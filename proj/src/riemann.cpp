#include "nloc/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nloc {

double WaveFan::left_trace(double rho_l) const {
  double s = rho_l;
  for (const Front& fr : fronts) {
    if (!(fr.speed < 0)) break;
    s = fr.right;
  }
  return s;
}

double WaveFan::right_trace(double rho_r) const {
  double s = rho_r;
  for (auto it = fronts.rbegin(); it != fronts.rend(); ++it) {
    if (!(it->speed > 0)) break;
    s = it->left;
  }
  return s;
}

double StepConstraint::left_at(double xi) const {
  const size_t i = static_cast<size_t>(std::lower_bound(xi_.begin(), xi_.end(), xi) - xi_.begin());
  return p_[i];
}

double StepConstraint::right_at(double xi) const {
  const size_t i = static_cast<size_t>(std::upper_bound(xi_.begin(), xi_.end(), xi) - xi_.begin());
  return p_[i];
}

StepConstraint build_step_constraint(const std::vector<double>& xi, const std::vector<double>& p) {
  if (p.size() != xi.size() + 1)
    throw std::invalid_argument("build_step_constraint: need one more value than threshold");
  for (size_t i = 0; i < xi.size(); ++i) {
    if (!(xi[i] > 0)) throw std::invalid_argument("build_step_constraint: thresholds must be positive");
    if (i > 0 && !(xi[i] > xi[i - 1]))
      throw std::invalid_argument("build_step_constraint: thresholds must be strictly increasing");
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0) || !std::isfinite(p[i]))
      throw std::invalid_argument("build_step_constraint: efficiency values must be positive");
    if (i > 0 && !(p[i] < p[i - 1]))
      throw std::invalid_argument("build_step_constraint: efficiency values must be strictly decreasing");
  }
  StepConstraint out;
  out.xi_ = xi;
  out.p_ = p;
  return out;
}

std::vector<double> FanGrid::chain(double a, double b) const {
  std::vector<double> out;
  out.push_back(a);
  if (a == b) return out;
  const double lo = std::min(a, b), hi = std::max(a, b);
  // interior mesh nodes, skipping near-coincidences with the exact endpoints
  // (a chord over a ~0 interval has no reliable slope)
  const double margin = 1e-9;
  const auto first = std::upper_bound(mesh.nodes.begin(), mesh.nodes.end(), lo + margin);
  const auto last = std::lower_bound(mesh.nodes.begin(), mesh.nodes.end(), hi - margin);
  if (a < b) {
    for (auto it = first; it != last; ++it) out.push_back(*it);
  } else {
    for (auto it = last; it != first;) out.push_back(*--it);
  }
  out.push_back(b);
  return out;
}

FanGrid build_fan_grid(const FluxModel& f, int n_fan) {
  FanGrid g;
  g.flux = f;
  g.mesh = build_mesh(f, n_fan);
  return g;
}

namespace {

// A tabulated flux leaves many mesh segments exactly collinear, so a
// node-by-node rarefaction there would be a zero-gap stack of fronts whose
// computed speeds differ only by rounding; the tracker would then chase
// ulp-scale self-collisions. Fold maximal collinear runs into one front. True
// concave geometry separates adjacent secants by orders of magnitude more
// than the tolerance, so strictly concave fans keep one front per segment.
constexpr double kCollinearTol = 1e-9;

// computed secants inside a collinear run can still dip by an ulp; restore
// the analytic ordering so emitted fans never approach themselves
void enforce_fan_order(WaveFan& fan) {
  for (size_t i = 1; i < fan.fronts.size(); ++i)
    if (fan.fronts[i].speed < fan.fronts[i - 1].speed)
      fan.fronts[i].speed = fan.fronts[i - 1].speed;
}

}  // namespace

WaveFan classical_riemann(const PiecewiseLinearFlux& fn, double rho_l, double rho_r) {
  const FluxMesh& m = fn.mesh;
  const int il = m.find_node(rho_l, 1e-12);
  const int ir = m.find_node(rho_r, 1e-12);
  if (il < 0 || ir < 0)
    throw std::invalid_argument("classical_riemann: state is not a mesh node");
  WaveFan fan;
  if (il == ir) return fan;
  if (il < ir) {
    // increasing data: a single shock, admissible for any concave flux
    const double fl = m.level_value(m.level_of_node(il));
    const double fr = m.level_value(m.level_of_node(ir));
    fan.fronts.push_back({shock_speed_from_values(fl, fr, m.node(il), m.node(ir)), m.node(il),
                          m.node(ir), FrontKind::shock});
    return fan;
  }
  // decreasing data: rarefaction fan, one front per mesh segment, with
  // collinear runs folded into a single front
  const double tol = kCollinearTol * std::max(1.0, fn.lip);
  int run_hi = il;
  double run_slope = 0.0;
  auto segment_slope = [&m](int j) {
    return shock_speed_from_values(m.level_value(m.level_of_node(j)),
                                   m.level_value(m.level_of_node(j - 1)), m.node(j),
                                   m.node(j - 1));
  };
  auto emit = [&](int jhi, int jlo) {
    const double a = m.node(jhi), b = m.node(jlo);
    const double fa = m.level_value(m.level_of_node(jhi));
    const double fb = m.level_value(m.level_of_node(jlo));
    fan.fronts.push_back({shock_speed_from_values(fa, fb, a, b), a, b, FrontKind::fan});
  };
  for (int j = il; j > ir; --j) {
    const double s = segment_slope(j);
    if (j == il) {
      run_slope = s;
    } else if (std::abs(s - run_slope) > tol) {
      emit(run_hi, j);
      run_hi = j;
      run_slope = s;
    }
  }
  emit(run_hi, ir);
  enforce_fan_order(fan);
  return fan;
}

WaveFan classical_riemann(const FanGrid& g, double rho_l, double rho_r) {
  WaveFan fan;
  if (rho_l == rho_r) return fan;
  if (rho_l < rho_r) {
    fan.fronts.push_back(
        {shock_speed(g.flux, rho_l, rho_r), rho_l, rho_r, FrontKind::shock});
    return fan;
  }
  const std::vector<double> states = g.chain(rho_l, rho_r);
  const double tol = kCollinearTol * std::max(1.0, g.flux.lip_f);
  size_t run_start = 0;
  double run_slope = 0.0;
  for (size_t i = 1; i < states.size(); ++i) {
    const double s = shock_speed(g.flux, states[i - 1], states[i]);
    if (i == 1) {
      run_slope = s;
    } else if (std::abs(s - run_slope) > tol) {
      fan.fronts.push_back({shock_speed(g.flux, states[run_start], states[i - 1]),
                            states[run_start], states[i - 1], FrontKind::fan});
      run_start = i - 1;
      run_slope = s;
    }
  }
  fan.fronts.push_back({shock_speed(g.flux, states[run_start], states.back()), states[run_start],
                        states.back(), FrontKind::fan});
  enforce_fan_order(fan);
  return fan;
}

namespace {

// shared assembly of the nonclassical fan: left wave down to rho_hat, the
// stationary front carrying exactly q, then the right wave from rho_check
template <class Classical>
WaveFan assemble_constrained(double rho_l, double rho_r, double rho_check, double rho_hat,
                             Classical&& solve) {
  WaveFan out;
  const WaveFan left = solve(rho_l, rho_hat);
  for (const Front& fr : left.fronts) {
    if (!(fr.speed < 0))
      throw std::runtime_error("constrained fan: left wave must have negative speeds");
    out.fronts.push_back(fr);
  }
  out.fronts.push_back({0.0, rho_hat, rho_check, FrontKind::nonclassical});
  const WaveFan right = solve(rho_check, rho_r);
  for (const Front& fr : right.fronts) {
    if (fr.speed == 0 && out.fronts.back().kind == FrontKind::nonclassical) {
      // degenerate overlap at x = 0 (f(rho_r) equals q exactly): fold the
      // stationary classical jump into the nonclassical front
      out.fronts.back().right = fr.right;
      continue;
    }
    if (!(fr.speed > 0))
      throw std::runtime_error("constrained fan: right wave must have positive speeds");
    out.fronts.push_back(fr);
  }
  return out;
}

}  // namespace

WaveFan constrained_local_riemann(const PiecewiseLinearFlux& fn, double rho_l, double rho_r,
                                  double q) {
  const FluxMesh& m = fn.mesh;
  if (!(q > 0)) throw std::invalid_argument("constrained_local_riemann: q must be positive");
  if (q > m.f_max * (1 + 1e-12))
    throw std::invalid_argument("constrained_local_riemann: q above the flux peak");
  const double step = std::ldexp(m.f_max, -m.n);
  const int k = static_cast<int>(std::llround(q / step));
  if (k < 1 || k > (1 << m.n) || std::abs(m.level_value(k) - q) > 1e-12 * m.f_max)
    throw std::invalid_argument("constrained_local_riemann: q is not a mesh flux level");

  const WaveFan classical = classical_riemann(fn, rho_l, rho_r);
  const double trace = fn.eval(classical.left_trace(rho_l));
  if (trace <= m.level_value(k)) return classical;

  const auto [ic, ih] = m.nodes_for_level(k);
  return assemble_constrained(rho_l, rho_r, m.node(ic), m.node(ih),
                              [&fn](double a, double b) { return classical_riemann(fn, a, b); });
}

WaveFan constrained_local_riemann(const FanGrid& g, double rho_l, double rho_r, double q) {
  if (!(q > 0)) throw std::invalid_argument("constrained_local_riemann: q must be positive");
  if (q > g.flux.f_max * (1 + 1e-12))
    throw std::invalid_argument("constrained_local_riemann: q above the flux peak");
  const WaveFan classical = classical_riemann(g, rho_l, rho_r);
  const double trace = g.flux.eval(classical.left_trace(rho_l));
  if (trace <= q + 1e-12 * g.flux.f_max) return classical;
  const auto [rc, rh] = rho_check_hat(g.flux, q);
  return assemble_constrained(rho_l, rho_r, rc, rh,
                              [&g](double a, double b) { return classical_riemann(g, a, b); });
}

std::string to_string(CaseLabel label) {
  switch (label) {
    case CaseLabel::C1: return "C1";
    case CaseLabel::C2: return "C2";
    case CaseLabel::C3: return "C3";
    case CaseLabel::C4: return "C4";
    case CaseLabel::C5: return "C5";
    case CaseLabel::N1: return "N1";
    case CaseLabel::N2: return "N2";
    case CaseLabel::N3: return "N3";
    case CaseLabel::N4a: return "N4a";
    case CaseLabel::N4b: return "N4b";
    case CaseLabel::N5a: return "N5a";
    case CaseLabel::N5b: return "N5b";
    case CaseLabel::CN2: return "CN2";
    case CaseLabel::CN3: return "CN3";
    case CaseLabel::NNN4: return "NNN4";
    case CaseLabel::CNN5: return "CNN5";
    case CaseLabel::NNN5: return "NNN5";
  }
  return "?";
}

bool is_classical_label(CaseLabel label) {
  switch (label) {
    case CaseLabel::C1:
    case CaseLabel::C2:
    case CaseLabel::C3:
    case CaseLabel::C4:
    case CaseLabel::C5: return true;
    default: return false;
  }
}

bool is_nonclassical_label(CaseLabel label) {
  switch (label) {
    case CaseLabel::N1:
    case CaseLabel::N2:
    case CaseLabel::N3:
    case CaseLabel::N4a:
    case CaseLabel::N4b:
    case CaseLabel::N5a:
    case CaseLabel::N5b: return true;
    default: return false;
  }
}

bool is_pathological_label(CaseLabel label) {
  return !is_classical_label(label) && !is_nonclassical_label(label);
}

CaseLabel classify(const FluxModel& f, const StepConstraint& p, double rho_l, double rho_r) {
  const double fl = f.eval(rho_l);
  const double fr = f.eval(rho_r);
  const double fbar = f.f_max;
  const double rb = f.rho_bar;
  const double pm = p.left_at(rho_l);  // p(rho_l-)
  const double pp = p.right_at(rho_l);

  if (rho_l < rho_r) {
    if (fr < fl) return fr <= pp ? CaseLabel::C1 : CaseLabel::N1;
    if (fl <= pp) return CaseLabel::C2;
    if (fl > pm) return CaseLabel::N2;
    return CaseLabel::CN2;  // pp < fl <= pm, only reachable when pm != pp
  }
  if (rho_l <= rb) {  // rho_r <= rho_l <= rho_bar
    if (fl <= pp) return CaseLabel::C3;
    if (fl > pm) return CaseLabel::N3;
    return CaseLabel::CN3;
  }
  if (rho_r <= rb) {  // rho_r <= rho_bar < rho_l
    if (pp == fbar) return CaseLabel::C4;
    if (pm == fbar) {
      // p jumps down from the peak value: below pp the only admissible
      // nonclassical level is the peak itself, i.e. the classical fan
      if (fl < pp) return CaseLabel::C4;
      return CaseLabel::NNN4;  // pp <= fl <= pm
    }
    if (pm == pp) {
      if (fl < pp) return CaseLabel::N4a;
      // fl >= p at a continuity point: the unique solution is nonclassical
      // at level p even when fl == p exactly
      return CaseLabel::N4b;
    }
    if (fl < pp) return CaseLabel::N4a;
    if (fl > pm) return CaseLabel::N4b;
    return CaseLabel::NNN4;
  }
  // rho_bar < rho_r <= rho_l
  if (fl > pm) return CaseLabel::N5b;
  if (fl < pp) return fr <= pm ? CaseLabel::C5 : CaseLabel::N5a;
  if (pm == pp) {
    // continuity point with fl == p: classical works iff the right flux fits
    return fr <= pm ? CaseLabel::C5 : CaseLabel::N5b;
  }
  return fr <= pm ? CaseLabel::CNN5 : CaseLabel::NNN5;
}

namespace {

WaveFan nonclassical_fan(const FanGrid& g, double rho_l, double rho_r, double p_bar) {
  const auto [rc, rh] = rho_check_hat(g.flux, p_bar);
  return assemble_constrained(rho_l, rho_r, rc, rh,
                              [&g](double a, double b) { return classical_riemann(g, a, b); });
}

double unique_pbar(CaseLabel c, const StepConstraint& p, double rho_l) {
  if (c == CaseLabel::N4a || c == CaseLabel::N5a) return p.left_at(rho_l);
  return p.right_at(rho_l);
}

}  // namespace

std::vector<LocalSolution> enumerate_local_solutions(const FanGrid& g, const StepConstraint& p,
                                                     double rho_l, double rho_r) {
  const CaseLabel c = classify(g.flux, p, rho_l, rho_r);
  std::vector<LocalSolution> out;
  if (is_classical_label(c)) {
    out.push_back({classical_riemann(g, rho_l, rho_r), true, 0.0});
    return out;
  }
  if (is_nonclassical_label(c)) {
    const double pb = unique_pbar(c, p, rho_l);
    out.push_back({nonclassical_fan(g, rho_l, rho_r, pb), false, pb});
    return out;
  }
  const double pm = p.left_at(rho_l);
  const double pp = p.right_at(rho_l);
  const double fl = g.flux.eval(rho_l);
  auto push_levels = [&](std::vector<double> levels) {
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double pb : levels) out.push_back({nonclassical_fan(g, rho_l, rho_r, pb), false, pb});
  };
  switch (c) {
    case CaseLabel::CN2:
    case CaseLabel::CN3:
      out.push_back({classical_riemann(g, rho_l, rho_r), true, 0.0});
      push_levels({pp});
      break;
    case CaseLabel::CNN5:
      out.push_back({classical_riemann(g, rho_l, rho_r), true, 0.0});
      push_levels({pp, fl});
      break;
    case CaseLabel::NNN4:
    case CaseLabel::NNN5:
      push_levels({pp, fl, pm});  // already sorted: pp <= fl <= pm
      break;
    default: break;  // unreachable
  }
  return out;
}

WaveFan solve_Rq(const FanGrid& g, const StepConstraint& p, double rho_l, double rho_r) {
  const CaseLabel c = classify(g.flux, p, rho_l, rho_r);
  if (is_classical_label(c)) return classical_riemann(g, rho_l, rho_r);
  if (is_nonclassical_label(c))
    return nonclassical_fan(g, rho_l, rho_r, unique_pbar(c, p, rho_l));
  switch (c) {
    case CaseLabel::CN2:
    case CaseLabel::CN3:
    case CaseLabel::CNN5: return classical_riemann(g, rho_l, rho_r);
    default: return nonclassical_fan(g, rho_l, rho_r, p.left_at(rho_l));  // NNN4, NNN5
  }
}

WaveFan solve_Rp(const FanGrid& g, const StepConstraint& p, double rho_l, double rho_r) {
  const CaseLabel c = classify(g.flux, p, rho_l, rho_r);
  if (is_classical_label(c)) return classical_riemann(g, rho_l, rho_r);
  if (is_nonclassical_label(c))
    return nonclassical_fan(g, rho_l, rho_r, unique_pbar(c, p, rho_l));
  return nonclassical_fan(g, rho_l, rho_r, p.right_at(rho_l));
}

}  // namespace nloc
