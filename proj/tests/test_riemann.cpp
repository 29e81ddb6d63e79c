#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "nloc/flux.hpp"
#include "nloc/riemann.hpp"

using namespace nloc;

namespace {

// Rankine-Hugoniot residual of one front under a flux evaluator
template <class F>
double rh_residual(const F& f, const Front& fr) {
  return std::abs(fr.speed * (fr.right - fr.left) - (f.eval(fr.right) - f.eval(fr.left)));
}

template <class F>
void check_fan_structure(const F& f, const WaveFan& fan, double rho_l, double rho_r) {
  double prev_state = rho_l;
  double prev_speed = -1e300;
  for (const Front& fr : fan.fronts) {
    CHECK(fr.left == prev_state);
    CHECK(fr.speed > prev_speed);
    CHECK(rh_residual(f, fr) <= 1e-12);
    if constexpr (std::is_same_v<F, FluxModel>) {
      // Lax away from x=0: shocks compress, fan fronts expand
      if (fr.kind == FrontKind::shock) {
        CHECK(f.char_speed(fr.left, +1) >= fr.speed - 1e-9);
        CHECK(f.char_speed(fr.right, -1) <= fr.speed + 1e-9);
      } else if (fr.kind == FrontKind::fan) {
        CHECK(f.char_speed(fr.left, -1) <= fr.speed + 1e-9);
        CHECK(f.char_speed(fr.right, +1) >= fr.speed - 1e-9);
      }
    }
    prev_state = fr.right;
    prev_speed = fr.speed;
  }
  CHECK(prev_state == rho_r);
  // flux is continuous across x = 0
  CHECK(std::abs(f.eval(fan.left_trace(rho_l)) - f.eval(fan.right_trace(rho_r))) <= 1e-12);
}

}  // namespace

TEST_CASE("classical solver on the mesh: full rarefaction and symmetric shock") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const PiecewiseLinearFlux fn = build_piecewise_linear(f, 2);
  const FluxMesh& m = fn.mesh;

  const WaveFan fan = classical_riemann(fn, 1.0, 0.0);
  CHECK(fan.fronts.size() == 8);  // one per mesh segment
  for (const Front& fr : fan.fronts) CHECK(fr.kind == FrontKind::fan);
  CHECK(fan.fronts.front().speed < 0);
  CHECK(fan.fronts.back().speed > 0);
  check_fan_structure(fn, fan, 1.0, 0.0);
  // each fan front drops the flux by exactly one lattice step
  for (const Front& fr : fan.fronts)
    CHECK(std::abs(fn.eval(fr.right) - fn.eval(fr.left)) == std::ldexp(0.25, -2));

  const WaveFan shock = classical_riemann(fn, m.node(1), m.node(7));
  CHECK(shock.fronts.size() == 1);
  CHECK(shock.fronts[0].speed == 0.0);  // symmetric states share a level
  CHECK(shock.fronts[0].kind == FrontKind::shock);

  CHECK(classical_riemann(fn, m.node(3), m.node(3)).empty());
  CHECK_THROWS_AS(classical_riemann(fn, 0.07, 0.0), std::invalid_argument);
}

TEST_CASE("classical solver on the mesh: collinear runs fold into single fronts") {
  // two straight flux pieces, so every mesh segment on one side of the crest
  // is collinear with its neighbors and the rarefaction must not stack
  // zero-gap fronts there
  const FluxModel f = build_table_flux({0.0, 0.8, 2.0}, {0.0, 0.4, 0.0});
  const PiecewiseLinearFlux fn = build_piecewise_linear(f, 4);

  const WaveFan fan = classical_riemann(fn, 2.0, 0.0);
  REQUIRE(fan.fronts.size() == 2);  // one folded front per side
  CHECK(fan.fronts[0].left == 2.0);
  CHECK(fan.fronts[0].right == f.rho_bar);
  CHECK(fan.fronts[1].left == f.rho_bar);
  CHECK(fan.fronts[1].right == 0.0);
  CHECK(fan.fronts[0].speed == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(fan.fronts[1].speed == doctest::Approx(0.5).epsilon(1e-12));
  for (const Front& fr : fan.fronts) {
    CHECK(fr.kind == FrontKind::fan);
    CHECK(std::abs(fr.speed * (fr.right - fr.left) - (fn.eval(fr.right) - fn.eval(fr.left))) <=
          1e-12);
  }

  // a partial jump inside one straight piece folds completely
  const FluxMesh& m = fn.mesh;
  const int crest = m.find_node(f.rho_bar, 1e-12);
  REQUIRE(crest > 4);
  const WaveFan part = classical_riemann(fn, m.node(crest - 1), m.node(crest - 4));
  REQUIRE(part.fronts.size() == 1);
  CHECK(part.fronts[0].speed == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("classical solver over the exact flux: chained fan through the grid") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const WaveFan fan = classical_riemann(g, 1.0, 0.0);
  CHECK(fan.fronts.size() == 16);  // endpoints are nodes, 15 interior nodes
  check_fan_structure(f, fan, 1.0, 0.0);

  // off-grid endpoints stay exact; interior states are grid nodes
  const WaveFan part = classical_riemann(g, 0.9, 0.1);
  check_fan_structure(f, part, 0.9, 0.1);
  CHECK(part.fronts.front().left == 0.9);
  CHECK(part.fronts.back().right == 0.1);
  CHECK(part.fronts.size() > 2);

  const WaveFan up = classical_riemann(g, 0.2, 0.9);
  CHECK(up.fronts.size() == 1);
  CHECK(up.fronts[0].kind == FrontKind::shock);
}

TEST_CASE("constrained solver, exact flux: active and inactive constraint") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);

  // both side waves are rarefactions here, resolved through the grid nodes
  const WaveFan fan = constrained_local_riemann(g, 1.0, 0.0, 0.1);
  REQUIRE(fan.fronts.size() == 9);
  size_t nc = 0, nc_at = 0;
  for (size_t i = 0; i < fan.fronts.size(); ++i)
    if (fan.fronts[i].kind == FrontKind::nonclassical) { ++nc; nc_at = i; }
  REQUIRE(nc == 1);
  const Front& mid = fan.fronts[nc_at];
  CHECK(mid.speed == 0.0);
  CHECK(mid.left == doctest::Approx(0.88730).epsilon(1e-4));
  CHECK(mid.right == doctest::Approx(0.11270).epsilon(1e-4));
  for (size_t i = 0; i < nc_at; ++i) CHECK(fan.fronts[i].speed < 0);
  for (size_t i = nc_at + 1; i < fan.fronts.size(); ++i) CHECK(fan.fronts[i].speed > 0);
  CHECK(f.eval(fan.left_trace(1.0)) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.eval(mid.left) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.eval(mid.right) == doctest::Approx(0.1).epsilon(1e-12));
  check_fan_structure(f, fan, 1.0, 0.0);

  // at q = f_max the classical trace saturates the constraint exactly
  const WaveFan free_fan = constrained_local_riemann(g, 1.0, 0.0, 0.25);
  for (const Front& fr : free_fan.fronts) CHECK(fr.kind != FrontKind::nonclassical);
  CHECK(free_fan.fronts.size() == 16);

  CHECK(constrained_local_riemann(g, 0.0, 0.0, 0.1).empty());
  CHECK_THROWS_AS(constrained_local_riemann(g, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(constrained_local_riemann(g, 1.0, 0.0, 0.3), std::invalid_argument);
}

TEST_CASE("constrained solver, mesh flux: emitted states are mesh nodes") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const PiecewiseLinearFlux fn = build_piecewise_linear(f, 2);
  const FluxMesh& m = fn.mesh;

  const double q = m.level_value(1);  // 0.0625
  const WaveFan fan = constrained_local_riemann(fn, 1.0, 0.0, q);
  REQUIRE(fan.fronts.size() == 3);
  CHECK(fan.fronts[1].kind == FrontKind::nonclassical);
  CHECK(fan.fronts[1].left == m.node(7));   // rho_hat(q), exact node
  CHECK(fan.fronts[1].right == m.node(1));  // rho_check(q), exact node
  CHECK(fn.eval(fan.left_trace(1.0)) == q);
  check_fan_structure(fn, fan, 1.0, 0.0);

  // inactive: classical trace 0.125 <= q = 0.1875
  const WaveFan quiet = constrained_local_riemann(fn, m.node(2), m.node(6), m.level_value(3));
  CHECK(quiet.fronts.size() == 1);
  CHECK(quiet.fronts[0].kind == FrontKind::shock);

  CHECK_THROWS_AS(constrained_local_riemann(fn, 1.0, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(constrained_local_riemann(fn, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("step constraint: one-sided values and validation") {
  const StepConstraint p = build_step_constraint({0.4, 0.7}, {0.24, 0.15, 0.1});
  CHECK(p.left_at(0.2) == 0.24);
  CHECK(p.right_at(0.2) == 0.24);
  CHECK(p.left_at(0.4) == 0.24);
  CHECK(p.right_at(0.4) == 0.15);
  CHECK(p.left_at(0.5) == 0.15);
  CHECK(p.right_at(0.7) == 0.1);
  CHECK(p.left_at(0.7) == 0.15);
  CHECK(p.left_at(0.9) == 0.1);

  CHECK_THROWS_AS(build_step_constraint({0.4}, {0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(build_step_constraint({0.7, 0.4}, {0.3, 0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(build_step_constraint({}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_step_constraint({0.4}, {0.2}), std::invalid_argument);
}

TEST_CASE("classification: pinned cases from the condition table") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const StepConstraint p_top = build_step_constraint({}, {0.25});
  CHECK(classify(f, p_top, 0.2, 0.3) == CaseLabel::C2);

  const StepConstraint p_low = build_step_constraint({}, {0.1});
  CHECK(classify(f, p_low, 0.9, 0.1) == CaseLabel::N4a);

  const StepConstraint p_jump = build_step_constraint({0.7}, {0.24, 0.16});
  CHECK(classify(f, p_jump, 0.7, 0.5) == CaseLabel::NNN4);

  // straight reads of the remaining conditions
  CHECK(classify(f, p_low, 0.3, 0.8) == CaseLabel::N1);       // f_R = 0.16 > 0.1
  CHECK(classify(f, p_top, 0.3, 0.8) == CaseLabel::C1);       // f_R <= 0.25
  CHECK(classify(f, p_low, 0.2, 0.25) == CaseLabel::N2);      // f_L = 0.16 > 0.1
  CHECK(classify(f, p_top, 0.3, 0.1) == CaseLabel::C3);
  CHECK(classify(f, p_low, 0.3, 0.1) == CaseLabel::N3);
  CHECK(classify(f, p_low, 0.9, 0.8) == CaseLabel::N5a);      // f_L = 0.09 < p < f_R = 0.16
  CHECK(classify(f, p_low, 0.95, 0.9) == CaseLabel::C5);      // f_R = 0.09 <= 0.1, f_L < 0.1
  const StepConstraint p_tiny = build_step_constraint({}, {0.05});
  CHECK(classify(f, p_tiny, 0.9, 0.8) == CaseLabel::N5b);     // f_L = 0.09 > 0.05
  const StepConstraint p_jump2 = build_step_constraint({0.95}, {0.06, 0.05});
  CHECK(classify(f, p_jump2, 0.95, 0.9) == CaseLabel::N5a);   // f_L = 0.0475 < pp, f_R > pm
  const StepConstraint p_cn = build_step_constraint({0.25}, {0.2, 0.1});
  CHECK(classify(f, p_cn, 0.25, 0.6) == CaseLabel::CN2);      // pp=0.1 < f_L=0.1875 <= pm=0.2
  CHECK(classify(f, p_cn, 0.25, 0.1) == CaseLabel::CN3);
  const StepConstraint p_cnn = build_step_constraint({0.95}, {0.12, 0.02});
  CHECK(classify(f, p_cnn, 0.95, 0.9) == CaseLabel::CNN5);    // pp <= f_L <= pm, f_R <= pm
  const StepConstraint p_nnn = build_step_constraint({0.95}, {0.06, 0.04});
  CHECK(classify(f, p_nnn, 0.95, 0.8) == CaseLabel::NNN5);    // f_R = 0.16 > pm >= f_L >= pp
}

TEST_CASE("classification: boundary data that the printed conditions skip") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);

  // p drops from the peak value at rho_l, flux below the lower branch:
  // the only nonclassical level is the peak, i.e. the classical rarefaction
  const StepConstraint pa = build_step_constraint({0.9}, {0.25, 0.1});
  CHECK(classify(f, pa, 0.9, 0.2) == CaseLabel::C4);
  CHECK(classify(f, pa, 0.9, 0.1) == CaseLabel::C4);  // f_L = 0.09 < 0.1

  // peak-valued constant constraint
  const StepConstraint p_top = build_step_constraint({}, {0.25});
  CHECK(classify(f, p_top, 0.9, 0.2) == CaseLabel::C4);

  // continuity point with p == f(rho_l) exactly: 0.75 * 0.25 is representable
  const StepConstraint pd = build_step_constraint({}, {0.1875});
  CHECK(classify(f, pd, 0.75, 0.3) == CaseLabel::N4b);

  // same on the right branch: classical if f_R fits under p, else nonclassical
  CHECK(classify(f, pd, 0.75, 0.75) == CaseLabel::C5);  // f_R = p exactly
  CHECK(classify(f, pd, 0.75, 0.6) == CaseLabel::N5b);  // f_R = 0.24 > p
}

TEST_CASE("classification partitions a dense grid; pathological needs a p-jump") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const StepConstraint p = build_step_constraint({0.4, 0.7}, {0.24, 0.15, 0.1});
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double rl = i / 100.0, rr = j / 100.0;
      const CaseLabel c = classify(f, p, rl, rr);
      if (is_pathological_label(c)) {
        const double pm = p.left_at(rl), pp = p.right_at(rl);
        CHECK(pm != pp);
        CHECK(pm >= f.eval(rl));
        CHECK(f.eval(rl) >= pp);
      }
    }
  }
}

TEST_CASE("extremal solvers agree with the classical fan on classical data") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const StepConstraint p = build_step_constraint({}, {0.25});
  const WaveFan rq = solve_Rq(g, p, 0.2, 0.3);
  const WaveFan rp = solve_Rp(g, p, 0.2, 0.3);
  const WaveFan cl = classical_riemann(g, 0.2, 0.3);
  REQUIRE(rq.fronts.size() == cl.fronts.size());
  REQUIRE(rp.fronts.size() == cl.fronts.size());
  for (size_t i = 0; i < cl.fronts.size(); ++i) {
    CHECK(rq.fronts[i].speed == cl.fronts[i].speed);
    CHECK(rp.fronts[i].left == cl.fronts[i].left);
  }
}

TEST_CASE("nonclassical data pick the one-sided constraint value from the jump") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);

  // N1: unique level is p(rho_l+)
  const StepConstraint p_low = build_step_constraint({}, {0.1});
  const WaveFan n1 = solve_Rq(g, p_low, 0.3, 0.8);
  CHECK(f.eval(n1.left_trace(0.3)) == doctest::Approx(0.1).epsilon(1e-12));
  check_fan_structure(f, n1, 0.3, 0.8);

  // N4a with a genuine jump at rho_l: both solvers must use p(rho_l-)
  const StepConstraint p4 = build_step_constraint({0.9}, {0.12, 0.1});
  CHECK(classify(f, p4, 0.9, 0.1) == CaseLabel::N4a);
  const WaveFan rq = solve_Rq(g, p4, 0.9, 0.1);
  const WaveFan rp = solve_Rp(g, p4, 0.9, 0.1);
  CHECK(f.eval(rq.left_trace(0.9)) == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(f.eval(rp.left_trace(0.9)) == doctest::Approx(0.12).epsilon(1e-12));
  check_fan_structure(f, rq, 0.9, 0.1);
}

TEST_CASE("three distinct solutions at a threshold datum, extremal fluxes") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const StepConstraint p = build_step_constraint({0.7}, {0.24, 0.16});

  const auto sols = enumerate_local_solutions(g, p, 0.7, 0.5);
  REQUIRE(sols.size() == 3);
  CHECK(sols[0].p_bar == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(sols[1].p_bar == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(sols[2].p_bar == doctest::Approx(0.24).epsilon(1e-14));
  for (const auto& s : sols) {
    CHECK(!s.classical);
    CHECK(f.eval(s.fan.left_trace(0.7)) == doctest::Approx(s.p_bar).epsilon(1e-12));
    check_fan_structure(f, s.fan, 0.7, 0.5);
  }

  const WaveFan rq = solve_Rq(g, p, 0.7, 0.5);
  const WaveFan rp = solve_Rp(g, p, 0.7, 0.5);
  CHECK(f.eval(rq.left_trace(0.7)) == doctest::Approx(0.24).epsilon(1e-12));
  CHECK(f.eval(rp.left_trace(0.7)) == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("singleton solution sets exactly on classical and nonclassical data") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const StepConstraint p = build_step_constraint({}, {0.25});
  CHECK(enumerate_local_solutions(g, p, 0.3, 0.8).size() == 1);
  CHECK(enumerate_local_solutions(g, p, 0.3, 0.8)[0].classical);

  const StepConstraint p_low = build_step_constraint({}, {0.1});
  const auto n = enumerate_local_solutions(g, p_low, 0.9, 0.1);
  REQUIRE(n.size() == 1);
  CHECK(!n[0].classical);
  CHECK(n[0].p_bar == doctest::Approx(0.1).epsilon(1e-14));

  // CN2: classical shock and one nonclassical companion
  const StepConstraint p_cn = build_step_constraint({0.25}, {0.2, 0.1});
  const auto cn = enumerate_local_solutions(g, p_cn, 0.25, 0.6);
  REQUIRE(cn.size() == 2);
  CHECK(cn[0].classical);
  CHECK(!cn[1].classical);
  CHECK(cn[1].p_bar == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("re-solving from intermediate traces reproduces the fan tail") {
  // constant constraint, so the active level does not depend on rho_l
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const StepConstraint p = build_step_constraint({}, {0.1});

  const WaveFan full = solve_Rq(g, p, 0.3, 0.8);  // N1 datum
  REQUIRE(full.fronts.size() >= 2);
  for (size_t cut = 0; cut + 1 < full.fronts.size(); ++cut) {
    const double mid = full.fronts[cut].right;
    const WaveFan tail = solve_Rq(g, p, mid, 0.8);
    REQUIRE(tail.fronts.size() == full.fronts.size() - cut - 1);
    for (size_t i = 0; i < tail.fronts.size(); ++i) {
      const Front& a = tail.fronts[i];
      const Front& b = full.fronts[cut + 1 + i];
      CHECK(a.left == doctest::Approx(b.left).epsilon(1e-12));
      CHECK(a.right == doctest::Approx(b.right).epsilon(1e-12));
      CHECK(a.speed == doctest::Approx(b.speed).epsilon(1e-9));
      CHECK(a.kind == b.kind);
    }
  }
}

TEST_CASE("flux extremality across a coarse data grid") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FanGrid g = build_fan_grid(f, 3);
  const StepConstraint p = build_step_constraint({0.4, 0.7}, {0.24, 0.15, 0.1});
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double rl = i / 40.0, rr = j / 40.0;
      const auto sols = enumerate_local_solutions(g, p, rl, rr);
      REQUIRE(!sols.empty());
      double lo = 1e300, hi = -1e300;
      for (const auto& s : sols) {
        const double q0 = f.eval(s.fan.left_trace(rl));
        lo = std::min(lo, q0);
        hi = std::max(hi, q0);
        check_fan_structure(f, s.fan, rl, rr);
      }
      const double fq = f.eval(solve_Rq(g, p, rl, rr).left_trace(rl));
      const double fp = f.eval(solve_Rp(g, p, rl, rr).left_trace(rl));
      CHECK(fq == doctest::Approx(hi).epsilon(1e-12));
      CHECK(fp == doctest::Approx(lo).epsilon(1e-12));
      CHECK(fq >= fp - 1e-12);
    }
  }
}
