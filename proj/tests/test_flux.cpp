#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nloc/flux.hpp"

using namespace nloc;

namespace {
// closed-form quadratic inverse of f(r) = r(1-r), used as the independent
// oracle for mesh nodes and rho_check/rho_hat of the normalized model
double lwr11_left_inverse(double p) { return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * p)); }
double lwr11_right_inverse(double p) { return 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * p)); }
}  // namespace

TEST_CASE("lwr flux: peak, endpoints, scaling") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  CHECK(f.eval(0.5) == 0.25);
  CHECK(f.rho_bar == 0.5);
  CHECK(f.eval(0.0) == 0.0);
  CHECK(f.eval(1.0) == 0.0);
  CHECK(f.f_max == 0.25);
  CHECK(f.lip_f == 1.0);

  const FluxModel g = build_lwr_flux(2.0, 1.0);
  CHECK(g.f_max == 0.5);

  CHECK_THROWS_AS(build_lwr_flux(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_lwr_flux(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("lwr flux: bell shape on a sample grid") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  double prev = f.eval(0.0);
  for (int i = 1; i <= 500; ++i) {
    const double r = 0.5 * i / 500.0;
    const double v = f.eval(r);
    CHECK(v > prev);
    CHECK(v >= 0.0);
    CHECK(v <= f.f_max);
    prev = v;
  }
  prev = f.eval(0.5);
  for (int i = 1; i <= 500; ++i) {
    const double r = 0.5 + 0.5 * i / 500.0;
    const double v = f.eval(r);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("table flux: accepts concave samples, rejects the rest") {
  // samples of r(1-r) are strictly concave, so they pass validation
  std::vector<double> xs, ys;
  for (int i = 0; i <= 8; ++i) {
    xs.push_back(i / 8.0);
    ys.push_back(xs.back() * (1.0 - xs.back()));
  }
  const FluxModel f = build_table_flux(xs, ys);
  CHECK(f.rho_bar == 0.5);
  CHECK(f.f_max == 0.25);
  CHECK(f.eval(0.5) == 0.25);
  CHECK(f.eval(1.0 / 16.0) == doctest::Approx(0.5 * (0.0 + 0.125 * 0.875)).epsilon(1e-14));

  CHECK_THROWS_AS(build_table_flux({0.0, 0.5, 1.0}, {0.0, 0.25, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(build_table_flux({0.0, 0.25, 0.5, 1.0}, {0.0, 0.1, 0.2, 0.0}),
                  std::invalid_argument);  // convex kink at 0.25
  CHECK_THROWS_AS(build_table_flux({0.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("shock speed: formula, symmetry, rejected equal states") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  CHECK(shock_speed(f, 0.0, 1.0) == 0.0);
  CHECK(shock_speed(f, 0.2, 0.3) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(shock_speed(f, 1.0, 0.5) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(shock_speed(f, 0.2, 0.3) == shock_speed(f, 0.3, 0.2));
  CHECK_THROWS_AS(shock_speed(f, 0.4, 0.4), std::invalid_argument);
}

TEST_CASE("rho_check_hat: pinned values and grid round trip") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  {
    const auto [lo, hi] = rho_check_hat(f, 0.21);
    CHECK(lo == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(hi == doctest::Approx(0.7).epsilon(1e-13));
  }
  {
    const auto [lo, hi] = rho_check_hat(f, 0.25);
    CHECK(lo == 0.5);
    CHECK(hi == 0.5);
  }
  {
    const auto [lo, hi] = rho_check_hat(f, 0.1);
    CHECK(lo == doctest::Approx(lwr11_left_inverse(0.1)).epsilon(1e-14));
    CHECK(hi == doctest::Approx(lwr11_right_inverse(0.1)).epsilon(1e-14));
    CHECK(lo == doctest::Approx(0.11270).epsilon(1e-4));
    CHECK(hi == doctest::Approx(0.88730).epsilon(1e-4));
  }
  CHECK_THROWS_AS(rho_check_hat(f, 0.26), std::invalid_argument);
  CHECK_THROWS_AS(rho_check_hat(f, -0.01), std::invalid_argument);

  for (int i = 0; i <= 1000; ++i) {
    const double p = f.f_max * i / 1000.0;
    const auto [lo, hi] = rho_check_hat(f, p);
    CHECK(lo <= f.rho_bar);
    CHECK(hi >= f.rho_bar);
    CHECK(std::abs(f.eval(lo) - p) <= 1e-10 * f.f_max);
    CHECK(std::abs(f.eval(hi) - p) <= 1e-10 * f.f_max);
  }
}

TEST_CASE("rho_check_hat: bisection branch for tabulated flux") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 64; ++i) {
    xs.push_back(i / 64.0);
    ys.push_back(xs.back() * (1.0 - xs.back()));
  }
  const FluxModel f = build_table_flux(xs, ys);
  for (int i = 0; i <= 200; ++i) {
    const double p = f.f_max * i / 200.0;
    const auto [lo, hi] = rho_check_hat(f, p);
    CHECK(std::abs(f.eval(lo) - p) <= 1e-10 * f.f_max);
    CHECK(std::abs(f.eval(hi) - p) <= 1e-10 * f.f_max);
    CHECK(lo <= f.rho_bar + 1e-12);
    CHECK(hi >= f.rho_bar - 1e-12);
  }
}

TEST_CASE("mesh: lattice levels and node set for n = 2") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FluxMesh m = build_mesh(f, 2);

  REQUIRE(m.levels.size() == 5);
  CHECK(m.levels[0] == 0.0);
  CHECK(m.levels[1] == 0.0625);
  CHECK(m.levels[2] == 0.125);
  CHECK(m.levels[3] == 0.1875);
  CHECK(m.levels[4] == 0.25);

  REQUIRE(m.node_count() == 9);  // 2^(n+1) + 1
  CHECK(m.node(0) == 0.0);
  CHECK(m.node(4) == 0.5);
  CHECK(m.node(8) == 1.0);
  CHECK(m.node(1) == doctest::Approx(lwr11_left_inverse(0.0625)).epsilon(1e-14));
  CHECK(m.node(1) == doctest::Approx(0.066987).epsilon(1e-5));
  CHECK(m.node(7) == doctest::Approx(lwr11_right_inverse(0.0625)).epsilon(1e-14));

  for (int i = 0; i < m.node_count(); ++i) {
    CHECK(std::abs(f.eval(m.node(i)) - m.level_value(m.level_of_node(i))) <= 1e-12 * f.f_max);
    if (i > 0) CHECK(m.node(i) > m.node(i - 1));
  }
}

TEST_CASE("mesh: size formula and branch indices across n") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  for (int n = 1; n <= 6; ++n) {
    const FluxMesh m = build_mesh(f, n);
    CHECK(m.node_count() == (1 << (n + 1)) + 1);
    CHECK(m.node(m.top_index() / 2) == 0.5);
    for (int k = 0; k <= (1 << n); ++k) {
      const auto [a, b] = m.nodes_for_level(k);
      CHECK(m.level_of_node(a) == k);
      CHECK(m.level_of_node(b) == k);
      if (k < (1 << n)) CHECK(a < b);
    }
  }
  CHECK_THROWS_AS(build_mesh(f, 0), std::invalid_argument);
}

TEST_CASE("mesh: nearest node on the same side, ties toward the peak") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const FluxMesh m = build_mesh(f, 2);

  CHECK(m.nearest_node_same_side(0.07) == 1);  // 0.066987 beats 0
  CHECK(m.node(m.nearest_node_same_side(0.07)) == doctest::Approx(0.066987).epsilon(1e-5));
  CHECK(m.nearest_node_same_side(0.0) == 0);
  CHECK(m.nearest_node_same_side(1.0) == 8);
  CHECK(m.nearest_node_same_side(0.5) == 4);

  // a value just below the peak stays on the left branch
  CHECK(m.nearest_node_same_side(0.499) <= 4);
  CHECK(m.nearest_node_same_side(0.501) >= 4);

  // exact midpoint between nodes 0 and 1 resolves toward rho_bar (node 1)
  const double mid_left = 0.5 * (m.node(0) + m.node(1));
  CHECK(m.nearest_node_same_side(mid_left) == 1);
  // mirrored midpoint on the right branch resolves toward rho_bar (node 7)
  const double mid_right = 0.5 * (m.node(7) + m.node(8));
  CHECK(m.nearest_node_same_side(mid_right) == 7);

  CHECK(m.find_node(m.node(3), 1e-12) == 3);
  CHECK(m.find_node(0.07, 1e-12) == -1);
}

TEST_CASE("piecewise linear flux: interpolates nodes, exact lattice steps") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  for (int n = 1; n <= 5; ++n) {
    const PiecewiseLinearFlux fn = build_piecewise_linear(f, n);
    const FluxMesh& m = fn.mesh;
    const double step = std::ldexp(f.f_max, -n);
    for (int i = 0; i < m.node_count(); ++i) {
      CHECK(fn.eval(m.node(i)) == m.level_value(m.level_of_node(i)));
      if (i > 0) {
        const double a = fn.eval(m.node(i - 1));
        const double b = fn.eval(m.node(i));
        CHECK(std::abs(b - a) == step);  // lattice arithmetic is exact
      }
    }
    CHECK(fn.eval(m.rho_bar) == f.f_max);
    CHECK(fn.lip <= f.lip_f * (1.0 + 1e-12));
    // monotone between adjacent nodes, below the true flux in between
    for (int i = 0; i + 1 < m.node_count(); ++i) {
      const double mid = 0.5 * (m.node(i) + m.node(i + 1));
      const double v = fn.eval(mid);
      const double lo = std::min(fn.eval(m.node(i)), fn.eval(m.node(i + 1)));
      const double hi = std::max(fn.eval(m.node(i)), fn.eval(m.node(i + 1)));
      CHECK(v >= lo);
      CHECK(v <= hi);
      CHECK(v <= f.eval(mid) + 1e-14);
    }
  }
}

TEST_CASE("piecewise linear flux: inverse branches land on lattice nodes") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const PiecewiseLinearFlux fn = build_piecewise_linear(f, 3);
  const FluxMesh& m = fn.mesh;
  for (int k = 0; k <= (1 << 3); ++k) {
    const auto [lo, hi] = fn.rho_check_hat(m.level_value(k));
    const auto [a, b] = m.nodes_for_level(k);
    CHECK(lo == m.node(a));
    CHECK(hi == m.node(b));
  }
  // off-lattice values round-trip through the interpolant
  for (int i = 0; i <= 100; ++i) {
    const double p = f.f_max * i / 100.0;
    const auto [lo, hi] = fn.rho_check_hat(p);
    CHECK(std::abs(fn.eval(lo) - p) <= 1e-12 * f.f_max);
    CHECK(std::abs(fn.eval(hi) - p) <= 1e-12 * f.f_max);
  }
  CHECK_THROWS_AS(fn.rho_check_hat(0.26), std::invalid_argument);
}

TEST_CASE("psi: pinned values, monotonicity, inverse round trip") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const PsiMap psi(f);
  CHECK(psi.eval(0.5) == 0.0);
  CHECK(psi.eval(1.0) == 0.25);
  CHECK(psi.eval(0.0) == -0.25);
  CHECK(psi.eval(0.3) == doctest::Approx(-0.04).epsilon(1e-14));

  double prev = psi.eval(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double r = i / 1000.0;
    const double v = psi.eval(r);
    CHECK(v > prev);
    prev = v;
  }
  for (int i = 0; i <= 1000; ++i) {
    const double v = -0.25 + 0.5 * i / 1000.0;
    CHECK(std::abs(psi.eval(psi.inverse(v)) - v) <= 1e-10);
  }
  const FluxMesh m = build_mesh(f, 3);
  for (int i = 0; i < m.node_count(); ++i)
    CHECK(std::abs(psi.inverse(psi.eval(m.node(i))) - m.node(i)) <= 1e-10);
  CHECK_THROWS_AS(psi.inverse(0.3), std::invalid_argument);
}

TEST_CASE("psi over the interpolated flux agrees with lattice bookkeeping") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  const PiecewiseLinearFlux fn = build_piecewise_linear(f, 2);
  const PsiMap psi(fn);
  const FluxMesh& m = fn.mesh;
  // jumps between adjacent nodes have |delta Psi| = one lattice step exactly
  const double step = std::ldexp(f.f_max, -2);
  for (int i = 0; i + 1 < m.node_count(); ++i)
    CHECK(std::abs(psi.eval(m.node(i + 1)) - psi.eval(m.node(i))) == step);
  CHECK(psi.eval(m.rho_bar) == 0.0);
  for (int i = 0; i < m.node_count(); ++i)
    CHECK(std::abs(psi.inverse(psi.eval(m.node(i))) - m.node(i)) <= 1e-10);
}

TEST_CASE("characteristic speeds: lwr derivative and table segment slopes") {
  const FluxModel f = build_lwr_flux(1.0, 1.0);
  CHECK(f.char_speed(0.0, +1) == 1.0);
  CHECK(f.char_speed(0.5, +1) == 0.0);
  CHECK(f.char_speed(1.0, -1) == -1.0);
  CHECK(f.char_speed(0.25, +1) == 0.5);

  std::vector<double> xs = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> ys = {0.0, 0.1875, 0.25, 0.1875, 0.0};
  const FluxModel g = build_table_flux(xs, ys);
  CHECK(g.char_speed(0.1, +1) == 0.75);   // slope of [0, 0.25]
  CHECK(g.char_speed(0.25, +1) == 0.25);  // slope right of the kink
  CHECK(g.char_speed(0.25, -1) == 0.75);  // slope left of the kink
  CHECK(g.char_speed(0.9, -1) == -0.75);
}
