#include "nloc/flux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nloc {

namespace {

// bisection for g(rho) = target on a monotone branch [lo, hi]; absolute
// tolerance in rho keeps downstream lattice checks exact enough (1e-13).
template <class G>
double bisect_monotone(G&& g, double lo, double hi, double target, bool increasing) {
  const double s = increasing ? 1.0 : -1.0;
  const double hlo = s * (g(lo) - target);
  const double hhi = s * (g(hi) - target);
  // tiny slack at the ends: target may equal an endpoint value up to roundoff
  if (hlo > 0) {
    if (hlo < 1e-12) return lo;
    throw std::runtime_error("flux inverse: target not bracketed");
  }
  if (hhi < 0) {
    if (hhi > -1e-12) return hi;
    throw std::runtime_error("flux inverse: target not bracketed");
  }
  double a = lo, b = hi;
  while (b - a > 1e-13) {
    const double m = 0.5 * (a + b);
    if (s * (g(m) - target) < 0)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

double FluxModel::eval(double rho) const {
  if (kind == Kind::lwr) return v_max * rho * (1.0 - rho / R);
  // table: linear interpolation between samples
  if (rho <= tab_rho.front()) return tab_f.front();
  if (rho >= tab_rho.back()) return tab_f.back();
  const auto it = std::upper_bound(tab_rho.begin(), tab_rho.end(), rho);
  const size_t j = static_cast<size_t>(it - tab_rho.begin());
  const double x0 = tab_rho[j - 1], x1 = tab_rho[j];
  const double f0 = tab_f[j - 1], f1 = tab_f[j];
  return f0 + (f1 - f0) * (rho - x0) / (x1 - x0);
}

double FluxModel::char_speed(double rho, int side) const {
  if (kind == Kind::lwr) return v_max * (1.0 - 2.0 * rho / R);
  size_t j;
  if (side >= 0) {
    j = static_cast<size_t>(std::upper_bound(tab_rho.begin(), tab_rho.end(), rho) - tab_rho.begin());
    if (j >= tab_rho.size()) j = tab_rho.size() - 1;
    if (j == 0) j = 1;
  } else {
    j = static_cast<size_t>(std::lower_bound(tab_rho.begin(), tab_rho.end(), rho) - tab_rho.begin());
    if (j == 0) j = 1;
    if (j >= tab_rho.size()) j = tab_rho.size() - 1;
  }
  return (tab_f[j] - tab_f[j - 1]) / (tab_rho[j] - tab_rho[j - 1]);
}

FluxModel build_lwr_flux(double v_max, double R) {
  if (!(v_max > 0) || !(R > 0)) throw std::invalid_argument("build_lwr_flux: parameters must be positive");
  FluxModel f;
  f.kind = FluxModel::Kind::lwr;
  f.v_max = v_max;
  f.R = R;
  f.rho_bar = 0.5 * R;
  f.f_max = v_max * R / 4.0;
  f.lip_f = v_max;  // |f'| = v_max (1 - 2 rho/R), maximal at the endpoints
  return f;
}

FluxModel build_table_flux(const std::vector<double>& rho, const std::vector<double>& f) {
  if (rho.size() != f.size() || rho.size() < 3)
    throw std::invalid_argument("build_table_flux: need >= 3 matched samples");
  if (rho.front() != 0.0) throw std::invalid_argument("build_table_flux: first sample must sit at rho = 0");
  if (f.front() != 0.0 || f.back() != 0.0)
    throw std::invalid_argument("build_table_flux: flux must vanish at both endpoints");
  FluxModel m;
  m.kind = FluxModel::Kind::table;
  m.tab_rho = rho;
  m.tab_f = f;
  m.R = rho.back();
  double prev_slope = 0.0;
  double lip = 0.0;
  size_t argmax = 0;
  for (size_t i = 1; i < rho.size(); ++i) {
    const double dx = rho[i] - rho[i - 1];
    if (!(dx > 0)) throw std::invalid_argument("build_table_flux: abscissae must be strictly increasing");
    const double s = (f[i] - f[i - 1]) / dx;
    if (i > 1 && !(s < prev_slope))
      throw std::invalid_argument("build_table_flux: samples are not strictly concave");
    if (s == 0.0) throw std::invalid_argument("build_table_flux: flat segment breaks the bell shape");
    prev_slope = s;
    lip = std::max(lip, std::abs(s));
    if (f[i] > f[argmax]) argmax = i;
  }
  if (argmax == 0 || argmax + 1 == rho.size())
    throw std::invalid_argument("build_table_flux: interior maximum required");
  m.rho_bar = rho[argmax];
  m.f_max = f[argmax];
  m.lip_f = lip;
  if (!(m.f_max > 0)) throw std::invalid_argument("build_table_flux: flux must be positive somewhere");
  return m;
}

std::pair<double, double> rho_check_hat(const FluxModel& f, double p) {
  if (p < 0 || p > f.f_max * (1.0 + 1e-12))
    throw std::invalid_argument("rho_check_hat: p outside [0, f_max]");
  p = std::min(p, f.f_max);
  if (f.kind == FluxModel::Kind::lwr) {
    // v rho (1 - rho/R) = p  <=>  rho^2 - R rho + p R / v = 0
    double disc = f.R * f.R - 4.0 * p * f.R / f.v_max;
    if (disc < 0) disc = 0;  // p == f_max up to roundoff
    const double s = std::sqrt(disc);
    return {0.5 * (f.R - s), 0.5 * (f.R + s)};
  }
  const auto g = [&f](double r) { return f.eval(r); };
  const double lo = bisect_monotone(g, 0.0, f.rho_bar, p, /*increasing=*/true);
  const double hi = bisect_monotone(g, f.rho_bar, f.R, p, /*increasing=*/false);
  return {lo, hi};
}

double shock_speed(const FluxModel& f, double rho_l, double rho_r) {
  return shock_speed_from_values(f.eval(rho_l), f.eval(rho_r), rho_l, rho_r);
}

double shock_speed_from_values(double f_l, double f_r, double rho_l, double rho_r) {
  if (rho_l == rho_r) throw std::invalid_argument("shock_speed: equal states have no jump speed");
  return (f_l - f_r) / (rho_l - rho_r);
}

int FluxMesh::level_of_node(int i) const {
  const int top = top_index();
  const int half = top / 2;
  return i <= half ? i : top - i;
}

std::pair<int, int> FluxMesh::nodes_for_level(int k) const {
  const int top = top_index();
  return {k, top - k};
}

int FluxMesh::nearest_node_same_side(double rho) const {
  const int half = top_index() / 2;
  int lo, hi;
  if (rho >= rho_bar) {
    lo = half;
    hi = top_index();
  } else {
    lo = 0;
    hi = half;
  }
  // binary search inside the branch, then pick the closer neighbor
  int a = lo, b = hi;
  while (b - a > 1) {
    const int m = (a + b) / 2;
    if (nodes[static_cast<size_t>(m)] <= rho)
      a = m;
    else
      b = m;
  }
  const double da = std::abs(rho - nodes[static_cast<size_t>(a)]);
  const double db = std::abs(nodes[static_cast<size_t>(b)] - rho);
  if (da == db) return rho >= rho_bar ? a : b;  // tie goes toward rho_bar
  return da < db ? a : b;
}

int FluxMesh::find_node(double rho, double tol) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), rho - tol);
  if (it == nodes.end()) return -1;
  const int i = static_cast<int>(it - nodes.begin());
  if (std::abs(nodes[static_cast<size_t>(i)] - rho) <= tol) return i;
  return -1;
}

FluxMesh build_mesh(const FluxModel& f, int n) {
  if (n < 1) throw std::invalid_argument("build_mesh: n >= 1 required");
  if (n > 24) throw std::invalid_argument("build_mesh: n > 24 is not a desk-scale mesh");
  FluxMesh mesh;
  mesh.n = n;
  mesh.f_max = f.f_max;
  mesh.rho_bar = f.rho_bar;
  mesh.R = f.R;
  const int half = 1 << n;
  mesh.levels.resize(static_cast<size_t>(half) + 1);
  for (int k = 0; k <= half; ++k)
    mesh.levels[static_cast<size_t>(k)] = f.f_max * std::ldexp(static_cast<double>(k), -n);
  mesh.nodes.resize(2 * static_cast<size_t>(half) + 1);
  mesh.nodes[0] = 0.0;
  mesh.nodes[static_cast<size_t>(half)] = f.rho_bar;
  mesh.nodes[2 * static_cast<size_t>(half)] = f.R;
  for (int k = 1; k < half; ++k) {
    const auto [lo, hi] = rho_check_hat(f, mesh.levels[static_cast<size_t>(k)]);
    mesh.nodes[static_cast<size_t>(k)] = lo;
    mesh.nodes[2 * static_cast<size_t>(half) - static_cast<size_t>(k)] = hi;
  }
  for (size_t i = 1; i < mesh.nodes.size(); ++i)
    if (!(mesh.nodes[i] > mesh.nodes[i - 1]))
      throw std::runtime_error("build_mesh: nodes not strictly sorted (degenerate flux?)");
  return mesh;
}

double PiecewiseLinearFlux::eval(double rho) const {
  const auto& xs = mesh.nodes;
  if (rho <= xs.front()) return mesh.levels[0];
  if (rho >= xs.back()) return mesh.levels[0];
  const auto it = std::upper_bound(xs.begin(), xs.end(), rho);
  const size_t j = static_cast<size_t>(it - xs.begin());
  const double x0 = xs[j - 1];
  if (rho == x0) return mesh.level_value(mesh.level_of_node(static_cast<int>(j) - 1));
  const double y0 = mesh.level_value(mesh.level_of_node(static_cast<int>(j) - 1));
  return y0 + slopes[j - 1] * (rho - x0);
}

std::pair<double, double> PiecewiseLinearFlux::rho_check_hat(double p) const {
  if (p < 0 || p > mesh.f_max * (1.0 + 1e-12))
    throw std::invalid_argument("rho_check_hat: p outside [0, f_max]");
  p = std::min(p, mesh.f_max);
  const int half = mesh.top_index() / 2;
  const double step = mesh.level_value(1);
  // locate the lattice cell containing p on each branch and invert linearly
  int k = std::min(half - 1, static_cast<int>(std::floor(p / step)));
  if (k < 0) k = 0;
  while (k + 1 <= half && mesh.level_value(k + 1) < p) ++k;
  while (k > 0 && mesh.level_value(k) > p) --k;
  const auto invert = [&](int i0, int i1, int k0, int k1) {
    const double y0 = mesh.level_value(k0), y1 = mesh.level_value(k1);
    if (p == y0) return mesh.node(i0);
    if (p == y1) return mesh.node(i1);
    const double t = (p - y0) / (y1 - y0);
    return mesh.node(i0) + t * (mesh.node(i1) - mesh.node(i0));
  };
  const double lo = invert(k, k + 1, k, k + 1);
  const int top = mesh.top_index();
  const double hi = invert(top - k - 1, top - k, k + 1, k);
  return {lo, hi};
}

PiecewiseLinearFlux build_piecewise_linear(const FluxModel& f, int n) {
  PiecewiseLinearFlux pl;
  pl.mesh = build_mesh(f, n);
  const int top = pl.mesh.top_index();
  pl.slopes.resize(static_cast<size_t>(top));
  for (int i = 0; i < top; ++i) {
    const double df = pl.mesh.level_value(pl.mesh.level_of_node(i + 1)) -
                      pl.mesh.level_value(pl.mesh.level_of_node(i));
    pl.slopes[static_cast<size_t>(i)] = df / (pl.mesh.node(i + 1) - pl.mesh.node(i));
    pl.lip = std::max(pl.lip, std::abs(pl.slopes[static_cast<size_t>(i)]));
  }
  if (pl.lip > f.lip_f * (1.0 + 1e-10))
    throw std::runtime_error("build_piecewise_linear: interpolant steeper than the flux");
  return pl;
}

double PsiMap::eval(double rho) const {
  const double rb = rho_bar();
  const double fm = f_max();
  const double fv = fm_ ? fm_->eval(rho) : fn_->eval(rho);
  const double gap = fm - fv;
  return rho >= rb ? gap : -gap;
}

double PsiMap::inverse(double v) const {
  const double fm = f_max();
  if (v < -fm * (1 + 1e-12) || v > fm * (1 + 1e-12))
    throw std::invalid_argument("PsiMap::inverse: value outside [-f_max, f_max]");
  const double p = std::max(0.0, fm - std::abs(v));
  const auto pair = fm_ ? rho_check_hat(*fm_, p) : fn_->rho_check_hat(p);
  return v >= 0 ? pair.second : pair.first;
}

double PsiMap::f_max() const { return fm_ ? fm_->f_max : fn_->f_max(); }
double PsiMap::rho_bar() const { return fm_ ? fm_->rho_bar : fn_->rho_bar(); }
double PsiMap::R() const { return fm_ ? fm_->R : fn_->R(); }

}  // namespace nloc
