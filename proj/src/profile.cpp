#include "nloc/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace nloc {

double DensityProfile::value_at(double x, int side) const {
  // first piece whose right endpoint is >= x (strictly > for side >= 0)
  size_t i = 0;
  for (; i < breakpoints.size(); ++i) {
    if (side >= 0 ? breakpoints[i] > x : breakpoints[i] >= x) break;
  }
  return values[i];
}

DensityProfile make_profile(std::vector<double> breakpoints, std::vector<double> values) {
  if (values.size() != breakpoints.size() + 1)
    throw std::invalid_argument("make_profile: need one more value than breakpoint");
  for (size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("make_profile: breakpoints must be strictly increasing");
  for (double v : values)
    if (!(v >= 0) || !std::isfinite(v))
      throw std::invalid_argument("make_profile: densities must be finite and nonnegative");
  DensityProfile out;
  out.breakpoints.reserve(breakpoints.size());
  out.values.reserve(values.size());
  out.values.push_back(values[0]);
  for (size_t i = 0; i < breakpoints.size(); ++i) {
    if (values[i + 1] == out.values.back()) continue;  // merge zero-size jump
    out.breakpoints.push_back(breakpoints[i]);
    out.values.push_back(values[i + 1]);
  }
  return out;
}

double WeightFunction::eval(double x) const {
  if (x < knots_.front() || x > knots_.back()) return 0.0;
  const int j = segment_of(x);
  const double x0 = knots_[static_cast<size_t>(j)], x1 = knots_[static_cast<size_t>(j) + 1];
  const double t = (x - x0) / (x1 - x0);
  return w_[static_cast<size_t>(j)] * (1 - t) + w_[static_cast<size_t>(j) + 1] * t;
}

double WeightFunction::integral(double x) const {
  if (x <= knots_.front()) return 0.0;
  if (x >= knots_.back()) return 1.0;
  const int j = segment_of(x);
  const Quad q = quad(j);
  const double d = x - q.x_left;
  return q.c0 + d * (q.c1 + d * q.c2);
}

int WeightFunction::segment_of(double x) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  int j = static_cast<int>(it - knots_.begin()) - 1;
  if (j < 0) j = 0;
  if (j >= static_cast<int>(knots_.size()) - 1) j = static_cast<int>(knots_.size()) - 2;
  return j;
}

WeightFunction::Quad WeightFunction::quad(int j) const {
  const size_t s = static_cast<size_t>(j);
  const double dx = knots_[s + 1] - knots_[s];
  Quad q;
  q.x_left = knots_[s];
  q.c0 = cum_[s];
  q.c1 = w_[s];
  q.c2 = 0.5 * (w_[s + 1] - w_[s]) / dx;
  return q;
}

namespace {

// trapezoid cumulative of a piecewise-linear sample set; exact for pwl w
std::vector<double> cumulative_or_throw(const std::vector<double>& knots,
                                        const std::vector<double>& w) {
  std::vector<double> cum(knots.size(), 0.0);
  for (size_t i = 1; i < knots.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (w[i] + w[i - 1]) * (knots[i] - knots[i - 1]);
  if (std::abs(cum.back() - 1.0) > 1e-12)
    throw std::invalid_argument("weight: integral over the support must be 1");
  cum.back() = 1.0;
  return cum;
}

}  // namespace

WeightFunction build_linear_weight(double i_w) {
  if (!(i_w > 0)) throw std::invalid_argument("build_linear_weight: i_w must be positive");
  WeightFunction out;
  out.knots_ = {-i_w, 0.0};
  out.w_ = {0.0, 2.0 / i_w};
  out.cum_ = cumulative_or_throw(out.knots_, out.w_);
  return out;
}

WeightFunction build_pwl_weight(const std::vector<double>& x, const std::vector<double>& w) {
  if (x.size() != w.size() || x.size() < 2)
    throw std::invalid_argument("build_pwl_weight: need >= 2 matched samples");
  if (x.back() != 0.0) throw std::invalid_argument("build_pwl_weight: support must end at 0");
  if (!(x.front() < 0.0)) throw std::invalid_argument("build_pwl_weight: support must start left of 0");
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1]))
      throw std::invalid_argument("build_pwl_weight: knots must be strictly increasing");
    if (w[i] < w[i - 1]) throw std::invalid_argument("build_pwl_weight: w must be non-decreasing");
  }
  if (w.front() < 0) throw std::invalid_argument("build_pwl_weight: w must be nonnegative");
  if (!(w.back() > 0)) throw std::invalid_argument("build_pwl_weight: w(0-) must be positive");
  WeightFunction out;
  out.knots_ = x;
  out.w_ = w;
  out.cum_ = cumulative_or_throw(out.knots_, out.w_);
  return out;
}

double nonlocal_average(const DensityProfile& rho, const WeightFunction& w) {
  // W clamps to 0 left of the support and 1 right of it, so the weighted sum
  // over all pieces truncates itself to [-i_w, 0]
  double xi = 0.0;
  double wl = 0.0;  // W at the left edge of the current piece, W(-inf) = 0
  for (size_t i = 0; i < rho.values.size(); ++i) {
    const double wr = i < rho.breakpoints.size() ? w.integral(rho.breakpoints[i]) : 1.0;
    xi += rho.values[i] * (wr - wl);
    wl = wr;
  }
  return xi;
}

DensityProfile quantize_to_mesh(const DensityProfile& rho0, const FluxMesh& mesh) {
  // Each value may move only inside the mesh cell that encloses it on its own
  // side of rho_bar (on-mesh values are pinned). Among those choices the path
  // of minimal total variation is selected, so TV(Psi) never increases: in Psi
  // coordinates node i sits at (i - 2^n) * lattice step exactly, which makes
  // the variation a pure integer functional of the node indices. Ties go to
  // the node nearest the original value, then toward rho_bar.
  const int half = mesh.top_index() / 2;
  const size_t count = rho0.values.size();

  struct Cand {
    int idx[2];
    int n = 0;
  };
  std::vector<Cand> cands(count);
  for (size_t i = 0; i < count; ++i) {
    const double v = rho0.values[i];
    if (v > mesh.R * (1.0 + 1e-12))
      throw std::invalid_argument("quantize_to_mesh: density above R");
    const double vc = std::min(v, mesh.R);
    const int exact = mesh.find_node(vc, 1e-13);
    if (exact >= 0) {
      cands[i].idx[0] = exact;
      cands[i].n = 1;
      continue;
    }
    // enclosing cell [node_j, node_{j+1}] on the value's own branch
    int a = vc < mesh.rho_bar ? 0 : half;
    int b = vc < mesh.rho_bar ? half : mesh.top_index();
    while (b - a > 1) {
      const int m = (a + b) / 2;
      (mesh.node(m) <= vc ? a : b) = m;
    }
    // order candidates by preference: nearest first, tie toward rho_bar
    const double da = vc - mesh.node(a), db = mesh.node(b) - vc;
    const bool prefer_b = db < da || (db == da && vc < mesh.rho_bar);
    cands[i].idx[0] = prefer_b ? b : a;
    cands[i].idx[1] = prefer_b ? a : b;
    cands[i].n = 2;
  }

  // forward DP on (variation in index units, preference penalty)
  constexpr long big = 1L << 60;
  std::vector<std::array<long, 2>> cost(count, {big, big});
  std::vector<std::array<long, 2>> pen(count, {big, big});
  std::vector<std::array<int, 2>> back(count, {-1, -1});
  for (int c = 0; c < cands[0].n; ++c) {
    cost[0][static_cast<size_t>(c)] = 0;
    pen[0][static_cast<size_t>(c)] = c;
  }
  for (size_t i = 1; i < count; ++i) {
    for (int c = 0; c < cands[i].n; ++c) {
      for (int c0 = 0; c0 < cands[i - 1].n; ++c0) {
        const long tv = cost[i - 1][static_cast<size_t>(c0)] +
                        std::abs(cands[i].idx[c] - cands[i - 1].idx[c0]);
        const long pn = pen[i - 1][static_cast<size_t>(c0)] + c;
        if (tv < cost[i][static_cast<size_t>(c)] ||
            (tv == cost[i][static_cast<size_t>(c)] && pn < pen[i][static_cast<size_t>(c)])) {
          cost[i][static_cast<size_t>(c)] = tv;
          pen[i][static_cast<size_t>(c)] = pn;
          back[i][static_cast<size_t>(c)] = c0;
        }
      }
    }
  }
  int best = 0;
  {
    const size_t last = count - 1;
    for (int c = 1; c < cands[last].n; ++c)
      if (cost[last][static_cast<size_t>(c)] < cost[last][static_cast<size_t>(best)] ||
          (cost[last][static_cast<size_t>(c)] == cost[last][static_cast<size_t>(best)] &&
           pen[last][static_cast<size_t>(c)] < pen[last][static_cast<size_t>(best)]))
        best = c;
  }
  std::vector<double> vals(count);
  for (size_t i = count; i-- > 0;) {
    vals[i] = mesh.node(cands[i].idx[best]);
    if (i > 0) best = back[i][static_cast<size_t>(best)];
  }
  return make_profile(rho0.breakpoints, vals);
}

double tv_psi(const DensityProfile& rho, const PsiMap& psi) {
  double tv = 0.0;
  for (size_t i = 1; i < rho.values.size(); ++i)
    tv += std::abs(psi.eval(rho.values[i]) - psi.eval(rho.values[i - 1]));
  return tv;
}

double mass(const DensityProfile& rho) {
  if (rho.values.front() != 0.0 || rho.values.back() != 0.0)
    throw std::invalid_argument("mass: profile tails must vanish");
  double m = 0.0;
  for (size_t i = 1; i + 1 < rho.values.size(); ++i)
    m += rho.values[i] * (rho.breakpoints[i] - rho.breakpoints[i - 1]);
  return m;
}

}  // namespace nloc
