#pragma once
// Piecewise-constant density profiles on the line, the non-decreasing exit
// weight w supported on [-i_w, 0], and the weighted average Xi = integral of
// w * rho. The antiderivative W of w is piecewise quadratic and closed-form,
// which keeps Xi evaluation and threshold root finding exact downstream.

#include <vector>

#include "nloc/flux.hpp"

namespace nloc {

// values.size() == breakpoints.size() + 1; values[0] and values.back() are the
// two constant tails. Adjacent equal values are merged at construction.
struct DensityProfile {
  std::vector<double> breakpoints;
  std::vector<double> values;

  int jump_count() const { return static_cast<int>(breakpoints.size()); }
  // value on the piece containing x; side < 0 reads the left piece at a
  // breakpoint, side >= 0 the right piece
  double value_at(double x, int side = +1) const;
};

// validates ordering and sizes, merges equal adjacent values
DensityProfile make_profile(std::vector<double> breakpoints, std::vector<double> values);

// w piecewise linear and non-decreasing on [-i_w, 0], zero for x < -i_w,
// normalized so the integral over the support is 1.
class WeightFunction {
 public:
  double i_w() const { return -knots_.front(); }
  double at_zero() const { return w_.back(); }
  const std::vector<double>& knots() const { return knots_; }

  double eval(double x) const;      // w(x), 0 outside [-i_w, 0]
  double integral(double x) const;  // W(x) = int_{-i_w}^x w, clamped to [0, 1]

  // index of the knot interval [knots[j], knots[j+1]] containing x
  int segment_of(double x) const;
  // W restricted to segment j: W(x) = c0 + c1*(x-x_j) + c2*(x-x_j)^2
  struct Quad {
    double x_left, c0, c1, c2;
  };
  Quad quad(int j) const;

  friend WeightFunction build_linear_weight(double i_w);
  friend WeightFunction build_pwl_weight(const std::vector<double>& x,
                                         const std::vector<double>& w);

 private:
  std::vector<double> knots_;  // -i_w = x_0 < ... < x_m = 0
  std::vector<double> w_;      // w at each knot, interpolated linearly between
  std::vector<double> cum_;    // W at each knot, cum_.back() == 1
};

// w(x) = 2 * i_w^{-2} * (i_w + x): linear ramp, integral 1
WeightFunction build_linear_weight(double i_w);
WeightFunction build_pwl_weight(const std::vector<double>& x, const std::vector<double>& w);

// Xi = sum over pieces of rho_i * (W(b_i) - W(a_i))
double nonlocal_average(const DensityProfile& rho, const WeightFunction& w);

// replace each value by the nearest mesh node on the same side of rho_bar
// (ties toward rho_bar), then re-merge equal neighbors
DensityProfile quantize_to_mesh(const DensityProfile& rho0, const FluxMesh& mesh);

// total variation measured in Psi coordinates: sum of |Psi jump| over jumps
double tv_psi(const DensityProfile& rho, const PsiMap& psi);

// integral of rho over its compact support; rejects profiles with nonzero tails
double mass(const DensityProfile& rho);

// logged history of the weighted average and the active efficiency level
struct XiSample {
  double t = 0;
  double xi = 0;
  double q = 0;
};
struct XiTrace {
  std::vector<XiSample> samples;
};

}  // namespace nloc
