#pragma once
// Bell-shaped flux models for a single conservation law: f(0) = f(R) = 0 with a
// single maximum at rho_bar. Provides the dyadic flux mesh M^n (preimages of the
// lattice k * 2^-n * f_max), the piecewise-linear interpolant through its nodes,
// the monotone change of variable Psi, and the inverse branches rho_check/rho_hat.

#include <cstdint>
#include <utility>
#include <vector>

namespace nloc {

struct FluxModel {
  enum class Kind { lwr, table };

  Kind kind = Kind::lwr;
  double R = 1.0;        // maximal density
  double rho_bar = 0.5;  // argmax of f
  double f_max = 0.25;   // f(rho_bar), cached once
  double lip_f = 1.0;    // Lipschitz constant of f

  // lwr: f(rho) = v_max * rho * (1 - rho/R)
  double v_max = 1.0;

  // table: strictly concave samples, evaluated by linear interpolation
  std::vector<double> tab_rho;
  std::vector<double> tab_f;

  double eval(double rho) const;
  // One-sided characteristic speed (exact derivative for lwr, sample-segment
  // slope for tables). side > 0 reads the slope just right of rho, side < 0
  // just left; interior smooth points ignore the side.
  double char_speed(double rho, int side) const;
};

FluxModel build_lwr_flux(double v_max, double R);
FluxModel build_table_flux(const std::vector<double>& rho, const std::vector<double>& f);

// Sub/super-critical inverse branches: f(rho_check) = f(rho_hat) = p with
// rho_check <= rho_bar <= rho_hat. Closed form for lwr, bisection to 1e-13
// otherwise. Rejects p outside [0, f_max].
std::pair<double, double> rho_check_hat(const FluxModel& f, double p);

// speed of a jump between two distinct states: (f_l - f_r) / (rho_l - rho_r)
double shock_speed(const FluxModel& f, double rho_l, double rho_r);
double shock_speed_from_values(double f_l, double f_r, double rho_l, double rho_r);

struct FluxMesh {
  int n = 0;                   // refinement exponent: lattice step 2^-n * f_max
  double f_max = 0.0;
  double rho_bar = 0.0;
  double R = 0.0;
  std::vector<double> levels;  // levels[k] = k * 2^-n * f_max, k = 0..2^n
  std::vector<double> nodes;   // sorted M^n, size 2^(n+1) + 1

  int node_count() const { return static_cast<int>(nodes.size()); }
  int top_index() const { return static_cast<int>(nodes.size()) - 1; }  // 2^(n+1)
  // flux-level index of node i (both branches meet at the top level 2^n)
  int level_of_node(int i) const;
  double node(int i) const { return nodes[static_cast<size_t>(i)]; }
  double level_value(int k) const { return levels[static_cast<size_t>(k)]; }
  // node indices on each branch for lattice level k: (left branch, right branch)
  std::pair<int, int> nodes_for_level(int k) const;
  // nearest node index restricted to the same side of rho_bar, ties toward rho_bar
  int nearest_node_same_side(double rho) const;
  // index of the node equal to rho within tol, or -1
  int find_node(double rho, double tol) const;
};

FluxMesh build_mesh(const FluxModel& f, int n);

struct PiecewiseLinearFlux {
  FluxMesh mesh;
  std::vector<double> slopes;  // slope of segment [node_i, node_(i+1)]
  double lip = 0.0;            // max |slope|

  double eval(double rho) const;
  double f_max() const { return mesh.f_max; }
  double rho_bar() const { return mesh.rho_bar; }
  double R() const { return mesh.R; }
  std::pair<double, double> rho_check_hat(double p) const;
};

PiecewiseLinearFlux build_piecewise_linear(const FluxModel& f, int n);

// Psi(rho) = sign(rho - rho_bar) * (f_max - f(rho)): strictly increasing on
// [0, R], zero at rho_bar, +-f_max at the endpoints. TV of solutions is
// measured in these coordinates.
class PsiMap {
 public:
  explicit PsiMap(const FluxModel& f) : fm_(&f) {}
  explicit PsiMap(const PiecewiseLinearFlux& fn) : fn_(&fn) {}

  double eval(double rho) const;
  double inverse(double v) const;
  double f_max() const;
  double rho_bar() const;
  double R() const;

 private:
  const FluxModel* fm_ = nullptr;
  const PiecewiseLinearFlux* fn_ = nullptr;
};

}  // namespace nloc
