#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperlab/geometry_core.hpp"
#include "hyperlab/weights.hpp"

namespace hyperlab::evolution {

using cplx = std::complex<double>;

struct Edge {
  int i;
  int j;
  double w;
};

// Finite-volume Laplacian on an arbitrary cell graph:
// (L x)_i = [sum_j w_ij (x_j - x_i) - sink_i x_i] / vol_i + potential_i x_i.
// Self-adjoint for <f, g> = sum_i vol_i f_i conj(g_i).
struct GraphLaplacian {
  std::vector<double> vol;
  std::vector<double> sink;
  std::vector<double> potential;
  std::vector<Edge> edges;

  [[nodiscard]] int size() const { return static_cast<int>(vol.size()); }
  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  [[nodiscard]] Eigen::MatrixXd dense() const;
  [[nodiscard]] cplx inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const;
  [[nodiscard]] double norm2(const Eigen::VectorXcd& f) const;
};

// Mode-reduced operator on a cell-centred radial grid: zero flux through rho = 0,
// homogeneous Dirichlet at the ghost node rho_max, centrifugal term -ell(ell+n-2) csch^2.
GraphLaplacian mode_graph(const geometry::RadialGrid& grid, int ell);

// n = 2 polar grid: radial cells x angular cells, index k = i * angular + j.
struct PolarGrid2D {
  geometry::RadialGrid radial;
  int angular = 0;
  double dtheta = 0.0;

  [[nodiscard]] int size() const { return static_cast<int>(radial.size()) * angular; }
  [[nodiscard]] int index(int i, int j) const { return i * angular + j; }
  [[nodiscard]] double rho(int k) const { return radial.nodes[k / angular]; }
  [[nodiscard]] double theta(int k) const { return (k % angular + 0.5) * dtheta; }
  [[nodiscard]] geometry::HyperboloidPoint point(int k) const {
    return geometry::HyperboloidPoint::polar2(rho(k), theta(k));
  }
};
PolarGrid2D polar_grid2d(double rho_max, int radial_cells, int angular_cells);
GraphLaplacian polar_graph(const PolarGrid2D& grid);

struct FieldState {
  Eigen::VectorXcd values;
  double time = 0.0;
  int mode_ell = 0;
};

FieldState laplacian_mode(const FieldState& state, const geometry::RadialGrid& grid);
// Set when the real part has fewer than 8 samples per oscillation.
std::optional<std::string> resolution_warning(const FieldState& state);
// Weighted L^2 norm with the grid's cell volumes (angular factor omitted).
double l2_norm(const FieldState& state, const geometry::RadialGrid& grid);

struct EvolutionParams {
  double a = 0.0;
  double b = 1.0;
  double gamma = 0.0;
  Eigen::VectorXcd V;                             // empty means V = 0
  std::function<Eigen::VectorXcd(double)> F;      // empty means F = 0
  double dt = 1e-3;
  double t_final = 1.0;

  // Throws DomainError on a < 0, (a, b) = (0, 0), non-positive dt or t_final, non-finite V.
  void validate(std::size_t grid_size) const;
  [[nodiscard]] double M1() const;
};

// Crank-Nicolson for u_t = (a + ib)(L u + V u + F); the tridiagonal system is factored once.
class CrankNicolson {
 public:
  CrankNicolson(const geometry::RadialGrid& grid, int ell, const EvolutionParams& params);
  [[nodiscard]] FieldState step(const FieldState& state) const;
  [[nodiscard]] const GraphLaplacian& graph() const { return graph_; }

 private:
  const EvolutionParams* params_;
  GraphLaplacian graph_;
  int ell_;
  cplx z_;
  std::vector<cplx> dl_, d_, du_, du2_;
  std::vector<int> ipiv_;
  std::vector<cplx> rl_, rd_, ru_;  // explicit half-step operator
};

FieldState step(const FieldState& state, const geometry::RadialGrid& grid, const EvolutionParams& params);

struct Hook {
  std::string name;
  std::function<double(const FieldState&)> fn;
};

struct Trajectory {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  std::vector<FieldState> states;  // every `state_stride`-th step when requested
};

// Records every hook at t = 0 and after every step. Step failures are rethrown with the time attached.
Trajectory evolve(const FieldState& u0, const geometry::RadialGrid& grid, const EvolutionParams& params,
                  const std::vector<Hook>& hooks, int state_stride = 0);

// Samples of phi, phi_t, phi_tt on the cells of a graph.
struct WeightField {
  std::vector<double> phi;
  std::vector<double> phi_t;
  std::vector<double> phi_tt;
};

// Matrix-free e^phi (a + ib) L e^{-phi} split into its self-adjoint part S (plus phi_t) and
// skew-adjoint part A, together with the time derivative S_t.
class ConjugatedOperator {
 public:
  ConjugatedOperator(const GraphLaplacian& graph, WeightField weight, double a, double b);
  [[nodiscard]] Eigen::VectorXcd apply_S(const Eigen::VectorXcd& x) const;
  [[nodiscard]] Eigen::VectorXcd apply_A(const Eigen::VectorXcd& x) const;
  [[nodiscard]] Eigen::VectorXcd apply_S_t(const Eigen::VectorXcd& x) const;
  // Re <(S_t + [S, A]) f, f> = <S_t f, f> + 2 Re <S f, A f>.
  [[nodiscard]] double commutator_form(const Eigen::VectorXcd& f) const;
  [[nodiscard]] const GraphLaplacian& graph() const { return *graph_; }

 private:
  struct EdgeCoef {
    int i, j;
    double w, ch, sh, dphi_t;
  };
  const GraphLaplacian* graph_;
  WeightField weight_;
  double a_, b_;
  std::vector<double> diag_;
  std::vector<EdgeCoef> coef_;
};

struct DiscreteOperatorPair {
  Eigen::MatrixXcd S_mat;
  Eigen::MatrixXcd A_mat;
  Eigen::MatrixXcd S_t_mat;
  std::vector<double> vol;
  carleman::WeightSpec weight;
  double t = 0.0;
  double sym_defect = 0.0;   // max |V S - (V S)^H| / max |V S|
  double anti_defect = 0.0;  // max |V A + (V A)^H| / max |V A|
};

// Weight fields of a radial WeightSpec on the radial nodes at time t.
WeightField radial_weight_field(const geometry::RadialGrid& grid, const carleman::WeightSpec& weight, double t);

DiscreteOperatorPair assemble_conjugated(const geometry::RadialGrid& grid, int ell,
                                         const carleman::WeightSpec& weight, double a, double b, double t);

}  // namespace hyperlab::evolution
