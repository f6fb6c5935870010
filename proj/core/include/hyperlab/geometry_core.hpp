#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace hyperlab::geometry {

// x0 y0 - x1 y1 - ... - xn yn.
double minkowski(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// A point of H^n in the hyperboloid model. <x,x> = 1 up to 1e-12 relative to x0^2; x0 > 0.
class HyperboloidPoint {
 public:
  static HyperboloidPoint from_coords(const Eigen::VectorXd& coords);
  static HyperboloidPoint origin(int n);
  // (cosh rho, sinh rho * direction) for a unit direction in R^n.
  static HyperboloidPoint from_polar(double rho, const Eigen::VectorXd& direction);
  // n = 2 geodesic polar coordinates about the origin.
  static HyperboloidPoint polar2(double rho, double theta);

  [[nodiscard]] const Eigen::VectorXd& coords() const { return coords_; }
  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()) - 1; }
  [[nodiscard]] double operator[](int i) const { return coords_[i]; }
  // |<x,x> - 1| / max(1, x0^2).
  [[nodiscard]] double constraint_defect() const;

 private:
  explicit HyperboloidPoint(Eigen::VectorXd c) : coords_(std::move(c)) {}
  Eigen::VectorXd coords_;
};

double hyperbolic_distance(const HyperboloidPoint& x, const HyperboloidPoint& y);

// Tangent vectors are ambient (n+1)-vectors v with <base, v> = 0; |v| = sqrt(-<v,v>).
double tangent_norm(const Eigen::VectorXd& v);
HyperboloidPoint exp_map(const HyperboloidPoint& base, const Eigen::VectorXd& v);

// Columns are an orthonormal tangent frame at x: the Lorentz boost of e1..en from the origin.
Eigen::MatrixXd tangent_frame(const HyperboloidPoint& x);

// Unit tangent at x pointing away from y (the gradient of d(., y) at x). Requires x != y.
Eigen::VectorXd distance_gradient(const HyperboloidPoint& x, const HyperboloidPoint& y);

// Cell-centred radial grid on [0, rho_max]: rho_max is the Dirichlet (ghost-node) radius,
// nodes rho_i = (i + 1/2) h, faces i h, quad_weights = exact cell integrals of sinh^{n-1}.
struct RadialGrid {
  int n = 2;
  double h = 0.0;
  std::vector<double> nodes;
  std::vector<double> faces;
  std::vector<double> quad_weights;

  static RadialGrid cell_centered(int n, double rho_max, int cells);
  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  [[nodiscard]] double rho_max() const { return faces.back() + 0.5 * h; }
  [[nodiscard]] double span_end() const { return faces.back(); }
};

// Integral of sinh^{n-1} over [a, b] by composite Gauss-Legendre.
double sinh_power_integral(int n, double a, double b);

// h'' + (n-1) coth(rho) h' with second-order stencils (one-sided at both ends).
std::vector<double> radial_laplacian(const std::vector<double>& h_samples, const RadialGrid& grid);

// Closed form 2(n-1)[(n-1) + (n-3)(1 - rho coth rho) csch^2 rho].
double bilaplacian_rho_squared(int n, double rho);
// Closed form of Delta^2(rho^{2-2 delta}) on H^n, rho >= 1, 0 < delta < 1/2.
double bilaplacian_rho_power(int n, double delta, double rho);

// Endpoints of the Delta^2(rho^2) range: n=2 (2, 8/3], n=3 {8}, n>=4 (4n(n-1)/3, 2(n-1)^2).
struct BilaplacianInterval {
  double lower;
  double upper;
  bool lower_closed;
  bool upper_closed;
};
BilaplacianInterval bilaplacian_interval(int n);

double frak_C(int n);

struct GeometryConstants {
  int n = 2;
  double frak_C_n = 0.0;
  double frak_D_n = 0.0;
  std::optional<double> frak_F_n;
};

struct PowerSweep {
  std::vector<double> deltas;
  double rho_lo = 1.0;
  double rho_hi = 100.0;
  std::size_t rho_count = 400;
};
PowerSweep default_power_sweep();

// frak_D_n as the empirical supremum of |Delta^2(rho^{2-2 delta})| over the sweep.
GeometryConstants geometry_constants(int n, const PowerSweep& sweep = default_power_sweep());

// P(t) = exp_0(-R t(1-t) e1) and its derivatives (ambient coordinates).
struct MovingCenter {
  HyperboloidPoint P;
  Eigen::VectorXd velocity;      // dP/dt, tangent at P
  Eigen::VectorXd acceleration;  // covariant dP'/dt, tangent at P
  double speed;                  // R |1 - 2t|
};
MovingCenter moving_center(int n, double R, double t);

struct Kinematics {
  double rho;
  double rho_t;
  double rho_tt;
};
// Throws DegenerateError when d(x, P(t)) <= 1e-6.
Kinematics moving_center_kinematics(const HyperboloidPoint& x, double R, double t);

// q = d(x,P(t))^2 / 2 with q_t, q_tt; smooth through x = P(t).
struct HalfSquareKinematics {
  double q;
  double q_t;
  double q_tt;
};
HalfSquareKinematics moving_center_half_square(const HyperboloidPoint& x, double R, double t);

struct MollifyResult {
  double value;
  double change_on_doubling;
  bool converged;  // change_on_doubling <= 1e-6
};

// Normalized tangent-ball average of phi(exp_x v) against theta(|v|/eps) (sinh|v|/|v|)^{n-1}.
// Gauss-Legendre radially, trapezoid (n=2) or Gauss-Legendre x trapezoid (n=3) angularly.
MollifyResult mollify_exp(const std::function<double(const HyperboloidPoint&)>& phi, double eps,
                          const HyperboloidPoint& x, int samples);
// Single-resolution evaluation used inside finite-difference stencils.
double mollify_exp_fixed(const std::function<double(const HyperboloidPoint&)>& phi, double eps,
                         const HyperboloidPoint& x, int samples);

// Capped squared distance to the origin: min(d^2, R^2).
double capped_square_distance(const HyperboloidPoint& x, double R);

// Riemannian gradient norm squared of F at x by 8th-order central differences along a frame.
double gradient_norm_squared(const std::function<double(const HyperboloidPoint&)>& F,
                             const HyperboloidPoint& x, double step);

}  // namespace hyperlab::geometry
