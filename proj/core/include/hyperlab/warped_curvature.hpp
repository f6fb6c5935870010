#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hyperlab::curvature {

using Matrix = Eigen::MatrixXd;
using Angles = std::vector<double>;

// Dense rank-3 / rank-4 arrays with every index running over `dim` values.
struct Tensor3 {
  int dim = 0;
  std::vector<double> data;
  Tensor3() = default;
  explicit Tensor3(int d) : dim(d), data(static_cast<std::size_t>(d) * d * d, 0.0) {}
  double& operator()(int a, int b, int c) { return data[(a * dim + b) * dim + c]; }
  double operator()(int a, int b, int c) const { return data[(a * dim + b) * dim + c]; }
};

struct Tensor4 {
  int dim = 0;
  std::vector<double> data;
  Tensor4() = default;
  explicit Tensor4(int d) : dim(d), data(static_cast<std::size_t>(d) * d * d * d, 0.0) {}
  double& operator()(int a, int b, int c, int e) { return data[((a * dim + b) * dim + c) * dim + e]; }
  double operator()(int a, int b, int c, int e) const { return data[((a * dim + b) * dim + c) * dim + e]; }
};

using MatrixField = std::function<Matrix(double rho, const Angles& theta)>;

// g = d rho^2 + sinh^2(rho) Upsilon(rho, theta), Upsilon = h + Lambda. Index 0 is rho, index
// i >= 1 is theta_i. Empty derivative callables fall back to finite differences in rho.
struct WarpedMetricSpec {
  int n = 2;
  std::string name;
  MatrixField upsilon;
  MatrixField upsilon_rho;
  MatrixField upsilon_rho_rho;
  MatrixField sphere_metric;  // h
  double decay_m = 0.0;
};

// Coordinates (theta_1, ..., theta_{n-1}); h = diag(1, sin^2 th1, sin^2 th1 sin^2 th2, ...).
Matrix round_sphere_metric(int n, const Angles& theta);

WarpedMetricSpec hyperbolic_metric(int n);
// Lambda = <rho>^{-m} eps0 cos(theta_1) h with <rho> = sqrt(1 + rho^2).
WarpedMetricSpec conformal_example_metric(int n, double m = 2.0, double eps0 = 0.1);
// Non-conformal Lambda = <rho>^{-m} eps0 D C(theta) D, D = sqrt(h), C a trigonometric symmetric matrix.
WarpedMetricSpec anisotropic_example_metric(int n, double m = 2.0, double eps0 = 0.1);

// Generic curvature of an arbitrary metric g(x) by nested 8th-order central differences:
// metric -> Christoffels (step h1) -> Riemann (derivative of FD Christoffels, step h2).
struct GenericCurvature {
  Matrix metric;
  Tensor3 christoffel;  // Gamma^a_{bc}
  Tensor4 riemann;      // R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
  Matrix ricci;         // Ric_{bd} = R^a_{bad}
  double scalar = 0.0;
};
using MetricFunction = std::function<Matrix(const std::vector<double>&)>;
Tensor3 generic_christoffel(const MetricFunction& g, const std::vector<double>& x, double h1 = 2e-3);
GenericCurvature generic_curvature(const MetricFunction& g, const std::vector<double>& x, double h1 = 2e-3,
                                   double h2 = 1e-2);

// Full metric of the warped product as a function of (rho, theta...).
MetricFunction full_metric(const WarpedMetricSpec& spec);
GenericCurvature curvature_oracle(const WarpedMetricSpec& spec, double rho, const Angles& theta);

Tensor3 christoffel_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// The five displayed component families; sphere indices 0..n-2 stand for theta_1..theta_{n-1}.
struct RiemannFamilies {
  int n = 2;
  Matrix R0i0j;   // R^0_{i0j}
  Matrix Ri0j0;   // R^i_{0j0}
  Tensor4 Rijkl;  // R^i_{jkl}
  Tensor3 R0ijk;  // R^0_{ijk}
  Tensor3 Ri0jk;  // R^i_{0jk}
  Tensor4 full;   // R^a_{bcd} over all n indices, assembled from the lowered families
};
RiemannFamilies riemann_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta);

struct RicciScalar {
  Matrix ricci;  // n x n, index 0 = rho
  double scalar = 0.0;
};
RicciScalar ricci_scalar_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta);

struct CurvatureReport {
  int n = 2;
  double rho = 0.0;
  Angles theta;
  Matrix metric;
  Tensor3 christoffels;
  RiemannFamilies riemann;
  Matrix ricci;
  double scalar = 0.0;
  std::vector<double> sectional_radial;      // K(d_rho, d_theta_j)
  Matrix sectional_tangential;               // K(d_theta_j, d_theta_k), j != k
};
CurvatureReport curvature_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// K(X, Y) = <R(X,Y)Y, X> / (|X|^2 |Y|^2 - <X,Y>^2) for a full R^a_{bcd} and metric g.
double sectional_curvature(const Tensor4& riemann, const Matrix& g, const Eigen::VectorXd& X,
                           const Eigen::VectorXd& Y);

struct Plane {
  Eigen::VectorXd X;
  Eigen::VectorXd Y;
};
struct SectionalSeries {
  std::vector<double> rho;
  std::vector<std::vector<double>> values;  // values[p][k] for plane p at rho[k]
};
// Coordinate planes (d_rho, d_theta_j) and (d_theta_j, d_theta_k).
std::vector<Plane> coordinate_planes(int n);
// Throws DegenerateError for a plane with a vanishing area element; DomainError if rho_list is not increasing.
SectionalSeries sectional_scan(const WarpedMetricSpec& spec, const std::vector<Plane>& planes,
                               const std::vector<double>& rho_list, const Angles& theta);

struct ShapeOperatorState {
  Matrix S;  // (1,1)-tensor on the geodesic sphere
  Matrix A;  // second fundamental form, A_ij = g_ik S^k_j
  double H = 0.0;
};
ShapeOperatorState shape_operator(const WarpedMetricSpec& spec, double rho, const Angles& theta);

struct RiccatiResidual {
  double frobenius = 0.0;     // |d_rho S + S^2 + R(., d_rho) d_rho|
  double trace_residual = 0.0;  // |d_rho H + |S|^2 + Ric_00|
};
RiccatiResidual riccati_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// Sign of the normal Ricci term in d H = div A + sign * Ric(N, .)|_T.
struct BilaplacianOptions {
  double codazzi_sign = -1.0;
  double rho0 = 1.0;
};
struct BilaplacianBreakdown {
  double value = 0.0;
  double H = 0.0;
  double S_norm2 = 0.0;
  double ric00 = 0.0;
  double delta_H = 0.0;  // Delta(Delta rho)
  double div2A = 0.0;
  double h32 = 0.0;      // div_S of the tangential normal-Ricci field
};
BilaplacianBreakdown bilaplacian_perturbed_breakdown(const WarpedMetricSpec& spec, double rho, const Angles& theta,
                                                     const BilaplacianOptions& opts = {});
double bilaplacian_perturbed(const WarpedMetricSpec& spec, double rho, const Angles& theta,
                             const BilaplacianOptions& opts = {});

// tr(A . Ric|_tan) by contraction minus the X/Y decomposition.
struct TraceDecomposition {
  double direct = 0.0;
  double decomposed = 0.0;
  double residual = 0.0;
};
TraceDecomposition trace_decomposition_check(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// Independent finite-difference Laplace-Beltrami of f on the full metric.
using ScalarField = std::function<double(const std::vector<double>&)>;
double oracle_laplacian(const WarpedMetricSpec& spec, const ScalarField& f, const std::vector<double>& x,
                        double h1 = 2e-3);
double oracle_bilaplacian_rho_squared(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// |Hess rho|^2 + <grad rho, grad Delta rho> + Ric(grad rho, grad rho) from oracle quantities only.
double bochner_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta);
// |tr S - Delta_g rho|, Delta_g rho by the FD oracle.
double mean_curvature_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta);

// Fitted log-log slopes of |d_rho^j Lambda| (Frobenius, j = 0, 1, 2) along rho_list.
std::vector<double> lambda_decay_slopes(const WarpedMetricSpec& spec, const Angles& theta,
                                        const std::vector<double>& rho_list);

// Empirical sup of |bilaplacian_perturbed| over rho in [rho_lo, rho_hi] and the given angles.
double frak_F_sweep(const WarpedMetricSpec& spec, const std::vector<Angles>& angles, double rho_lo, double rho_hi,
                    std::size_t count, const BilaplacianOptions& opts = {});

}  // namespace hyperlab::curvature
