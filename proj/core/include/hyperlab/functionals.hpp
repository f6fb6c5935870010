#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hyperlab/evolution.hpp"
#include "hyperlab/geometry_core.hpp"

namespace hyperlab::functionals {

// Area of the unit sphere S^{n-1}.
double sphere_area(int n);

// log of |S^{n-1}| * sum_i vol_i |u_i|^2 e^{2 gamma rho_i^2} (log-sum-exp); -inf for the zero state.
// Throws DomainError for an empty state or gamma < 0.
double weighted_norm(const evolution::FieldState& state, const geometry::RadialGrid& grid, double gamma);

struct WeightedNormSeries {
  std::vector<double> times;
  std::vector<double> log_H;
  double gamma = 0.0;
};

struct ConvexityVerdict {
  double min_second_difference = 0.0;  // min over interior samples of the divided second difference
  double interpolation_gap = 0.0;      // max of psi(t) - [(1-s) psi(0) + s psi(1)], s the normalized time
  double N_hat = 0.0;                  // max(gap, 0) / (M0 + M1 + M2 + M1^2 + M2^2)
  bool pass = false;
};
// Throws DomainError with fewer than 5 samples or non-increasing times.
ConvexityVerdict convexity_report(const WeightedNormSeries& series, double M0, double M1, double M2,
                                  double tol_conv = 1e-3);

// alpha(t) = gamma a / (a + 4 gamma (a^2 + b^2) t).
double decay_rate(double gamma, double a, double b, double t);
// max over t of |alpha'(t) + 4 (a + b^2/a) alpha^2| / |alpha'(t)|, alpha' by complex step.
double decay_ode_residual(double gamma, double a, double b, const std::vector<double>& times);

struct DecayMargin {
  std::vector<double> times;
  std::vector<double> margin;  // log RHS - log LHS
  double min_margin = 0.0;
  bool pass = false;
};
// Needs the trajectory states at every recorded time (state_stride = 1). Throws DomainError for a = 0.
DecayMargin gaussian_decay_check(const evolution::Trajectory& trajectory, const geometry::RadialGrid& grid,
                                 const evolution::EvolutionParams& params, double tol = 1e-9);

struct CommutatorCheck {
  double lhs = 0.0;  // Re <(S_t + [S, A]) f, f> from the matrices
  double rhs = 0.0;  // geometric side by quadrature
  double gap = 0.0;  // |lhs - rhs| / (1 + |rhs|)
  double norm2 = 0.0;
};
// f must vanish on the outer 5 cells (SupportError otherwise). Radial weights only.
CommutatorCheck commutator_check(const evolution::DiscreteOperatorPair& pair, const Eigen::VectorXcd& f,
                                 const geometry::RadialGrid& grid, int ell, double a, double b);

// M3 = (M1^2 + 1/6 + 2 frak_C_n)(a^2 + b^2) + 3 and M4 = 7/6 (a^2 + b^2).
double space_time_M3(double M1, double a, double b, int n);
double space_time_M4(double a, double b);

struct SpaceTimeMargin {
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double margin = 0.0;  // log_rhs - log_lhs; +inf when the left side vanishes
  bool pass = false;
};
// Needs states at every step over [0, 1]; throws DomainError otherwise.
SpaceTimeMargin space_time_estimate_check(const evolution::Trajectory& trajectory, const geometry::RadialGrid& grid,
                                          const evolution::EvolutionParams& params, double tol = 1e-9);

// log of the integral over [gamma0, gamma_max] of 2 exp(2 gamma rho^2 - sigma e^{2 gamma / sigma}),
// composite Gauss-Legendre in log space.
double transfer_kernel_log(double rho, double sigma, double gamma0, double gamma_max, int panels = 64);
// Closed form of the same integral over [gamma0, inf) through the upper incomplete gamma function.
double transfer_kernel_log_exact(double rho, double sigma, double gamma0);

struct TransferResult {
  WeightedNormSeries series;        // gamma field holds sigma
  ConvexityVerdict verdict;
  double tail_fraction = 0.0;       // kernel integrand at gamma_max relative to the total, worst case
  bool coverage_warning = false;    // tail_fraction > 1e-8
};
// Pointwise-kernel route: log sum_i vol_i K(rho_i) |u_i|^2 per recorded state.
TransferResult log_weight_transfer(const evolution::Trajectory& trajectory, const geometry::RadialGrid& grid,
                                   double sigma, double gamma0, double gamma_max);
// Family route: integrates a family of weighted-norm series over gamma (trapezoid in log space).
WeightedNormSeries transfer_from_family(const std::vector<WeightedNormSeries>& family, double sigma);

}  // namespace hyperlab::functionals
