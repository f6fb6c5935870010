#pragma once

#include <complex>
#include <vector>

#include "hyperlab/evolution.hpp"
#include "hyperlab/geometry_core.hpp"
#include "hyperlab/weights.hpp"

namespace hyperlab::carleman {

// f(x, t) = amplitude * g(d(x, C)) * T(t) on H^2 with C = polar2(rho_c, theta_c),
// g(s) = exp(-s^2 / (2 width^2)) (1 - s^2 / radius^2)^6 for s < radius = 3 width,
// T(t) = exp(-(t - t_c)^2 / (2 t_width^2)) (1 - (t - t_c)^2 / t_radius^2)^6 for |t - t_c| < t_radius = 3 t_width.
struct TestBump {
  double rho_c = 2.0;
  double theta_c = 0.0;
  double t_c = 0.5;
  double width = 0.3;
  double t_width = 0.08;
  double amplitude = 1.0;

  [[nodiscard]] double radius() const { return 3.0 * width; }
  [[nodiscard]] double t_radius() const { return 3.0 * t_width; }
  [[nodiscard]] geometry::HyperboloidPoint center() const { return geometry::HyperboloidPoint::polar2(rho_c, theta_c); }
};

// Radial profile jet: g, g', g'/sinh s (finite at 0) and g''.
struct ProfileJet {
  double g, g1, g1_over_sinh, g2;
};
ProfileJet bump_profile(const TestBump& bump, double s);
// Temporal factor and its derivative.
std::pair<double, double> bump_time(const TestBump& bump, double t);
std::complex<double> bump_value(const TestBump& bump, const geometry::HyperboloidPoint& x, double t);

// Support inside {rho_min + margin <= rho <= rho_max - margin} x (margin_t, 1 - margin_t).
bool bump_inside(const TestBump& bump, double rho_min, double rho_max, double margin, double margin_t);

enum class EvolutionOperator { schrodinger, heat };

// e^phi (d_t - z Delta)(e^{-phi} f) at (x, t), z = i (schrodinger) or 1 (heat), by closed form.
std::complex<double> conjugated_apply(const WeightSpec& spec, const TestBump& bump, EvolutionOperator op,
                                      const geometry::HyperboloidPoint& x, double t);

struct QuadratureResolution {
  int radial = 24;   // Gauss-Legendre nodes on [0, radius] in each of 2 panels
  int angular = 32;  // trapezoid nodes in the bump-centred angle
  int temporal = 24; // Gauss-Legendre nodes on [t_c - t_radius, t_c + t_radius] in each of 2 panels
};

struct CarlemanRatio {
  double lhs = 0.0;    // c ||e^phi h|| with c = (R/4) sqrt(eps/mu)
  double rhs = 0.0;    // ||e^phi (d_t - z Delta) h||
  double ratio = 1.0;  // rhs / lhs; 1 for the zero bump
  double c = 0.0;
};

// Throws HypothesisError unless R > 4 mu eps^{-1/2} frak_C_2, DomainError for radial kinds or n != 2.
CarlemanRatio carleman_ratio(const WeightSpec& spec, const TestBump& bump, EvolutionOperator op,
                             const QuadratureResolution& res = {});

// Weighted quadratic-log inequality:
// lhs = (mu/R^2) int |grad f|^2 + (mu^3/R^6) int |rho f|^2, rhs = int |e^phi (d_t - i Delta)(e^{-phi} f)|^2.
struct QuadraticLogRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 1.0;  // rhs / lhs
  double mu_threshold = 0.0;
};
// Throws HypothesisError when mu is below the threshold and SupportError when the bump reaches rho < rho0.
QuadraticLogRatio quadratic_log_ratio(const WeightSpec& spec, const TestBump& bump, const QuadratureResolution& res = {});

// Samples of phi, phi_t, phi_tt on the polar grid.
evolution::WeightField weight_field(const WeightSpec& spec, const evolution::PolarGrid2D& grid, double t);

struct VirialGap {
  double lhs = 0.0;  // <(S_t + [S, A]) f, f> with ||f|| = 1
  double rhs = 0.0;  // eps R^2 / (8 mu) - mu frak_C_2 (schrodinger) or eps R^2 / (16 mu) (heat)
  double gap = 0.0;  // lhs - rhs
};
// f is sampled on the grid and normalized; throws SupportError when f does not vanish within 5 cells
// of the outer boundary.
VirialGap virial_lower_bound_check(const WeightSpec& spec, const Eigen::VectorXcd& f, const evolution::PolarGrid2D& grid,
                                   EvolutionOperator op, double t);
Eigen::VectorXcd sample_bump(const TestBump& bump, const evolution::PolarGrid2D& grid, double t);

struct FrontierCell {
  double mu = 0.0;
  double eps = 0.0;
  double R = 0.0;
  double min_ratio = 0.0;
  bool hypothesis_ok = false;
};
// Sweeps R over `R_factors` times the threshold for each (mu, eps); ratios below the threshold are
// computed without the hypothesis guard.
std::vector<FrontierCell> feasibility_frontier(const std::vector<double>& mus, const std::vector<double>& epss,
                                               const std::vector<double>& R_factors, const std::vector<TestBump>& corpus,
                                               EvolutionOperator op, const QuadratureResolution& res = {});

struct MysteryMargin {
  double R = 0.0;
  double log_F = 0.0;
  double margin = 0.0;  // log F - log(2) / 2
  // Second route: 2 mu^Q - log 2 - (2 - 2Q) log mu with mu = C R^{6/(3-Q)}, evaluated directly.
  double direct_margin = 0.0;
};
std::vector<MysteryMargin> mystery_inequality_check(int ell, const std::vector<double>& R_list, double C_cal);

}  // namespace hyperlab::carleman
