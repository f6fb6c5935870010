#pragma once

#include <string>

#include "hyperlab/geometry_core.hpp"

namespace hyperlab::carleman {

enum class WeightKind { static_quadratic, schrodinger_moving, heat_moving, quadratic_log };

std::string kind_name(WeightKind kind);
// Throws DomainError on an unknown name.
WeightKind parse_kind(const std::string& name);

struct WeightSpec {
  WeightKind kind = WeightKind::static_quadratic;
  double mu = 1.0;
  double eps = 1.0;
  double R = 1.0;
  int ell = 1;
  double gamma = 0.0;
  int n = 2;
  double rho0 = 1.0;  // quadratic_log: inner support radius
};

// Throws DomainError for non-positive mu/eps/R, negative gamma, ell < 1, or n < 2.
void validate(const WeightSpec& spec);

// 4 mu eps^{-1/2} frak_C_n; the moving weights require R strictly above it.
double moving_threshold(const WeightSpec& spec);
// max(rho0^{-1} F^{1/2} R^2 / 4, (sup|phi''| / (8 rho0^2))^{1/(3-Q)} R^2 log R / ell), F = frak_C_n.
double quadratic_log_mu_threshold(const WeightSpec& spec);
bool hypothesis_ok(const WeightSpec& spec);

// Time profile of the quadratic_log weight: 0 outside (1/8, 7/8), 3 on [1/4, 3/4],
// septic smoothstep ramps in between (C^3 at the joins).
double time_bump(double t, int derivative = 0);
// sup |time_bump''| (closed form on the ramps).
double time_bump_dtt_sup();

// phi = kappa(t) rho^2 + beta(t) for the radial kinds.
struct RadialWeight {
  double kappa = 0.0;
  double kappa_t = 0.0;
  double kappa_tt = 0.0;
  double beta = 0.0;
  double beta_t = 0.0;
  double beta_tt = 0.0;
};
// Throws DomainError for the moving kinds.
RadialWeight radial_weight(const WeightSpec& spec, double t);
bool is_radial(WeightKind kind);

struct WeightJet {
  double phi = 0.0;
  double phi_t = 0.0;
  double phi_tt = 0.0;
};
WeightJet weight_jet(const WeightSpec& spec, const geometry::HyperboloidPoint& x, double t);
double weight_eval(const WeightSpec& spec, const geometry::HyperboloidPoint& x, double t);

}  // namespace hyperlab::carleman
