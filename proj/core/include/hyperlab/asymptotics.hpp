#pragma once

namespace hyperlab::asymptotics {

// h(u) = e^u - u - 1, accurate near 0.
double laplace_phase(double u);

struct LaplaceProbe {
  double sigma = 1.0;
  double rho = 0.0;
  double gamma0 = 0.0;
  double log_I = 0.0;
  double log_ref = 0.0;         // log sqrt(2 sigma pi / rho) + sigma rho^2 log rho - sigma rho
  double log_u_integral = 0.0;  // log of the integral of exp(-sigma rho h(u)) over u >= u0
  double u0 = 0.0;              // gamma0 / sigma - log rho
};

// I = sigma exp(sigma rho^2 log rho - sigma rho) * integral_{u0}^{inf} exp(-sigma rho h(u)) du, where the
// substitution gamma = sigma log rho + sigma u maps [gamma0, inf) to [u0, inf). The u-integral is split at
// |u| = rho^{-1/3}. Requires rho >= 2 and gamma0 <= sigma log rho - 3 sigma / sqrt(sigma rho).
LaplaceProbe laplace_probe(double sigma, double rho, double gamma0);
double laplace_integral_log(double sigma, double rho, double gamma0);
double asymptotic_ratio(double sigma, double rho, double gamma0);
inline double default_gamma0(double sigma) { return 0.5 * sigma; }

struct QExponent {
  double Q = 0.0;
  double identity_residual = 0.0;  // |R^{6/(3-Q)} / (R^2 log R / ell) - 1|, formed in log space
};
// Q(ell, R) = 3 - 6 log R / (2 log R + log(log R / ell)).
// Throws DomainError unless log R > 0 and 2 log R + log(log R / ell) > 0.
QExponent q_exponent(int ell, double R);

}  // namespace hyperlab::asymptotics
