#include "hyperlab/asymptotics.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "hyperlab/common.hpp"

namespace hyperlab::asymptotics {

double laplace_phase(double u) {
  // expm1(u) - u cancels for small |u|; the series sum_{k>=2} u^k / k! converges to full precision here.
  if (std::abs(u) < 0.5) {
    double term = 0.5 * u * u, sum = 0.0;
    for (int k = 3; k < 30 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
      sum += term;
      term *= u / k;
    }
    return sum;
  }
  return std::expm1(u) - u;
}

namespace {

double finite_part(double lambda, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  auto f = [lambda](double u) { return std::exp(-lambda * laplace_phase(u)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

}  // namespace

LaplaceProbe laplace_probe(double sigma, double rho, double gamma0) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(rho >= 2.0)) throw DomainError("rho must be >= 2");
  if (!(gamma0 <= sigma * std::log(rho) - 3.0 * sigma / std::sqrt(sigma * rho))) {
    throw DomainError("saddle lies outside the integration domain: gamma0 too large");
  }
  LaplaceProbe p;
  p.sigma = sigma;
  p.rho = rho;
  p.gamma0 = gamma0;
  p.u0 = gamma0 / sigma - std::log(rho);
  const double lambda = sigma * rho;
  const double delta = std::pow(rho, -1.0 / 3.0);
  // Central zone |u| < delta, then the two tails.
  double total = finite_part(lambda, std::max(p.u0, -delta), delta);
  total += finite_part(lambda, p.u0, -delta);
  auto tail = [lambda, delta](double v) { return std::exp(-lambda * laplace_phase(delta + v)); };
  total += boost::math::quadrature::exp_sinh<double>().integrate(tail, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
  p.log_u_integral = std::log(total);
  const double lead = sigma * rho * rho * std::log(rho) - sigma * rho;
  p.log_I = std::log(sigma) + lead + p.log_u_integral;
  p.log_ref = 0.5 * std::log(2.0 * sigma * kPi / rho) + lead;
  return p;
}

double laplace_integral_log(double sigma, double rho, double gamma0) { return laplace_probe(sigma, rho, gamma0).log_I; }

double asymptotic_ratio(double sigma, double rho, double gamma0) {
  const LaplaceProbe p = laplace_probe(sigma, rho, gamma0);
  return std::exp(p.log_I - p.log_ref);
}

QExponent q_exponent(int ell, double R) {
  if (ell < 1) throw DomainError("ell must be >= 1");
  if (!(R > 1.0)) throw DomainError("R must exceed 1");
  const double logR = std::log(R);
  const double L = std::log(logR / ell);
  const double denom = 2.0 * logR + L;
  if (!(denom > 0.0)) throw DomainError("2 log R + log(log R / ell) must be positive");
  QExponent q;
  q.Q = 3.0 - 6.0 * logR / denom;
  const double log_lhs = 6.0 / (3.0 - q.Q) * logR;
  const double log_rhs = 2.0 * logR + std::log(logR) - std::log(static_cast<double>(ell));
  q.identity_residual = std::abs(std::expm1(log_lhs - log_rhs));
  return q;
}

}  // namespace hyperlab::asymptotics
