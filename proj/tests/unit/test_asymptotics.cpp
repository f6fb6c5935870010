#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "hyperlab/asymptotics.hpp"
#include "hyperlab/common.hpp"

using namespace hyperlab;
using namespace hyperlab::asymptotics;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// log of the integral of exp(-sigma rho (e^u - u - 1)) over [u0, inf), in 50-digit arithmetic.
double u_integral_log_oracle(double sigma, double rho, double u0) {
  const big k = big(sigma) * big(rho);
  const auto f = [&](big u) { return exp(-k * (exp(u) - u - 1)); };
  using gk = boost::math::quadrature::gauss_kronrod<big, 61>;
  // Split at the peak u = 0; beyond U the integrand is below e^{-120} of its peak.
  big U = 1;
  while (k * (exp(U) - U - 1) < 120) U *= 2;
  const big left = gk::integrate(f, big(u0), big(0), 20, big(1e-25));
  const big right = gk::integrate(f, big(0), U, 20, big(1e-25));
  return static_cast<double>(log(left + right));
}

}  // namespace

TEST(Asymptotics, PhaseIsAccurateNearZero) {
  for (double u : {1e-12, 1e-6, 1e-3, 0.5, -0.7, 3.0}) {
    const big U(u);
    const double exact = static_cast<double>(exp(U) - U - 1);
    EXPECT_NEAR(laplace_phase(u), exact, 1e-15 * std::abs(exact)) << "u=" << u;
  }
}

TEST(Asymptotics, UIntegralMatchesMultiprecisionOracle) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (double rho : {10.0, 50.0, 200.0}) {
      const double g0 = default_gamma0(sigma);
      const auto p = laplace_probe(sigma, rho, g0);
      EXPECT_NEAR(p.u0, g0 / sigma - std::log(rho), 1e-14);
      EXPECT_NEAR(p.log_u_integral, u_integral_log_oracle(sigma, rho, p.u0), 1e-10) << "sigma=" << sigma << " rho=" << rho;
    }
  }
}

TEST(Asymptotics, ProbeAssemblesTheSubstitution) {
  const double sigma = 1.0, rho = 30.0, g0 = 0.5;
  const auto p = laplace_probe(sigma, rho, g0);
  const double expect = std::log(sigma) + sigma * rho * rho * std::log(rho) - sigma * rho + p.log_u_integral;
  EXPECT_NEAR(p.log_I, expect, 1e-12 * std::abs(expect));
  EXPECT_NEAR(p.log_ref, 0.5 * std::log(2.0 * sigma * kPi / rho) + sigma * rho * rho * std::log(rho) - sigma * rho,
              1e-9);
  EXPECT_DOUBLE_EQ(laplace_integral_log(sigma, rho, g0), p.log_I);
}

TEST(Asymptotics, RatioApproachesOneMonotonically) {
  double prev = 1.0;
  for (double rho : {25.0, 50.0, 100.0, 200.0}) {
    const double dev = std::abs(asymptotic_ratio(1.0, rho, 0.5) - 1.0);
    EXPECT_LT(dev, prev) << "rho=" << rho;
    prev = dev;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Asymptotics, ProbeValidatesItsDomain) {
  EXPECT_THROW(laplace_probe(1.0, 1.5, 0.5), DomainError);
  // gamma0 too close to the saddle sigma log rho.
  EXPECT_THROW(laplace_probe(1.0, 10.0, std::log(10.0)), DomainError);
}

TEST(Asymptotics, QExponentIdentity) {
  for (int ell : {1, 2, 3}) {
    for (double L : linspace(3.0, 10.0, 8)) {
      const auto q = q_exponent(ell, std::exp(L));
      EXPECT_LE(q.identity_residual, 1e-12);
      // Direct evaluation of R^{6/(3-Q)} = R^2 log R / ell in log space.
      EXPECT_NEAR(6.0 / (3.0 - q.Q) * L, 2.0 * L + std::log(L / ell), 1e-10 * L);
      EXPECT_LT(q.Q, 3.0);
    }
  }
  EXPECT_THROW(q_exponent(1, 1.0), DomainError);
  EXPECT_THROW(q_exponent(100, std::exp(0.01)), DomainError);
}
