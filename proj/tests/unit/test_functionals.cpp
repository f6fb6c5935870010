#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "hyperlab/common.hpp"
#include "hyperlab/functionals.hpp"

using namespace hyperlab;
using namespace hyperlab::functionals;
using evolution::FieldState;
using geometry::RadialGrid;

namespace {

FieldState bump_state(const RadialGrid& g, double center, double width, double phase = 0.0) {
  FieldState s;
  s.values.resize(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes[i];
    s.values[static_cast<Eigen::Index>(i)] = std::polar(std::exp(-std::pow((r - center) / width, 2)), phase * r);
  }
  return s;
}

WeightedNormSeries series_of(const std::function<double(double)>& psi, int count) {
  WeightedNormSeries s;
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    s.times.push_back(t);
    s.log_H.push_back(psi(t));
  }
  return s;
}

}  // namespace

TEST(Functionals, SphereAreaClosedForms) {
  EXPECT_NEAR(sphere_area(2), 2.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(4), 2.0 * kPi * kPi, 1e-13);
}

TEST(Functionals, WeightedNormMatchesDirectSum) {
  const auto g = RadialGrid::cell_centered(3, 6.0, 120);
  const auto s = bump_state(g, 2.0, 0.6, 1.3);
  for (double gamma : {0.0, 0.1, 0.4}) {
    double direct = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      direct += g.quad_weights[i] * std::norm(s.values[static_cast<Eigen::Index>(i)]) *
                std::exp(2.0 * gamma * g.nodes[i] * g.nodes[i]);
    }
    EXPECT_NEAR(weighted_norm(s, g, gamma), std::log(4.0 * kPi * direct), 1e-12);
  }
  FieldState zero{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size())), 0.0, 0};
  EXPECT_EQ(weighted_norm(zero, g, 0.1), kNegInf);
  EXPECT_THROW(weighted_norm(s, g, -0.1), DomainError);
}

TEST(Functionals, WeightedNormSurvivesLargeExponents) {
  const auto g = RadialGrid::cell_centered(2, 40.0, 400);
  const auto s = bump_state(g, 30.0, 2.0);
  const double v = weighted_norm(s, g, 2.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 3000.0);
}

TEST(Functionals, ConvexityOfAParabola) {
  const auto v = convexity_report(series_of([](double t) { return t * t; }, 11), 1.0, 0.0, 0.0);
  EXPECT_NEAR(v.min_second_difference, 2.0, 1e-10);
  EXPECT_LE(v.interpolation_gap, 0.0);
  EXPECT_DOUBLE_EQ(v.N_hat, 0.0);
  EXPECT_TRUE(v.pass);

  const auto c = convexity_report(series_of([](double t) { return -t * t; }, 11), 1.0, 1.0, 0.0);
  EXPECT_NEAR(c.min_second_difference, -2.0, 1e-10);
  EXPECT_FALSE(c.pass);
  // Largest gap of -t^2 above the chord -t is 1/4 at t = 1/2.
  EXPECT_NEAR(c.interpolation_gap, 0.25, 1e-12);
  EXPECT_NEAR(c.N_hat, 0.25 / 3.0, 1e-12);
}

TEST(Functionals, ConvexityRejectsBadSeries) {
  EXPECT_THROW(convexity_report(series_of([](double t) { return t; }, 4), 0, 0, 0), DomainError);
  auto s = series_of([](double t) { return t; }, 6);
  s.times[3] = s.times[2];
  EXPECT_THROW(convexity_report(s, 0, 0, 0), DomainError);
}

TEST(Functionals, DecayRateSolvesItsOde) {
  for (double a : {0.5, 1.0}) {
    for (double b : {0.0, 1.0}) {
      EXPECT_DOUBLE_EQ(decay_rate(0.3, a, b, 0.0), 0.3);
      EXPECT_LE(decay_ode_residual(0.3, a, b, linspace(0.0, 1.0, 21)), 1e-12);
    }
  }
}

TEST(Functionals, SpaceTimeConstants) {
  EXPECT_NEAR(space_time_M3(0.0, 1.0, 0.0, 3), 115.0 / 6.0, 1e-14);
  EXPECT_NEAR(space_time_M3(2.0, 1.0, 1.0, 2), (4.0 + 1.0 / 6.0 + 16.0 / 3.0) * 2.0 + 3.0, 1e-13);
  EXPECT_NEAR(space_time_M4(1.0, 2.0), 35.0 / 6.0, 1e-14);
}

TEST(Functionals, TransferKernelAgreesWithTwoOracles) {
  for (double rho : {0.5, 2.0, 4.0}) {
    for (double sigma : {0.5, 1.0}) {
      const double g0 = 0.05, gmax = 6.0;
      const auto integrand = [&](double g) {
        return 2.0 * std::exp(2.0 * g * rho * rho - sigma * std::exp(2.0 * g / sigma));
      };
      const double adaptive = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, g0, gmax, 15, 1e-13);
      const double q = transfer_kernel_log(rho, sigma, g0, gmax);
      EXPECT_NEAR(q, std::log(adaptive), 1e-9) << "rho=" << rho << " sigma=" << sigma;
      EXPECT_NEAR(q, transfer_kernel_log_exact(rho, sigma, g0), 1e-9) << "rho=" << rho << " sigma=" << sigma;
    }
  }
}

TEST(Functionals, TransferRoutesAgree) {
  const auto g = RadialGrid::cell_centered(2, 5.0, 80);
  evolution::Trajectory tr;
  for (int k = 0; k < 6; ++k) {
    tr.times.push_back(0.2 * k);
    tr.states.push_back(bump_state(g, 1.0 + 0.3 * k, 0.5, 0.2 * k));
  }
  const double sigma = 1.0, g0 = 0.05, gmax = 4.0;
  const auto kernel = log_weight_transfer(tr, g, sigma, g0, gmax);
  EXPECT_FALSE(kernel.coverage_warning);
  std::vector<WeightedNormSeries> family;
  for (double gamma : linspace(g0, gmax, 4001)) {
    WeightedNormSeries s;
    s.gamma = gamma;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      s.times.push_back(tr.times[k]);
      s.log_H.push_back(weighted_norm(tr.states[k], g, gamma));
    }
    family.push_back(s);
  }
  const auto fam = transfer_from_family(family, sigma);
  ASSERT_EQ(fam.log_H.size(), kernel.series.log_H.size());
  for (std::size_t k = 0; k < fam.log_H.size(); ++k) EXPECT_NEAR(fam.log_H[k], kernel.series.log_H[k], 1e-5);
}

TEST(Functionals, CommutatorMatchesTheGeometricSide) {
  // Static weight phi = gamma rho^2, Schrodinger, ell = 0 on H^3. Oracle for the geometric side:
  // 32 gamma^3 rho^2 |f|^2 - gamma Delta^2(rho^2) |f|^2 + 8 gamma |f'|^2.
  const int n = 3, cells = 600;
  const double gamma = 0.5;
  const auto g = RadialGrid::cell_centered(n, 8.0, cells);
  carleman::WeightSpec w;
  w.gamma = gamma;
  w.n = n;
  const auto pair = evolution::assemble_conjugated(g, 0, w, 0.0, 1.0, 0.0);
  Eigen::VectorXcd f(cells);
  for (int i = 0; i < cells; ++i) f[i] = std::exp(-4.0 * std::pow(g.nodes[i] - 3.0, 2));
  double norm2 = 0.0;
  for (int i = 0; i < cells; ++i) norm2 += g.quad_weights[i] * std::norm(f[i]);
  f /= std::sqrt(norm2);
  double rhs = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double r = g.nodes[i], fr = -8.0 * (r - 3.0) * f[i].real();
    rhs += g.quad_weights[i] * ((32.0 * gamma * gamma * gamma * r * r - gamma * geometry::bilaplacian_rho_squared(n, r)) *
                                    std::norm(f[i]) + 8.0 * gamma * fr * fr);
  }
  const auto c = commutator_check(pair, f, g, 0, 0.0, 1.0);
  EXPECT_LE(std::abs(c.lhs - rhs) / (1.0 + std::abs(rhs)), 1e-3);
  EXPECT_LE(c.gap, 1e-3);

  Eigen::VectorXcd wide = Eigen::VectorXcd::Ones(cells);
  EXPECT_THROW(commutator_check(pair, wide, g, 0, 0.0, 1.0), SupportError);
}

TEST(Functionals, GaussianDecayNeedsDissipation) {
  const auto g = RadialGrid::cell_centered(2, 6.0, 60);
  evolution::Trajectory tr;
  tr.times = {0.0};
  tr.states = {bump_state(g, 0.0, 0.7)};
  evolution::EvolutionParams p;
  p.a = 0.0;
  p.b = 1.0;
  EXPECT_THROW(gaussian_decay_check(tr, g, p), DomainError);
}

TEST(Functionals, GaussianDecayHoldsForTheHeatFlow) {
  const auto g = RadialGrid::cell_centered(2, 8.0, 200);
  evolution::EvolutionParams p;
  p.a = 1.0;
  p.b = 0.0;
  p.gamma = 0.2;
  p.dt = 1e-2;
  p.t_final = 0.5;
  FieldState u0;
  u0.values.resize(200);
  for (int i = 0; i < 200; ++i) u0.values[i] = std::exp(-0.5 * g.nodes[i] * g.nodes[i]);
  const auto tr = evolution::evolve(u0, g, p, {}, 1);
  const auto m = gaussian_decay_check(tr, g, p);
  EXPECT_TRUE(m.pass);
  EXPECT_GE(m.min_margin, 0.0);
}
