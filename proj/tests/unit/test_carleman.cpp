#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "hyperlab/carleman.hpp"
#include "hyperlab/common.hpp"

using namespace hyperlab;
using namespace hyperlab::carleman;
using geometry::HyperboloidPoint;
using cplx = std::complex<double>;

namespace {

WeightSpec moving(WeightKind kind, double R = 12.0) {
  WeightSpec s;
  s.kind = kind;
  s.mu = 1.0;
  s.eps = 1.0;
  s.R = R;
  return s;
}

TestBump sample_bump() {
  TestBump b;
  b.rho_c = 2.0;
  b.theta_c = 0.3;
  b.t_c = 0.5;
  b.width = 0.3;
  b.t_width = 0.08;
  return b;
}

// e^phi (d_t - z Delta)(e^{-phi} f) by 8th-order differences in geodesic polar coordinates.
cplx conjugated_fd(const WeightSpec& s, const TestBump& b, cplx z, double r, double th, double t) {
  const auto F = [&](double rr, double tt, double ss) {
    const auto x = HyperboloidPoint::polar2(rr, tt);
    return std::exp(-weight_eval(s, x, ss)) * bump_value(b, x, ss);
  };
  const double h = 2e-3;
  const auto re = [](cplx v) { return v.real(); };
  const auto im = [](cplx v) { return v.imag(); };
  const auto part = [&](auto pick) {
    const double ft = fd_derivative([&](double v) { return pick(F(r, th, v)); }, t, h);
    const double fr = fd_derivative([&](double v) { return pick(F(v, th, t)); }, r, h);
    const double frr = fd_second_derivative([&](double v) { return pick(F(v, th, t)); }, r, h);
    const double fqq = fd_second_derivative([&](double v) { return pick(F(r, v, t)); }, th, h);
    return std::pair{ft, frr + fr / std::tanh(r) + fqq / std::pow(std::sinh(r), 2)};
  };
  const auto [ft_re, lap_re] = part(re);
  const auto [ft_im, lap_im] = part(im);
  const double e = std::exp(weight_eval(s, HyperboloidPoint::polar2(r, th), t));
  return e * (cplx(ft_re, ft_im) - z * cplx(lap_re, lap_im));
}

}  // namespace

TEST(Carleman, ConjugatedApplyMatchesFiniteDifferences) {
  const auto b = sample_bump();
  struct Case {
    WeightKind kind;
    EvolutionOperator op;
    cplx z;
  };
  for (const Case c : {Case{WeightKind::schrodinger_moving, EvolutionOperator::schrodinger, cplx(0, 1)},
                       Case{WeightKind::heat_moving, EvolutionOperator::heat, cplx(1, 0)}}) {
    const auto s = moving(c.kind);
    for (const auto& [r, th, t] : {std::tuple{2.2, 0.1, 0.47}, std::tuple{1.8, 0.5, 0.53}, std::tuple{2.4, 0.35, 0.5}}) {
      const cplx closed = conjugated_apply(s, b, c.op, HyperboloidPoint::polar2(r, th), t);
      const cplx fd = conjugated_fd(s, b, c.z, r, th, t);
      EXPECT_LE(std::abs(closed - fd), 1e-6 * (1.0 + std::abs(fd))) << "r=" << r << " th=" << th << " t=" << t;
    }
  }
}

TEST(Carleman, WeightJetMatchesFiniteDifferences) {
  const auto x = HyperboloidPoint::polar2(1.7, 2.1);
  for (WeightKind kind : {WeightKind::schrodinger_moving, WeightKind::heat_moving}) {
    const auto s = moving(kind);
    const auto phi = [&](double t) { return weight_eval(s, x, t); };
    for (double t : {0.2, 0.45, 0.8}) {
      const auto j = weight_jet(s, x, t);
      EXPECT_NEAR(j.phi_t, fd_derivative(phi, t, 1e-3), 1e-7 * (1.0 + std::abs(j.phi_t)));
      EXPECT_NEAR(j.phi_tt, fd_second_derivative(phi, t, 1e-3), 1e-5 * (1.0 + std::abs(j.phi_tt)));
    }
  }
}

TEST(Carleman, BumpProfileDerivatives) {
  const auto b = sample_bump();
  const auto g = [&](double s) { return bump_profile(b, s).g; };
  for (double s : {0.05, 0.3, 0.6, 0.85}) {
    const auto p = bump_profile(b, s);
    EXPECT_NEAR(p.g1, fd_derivative(g, s, 1e-3), 1e-8);
    EXPECT_NEAR(p.g2, fd_second_derivative(g, s, 1e-3), 1e-6);
    EXPECT_NEAR(p.g1_over_sinh, p.g1 / std::sinh(s), 1e-12);
  }
  EXPECT_EQ(bump_profile(b, b.radius()).g, 0.0);
  EXPECT_EQ(bump_time(b, b.t_c + b.t_radius()).first, 0.0);
  const auto T = [&](double t) { return bump_time(b, t).first; };
  EXPECT_NEAR(bump_time(b, 0.52).second, fd_derivative(T, 0.52, 1e-4), 1e-7);
}

TEST(Carleman, BumpInsideChecksBothMargins) {
  auto b = sample_bump();
  EXPECT_TRUE(bump_inside(b, 0.0, 4.5, 0.1, 0.02));
  EXPECT_FALSE(bump_inside(b, 1.5, 4.5, 0.1, 0.02));
  b.t_c = 0.2;
  EXPECT_FALSE(bump_inside(b, 0.0, 4.5, 0.1, 0.02));
}

TEST(Carleman, RatioNeedsTheHypothesis) {
  const auto b = sample_bump();
  const auto s = moving(WeightKind::schrodinger_moving, 10.0);  // threshold 4 * 8/3 = 10.67
  EXPECT_NEAR(moving_threshold(s), 32.0 / 3.0, 1e-14);
  EXPECT_THROW(carleman_ratio(s, b, EvolutionOperator::schrodinger), HypothesisError);
  WeightSpec radial;
  radial.gamma = 0.2;
  EXPECT_THROW(carleman_ratio(radial, b, EvolutionOperator::schrodinger), DomainError);
}

TEST(Carleman, RatioExceedsOneAndConverges) {
  const auto b = sample_bump();
  const auto s = moving(WeightKind::schrodinger_moving);
  const auto lo = carleman_ratio(s, b, EvolutionOperator::schrodinger);
  const auto hi = carleman_ratio(s, b, EvolutionOperator::schrodinger, {48, 64, 48});
  EXPECT_GE(lo.ratio, 1.0);
  EXPECT_NEAR(lo.ratio, hi.ratio, 1e-3 * hi.ratio);
  EXPECT_NEAR(lo.c, 3.0, 1e-14);  // (R / 4) sqrt(eps / mu)

  auto zero = b;
  zero.amplitude = 0.0;
  EXPECT_DOUBLE_EQ(carleman_ratio(s, zero, EvolutionOperator::schrodinger).ratio, 1.0);
}

TEST(Carleman, HeatRatioExceedsOne) {
  const auto b = sample_bump();
  EXPECT_GE(carleman_ratio(moving(WeightKind::heat_moving), b, EvolutionOperator::heat).ratio, 1.0);
}

TEST(Carleman, TimeBumpIsSmoothAndBounded) {
  EXPECT_EQ(time_bump(0.1), 0.0);
  EXPECT_EQ(time_bump(0.5), 3.0);
  EXPECT_EQ(time_bump(0.9), 0.0);
  for (double join : {0.125, 0.25, 0.75, 0.875}) {
    for (int d = 0; d <= 2; ++d) {
      EXPECT_NEAR(time_bump(join - 1e-9, d), time_bump(join + 1e-9, d), 1e-5) << "join=" << join << " d=" << d;
    }
  }
  const auto T = [](double t) { return time_bump(t); };
  for (double t : {0.15, 0.2, 0.8, 0.85}) {
    EXPECT_NEAR(time_bump(t, 1), fd_derivative(T, t, 1e-4), 1e-6);
    EXPECT_NEAR(time_bump(t, 2), fd_second_derivative(T, t, 1e-3), 1e-4);
  }
  double sup = 0.0;
  for (double t : linspace(0.125, 0.25, 20001)) sup = std::max(sup, std::abs(time_bump(t, 2)));
  EXPECT_NEAR(sup, time_bump_dtt_sup(), 1e-6 * sup);
  EXPECT_THROW(time_bump(0.5, 3), DomainError);
}

TEST(Carleman, QuadraticLogThresholdIsEnforced) {
  WeightSpec q;
  q.kind = WeightKind::quadratic_log;
  q.R = std::exp(3.0);
  q.ell = 1;
  q.mu = quadratic_log_mu_threshold(q);
  EXPECT_TRUE(hypothesis_ok(q));
  TestBump b;
  b.rho_c = 2.5;
  b.width = 0.3;
  b.t_c = 0.5;
  b.t_width = 0.1;
  EXPECT_GE(quadratic_log_ratio(q, b).ratio, 1.0);
  auto low = q;
  low.mu *= 0.5;
  EXPECT_FALSE(hypothesis_ok(low));
  EXPECT_THROW(quadratic_log_ratio(low, b), HypothesisError);
  b.rho_c = 1.2;  // reaches below rho0 = 1
  EXPECT_THROW(quadratic_log_ratio(q, b), SupportError);
}

TEST(Carleman, VirialNeedsCompactSupport) {
  const auto grid = evolution::polar_grid2d(3.0, 60, 64);
  TestBump b = sample_bump();
  b.rho_c = 2.8;
  const auto f = sample_bump(b, grid, 0.5);
  EXPECT_THROW(virial_lower_bound_check(moving(WeightKind::schrodinger_moving), f, grid,
                                        EvolutionOperator::schrodinger, 0.5),
               SupportError);
}

TEST(Carleman, MysteryMarginIsPositiveOnTheTestedRange) {
  std::vector<double> Rs;
  for (double L : linspace(3.0, 8.0, 6)) Rs.push_back(std::exp(L));
  for (const auto& m : mystery_inequality_check(1, Rs, 1.0)) {
    EXPECT_GT(m.margin, 0.0) << "R=" << m.R;
    EXPECT_GT(m.direct_margin, 0.0) << "R=" << m.R;
  }
  EXPECT_THROW(mystery_inequality_check(1, Rs, 0.0), DomainError);
}

TEST(Carleman, KindNamesRoundTrip) {
  for (WeightKind k : {WeightKind::static_quadratic, WeightKind::schrodinger_moving, WeightKind::heat_moving,
                       WeightKind::quadratic_log}) {
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  }
  EXPECT_THROW(parse_kind("cubic"), DomainError);
  WeightSpec bad;
  bad.mu = -1.0;
  EXPECT_THROW(validate(bad), DomainError);
}
