#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperlab/common.hpp"
#include "hyperlab/geometry_core.hpp"

using namespace hyperlab;
using namespace hyperlab::geometry;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd random_direction(std::mt19937_64& rng, int n) {
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = uniform(rng, -1.0, 1.0);
  if (d.norm() < 1e-3) d[0] = 1.0;
  return d.normalized();
}

HyperboloidPoint random_point(std::mt19937_64& rng, int n, double rho_max) {
  return HyperboloidPoint::from_polar(uniform(rng, 0.0, rho_max), random_direction(rng, n));
}

// Delta f = f'' + (n-1) coth(rho) f' for radial f, by scalar finite differences.
// Nested use needs a coarser outer step: roundoff of the inner stencil is divided by h^2 again.
template <class F>
double radial_laplacian_fd(int n, const F& f, double rho, double h = 1e-2) {
  return fd_second_derivative(f, rho, h) + (n - 1) / std::tanh(rho) * fd_derivative(f, rho, h);
}

}  // namespace

TEST(GeometryCore, PointsStayOnTheHyperboloid) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 5; ++n) {
    for (int k = 0; k < 200; ++k) {
      const auto x = random_point(rng, n, 6.0);
      EXPECT_LE(x.constraint_defect(), 1e-12);
      EXPECT_GT(x[0], 0.0);
      Eigen::VectorXd v = tangent_frame(x) * random_direction(rng, n) * uniform(rng, 0.0, 3.0);
      const auto y = exp_map(x, v);
      EXPECT_LE(y.constraint_defect(), 1e-12);
      EXPECT_NEAR(hyperbolic_distance(x, y), tangent_norm(v), 1e-9 * (1.0 + tangent_norm(v)));
    }
  }
}

TEST(GeometryCore, FromCoordsRejectsOffShellPoints) {
  Eigen::VectorXd c(3);
  c << 2.0, 0.0, 0.0;
  EXPECT_THROW(HyperboloidPoint::from_coords(c), DomainError);
  c << -1.0, 0.0, 0.0;
  EXPECT_THROW(HyperboloidPoint::from_coords(c), DomainError);
}

TEST(GeometryCore, TriangleInequalityOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 500; ++k) {
    const int n = 2 + k % 3;
    const auto x = random_point(rng, n, 5.0), y = random_point(rng, n, 5.0), z = random_point(rng, n, 5.0);
    const double xy = hyperbolic_distance(x, y), yz = hyperbolic_distance(y, z), xz = hyperbolic_distance(x, z);
    EXPECT_LE(xz, xy + yz + 1e-12);
    EXPECT_NEAR(xy, hyperbolic_distance(y, x), 1e-13 * (1.0 + xy));
    EXPECT_GE(xy, 0.0);
  }
}

TEST(GeometryCore, DistanceExamples) {
  const auto o = HyperboloidPoint::origin(2);
  EXPECT_DOUBLE_EQ(hyperbolic_distance(o, o), 0.0);
  EXPECT_NEAR(hyperbolic_distance(o, HyperboloidPoint::polar2(1.5, 0.3)), 1.5, 1e-14);
  // Opposite rays: distances add.
  EXPECT_NEAR(hyperbolic_distance(HyperboloidPoint::polar2(1.0, 0.0), HyperboloidPoint::polar2(2.0, kPi)), 3.0, 1e-13);
  // Hyperbolic law of cosines with a right angle at the origin: cosh c = cosh a cosh b.
  const double c = hyperbolic_distance(HyperboloidPoint::polar2(1.0, 0.0), HyperboloidPoint::polar2(2.0, kPi / 2));
  EXPECT_NEAR(std::cosh(c), std::cosh(1.0) * std::cosh(2.0), 1e-12);
}

TEST(GeometryCore, DistanceGradientIsEikonal) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 3;
    const auto x = random_point(rng, n, 4.0), y = random_point(rng, n, 4.0);
    if (hyperbolic_distance(x, y) < 0.05) continue;
    const Eigen::VectorXd g = distance_gradient(x, y);
    EXPECT_NEAR(tangent_norm(g), 1.0, 1e-12);
    // Moving along the gradient geodesic increases the distance at unit rate.
    const auto f = [&](double s) { return hyperbolic_distance(exp_map(x, s * g), y); };
    EXPECT_NEAR(fd_derivative(f, 0.0, 1e-3), 1.0, 1e-8);
  }
  EXPECT_THROW(distance_gradient(HyperboloidPoint::origin(2), HyperboloidPoint::origin(2)), DegenerateError);
}

TEST(GeometryCore, TangentFrameIsOrthonormal) {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 4; ++n) {
    const auto x = random_point(rng, n, 5.0);
    const Eigen::MatrixXd E = tangent_frame(x);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(minkowski(x.coords(), E.col(i)), 0.0, 1e-10);
      for (int j = 0; j < n; ++j) EXPECT_NEAR(-minkowski(E.col(i), E.col(j)), i == j ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(GeometryCore, BilaplacianClosedFormMatchesFiniteDifferences) {
  for (int n = 2; n <= 6; ++n) {
    // Delta(rho^2) = 2 + 2 (n-1) rho coth rho, then one more radial Laplacian by finite differences.
    const auto lap = [n](double r) { return 2.0 + 2.0 * (n - 1) * r / std::tanh(r); };
    for (double rho : {0.3, 0.8, 1.5, 3.0, 6.0}) {
      EXPECT_NEAR(bilaplacian_rho_squared(n, rho), radial_laplacian_fd(n, lap, rho, 0.05), 1e-6) << "n=" << n << " rho=" << rho;
    }
  }
}

TEST(GeometryCore, BilaplacianPowerMatchesFiniteDifferences) {
  for (int n : {2, 3, 5}) {
    for (double delta : {0.1, 0.3}) {
      const auto f = [delta](double r) { return std::pow(r, 2.0 - 2.0 * delta); };
      const auto lap = [&](double r) { return radial_laplacian_fd(n, f, r); };
      for (double rho : {2.0, 4.0, 9.0}) {
        const double fd = radial_laplacian_fd(n, lap, rho, 0.05);
        EXPECT_NEAR(bilaplacian_rho_power(n, delta, rho), fd, 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }
  EXPECT_THROW(bilaplacian_rho_power(3, 0.5, 2.0), DomainError);
  EXPECT_THROW(bilaplacian_rho_power(3, 0.2, 0.5), DomainError);
}

TEST(GeometryCore, BilaplacianStaysInItsInterval) {
  for (int n = 2; n <= 7; ++n) {
    const auto iv = bilaplacian_interval(n);
    for (double rho : logspace(1e-3, 60.0, 400)) {
      const double v = bilaplacian_rho_squared(n, rho);
      EXPECT_GE(v, iv.lower - 1e-9 * iv.upper) << "n=" << n << " rho=" << rho;
      EXPECT_LE(v, iv.upper + 1e-9 * iv.upper) << "n=" << n << " rho=" << rho;
    }
  }
  for (double rho : {0.1, 1.0, 10.0}) EXPECT_NEAR(bilaplacian_rho_squared(3, rho), 8.0, 1e-12);
}

TEST(GeometryCore, ConstantsAreExact) {
  EXPECT_DOUBLE_EQ(frak_C(2), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(frak_C(3), 8.0);
  EXPECT_DOUBLE_EQ(frak_C(5), 32.0);
  EXPECT_THROW(frak_C(1), DomainError);
}

TEST(GeometryCore, SinhPowerIntegralClosedForms) {
  EXPECT_NEAR(sinh_power_integral(2, 0.5, 3.0), std::cosh(3.0) - std::cosh(0.5), 1e-11);
  const auto F3 = [](double r) { return 0.25 * std::sinh(2.0 * r) - 0.5 * r; };
  EXPECT_NEAR(sinh_power_integral(3, 0.0, 2.0), F3(2.0) - F3(0.0), 1e-11);
}

TEST(GeometryCore, RadialGridLayout) {
  const auto g = RadialGrid::cell_centered(3, 5.0, 100);
  EXPECT_EQ(g.size(), 100u);
  EXPECT_DOUBLE_EQ(g.rho_max(), 5.0);
  EXPECT_NEAR(g.nodes.front(), 0.5 * g.h, 1e-15);
  double total = 0.0;
  for (double w : g.quad_weights) total += w;
  EXPECT_NEAR(total, sinh_power_integral(3, 0.0, g.span_end()), 1e-10 * total);
  EXPECT_THROW(RadialGrid::cell_centered(3, 5.0, 4), GridError);
}

TEST(GeometryCore, RadialLaplacianOfRhoSquared) {
  const auto g = RadialGrid::cell_centered(3, 6.0, 600);
  std::vector<double> f;
  for (double r : g.nodes) f.push_back(r * r);
  const auto lap = radial_laplacian(f, g);
  for (std::size_t i = 5; i + 5 < g.size(); i += 37) {
    const double r = g.nodes[i];
    EXPECT_NEAR(lap[i], 2.0 + 4.0 * r / std::tanh(r), 1e-6);
  }
}

TEST(GeometryCore, MovingCenterIsSymmetricAtDyadicTimes) {
  for (int n : {2, 3}) {
    for (double t : {0.0, 0.125, 0.25, 0.375, 0.5}) {
      const auto a = moving_center(n, 12.0, t).P.coords();
      const auto b = moving_center(n, 12.0, 1.0 - t).P.coords();
      for (int i = 0; i <= n; ++i) EXPECT_EQ(a[i], b[i]) << "t=" << t;
    }
  }
  const auto m = moving_center(2, 12.0, 0.0);
  EXPECT_DOUBLE_EQ(hyperbolic_distance(m.P, HyperboloidPoint::origin(2)), 0.0);
  EXPECT_NEAR(moving_center(2, 12.0, 0.2).speed, 12.0 * 0.6, 1e-14);
}

TEST(GeometryCore, KinematicsMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  const double R = 12.0;
  for (int k = 0; k < 40; ++k) {
    const int n = 2 + k % 2;
    const auto x = random_point(rng, n, 4.0);
    const double t = uniform(rng, 0.1, 0.9);
    const auto d = [&](double s) { return hyperbolic_distance(x, moving_center(n, R, s).P); };
    if (d(t) < 0.2) continue;
    const auto kin = moving_center_kinematics(x, R, t);
    EXPECT_NEAR(kin.rho, d(t), 1e-12 * (1.0 + kin.rho));
    EXPECT_NEAR(kin.rho_t, fd_derivative(d, t, 1e-3), 1e-6 * (1.0 + std::abs(kin.rho_t)));
    EXPECT_NEAR(kin.rho_tt, fd_second_derivative(d, t, 1e-3), 1e-5 * (1.0 + std::abs(kin.rho_tt)));
    const auto q = [&](double s) { return 0.5 * d(s) * d(s); };
    const auto hs = moving_center_half_square(x, R, t);
    EXPECT_NEAR(hs.q, q(t), 1e-11 * (1.0 + hs.q));
    EXPECT_NEAR(hs.q_t, fd_derivative(q, t, 1e-3), 1e-6 * (1.0 + std::abs(hs.q_t)));
    EXPECT_NEAR(hs.q_tt, fd_second_derivative(q, t, 1e-3), 1e-5 * (1.0 + std::abs(hs.q_tt)));
  }
  const auto at_center = moving_center(2, R, 0.3).P;
  EXPECT_THROW(moving_center_kinematics(at_center, R, 0.3), DegenerateError);
  EXPECT_NEAR(moving_center_half_square(at_center, R, 0.3).q, 0.0, 1e-20);
}

TEST(GeometryCore, MollifierReproducesConstants) {
  for (int n : {2, 3}) {
    const auto x = HyperboloidPoint::from_polar(1.7, Eigen::VectorXd::Unit(n, 0));
    const auto r = mollify_exp([](const HyperboloidPoint&) { return 2.5; }, 0.4, x, 8);
    EXPECT_NEAR(r.value, 2.5, 1e-13);
    EXPECT_TRUE(r.converged);
  }
  const auto o = HyperboloidPoint::origin(2);
  EXPECT_THROW(mollify_exp_fixed([](const HyperboloidPoint&) { return 1.0; }, 1.5, o, 8), DomainError);
  EXPECT_THROW(mollify_exp_fixed([](const HyperboloidPoint&) { return 1.0; }, 0.5, o, 1), DomainError);
}

TEST(GeometryCore, MollifiedSquareDistanceIsAboveTheCenterValue) {
  // d^2 is convex on H^n, so its ball average exceeds the central value.
  const auto x = HyperboloidPoint::polar2(2.0, 0.4);
  const auto sq = [](const HyperboloidPoint& y) {
    const double d = hyperbolic_distance(y, HyperboloidPoint::origin(2));
    return d * d;
  };
  EXPECT_GT(mollify_exp(sq, 0.5, x, 16).value, sq(x));
}

TEST(GeometryCore, GradientNormOfDistanceSquared) {
  const auto o = HyperboloidPoint::origin(3);
  const auto F = [&](const HyperboloidPoint& y) {
    const double d = hyperbolic_distance(y, o);
    return d * d;
  };
  const auto x = HyperboloidPoint::from_polar(1.3, Eigen::Vector3d(0.0, 0.6, 0.8));
  EXPECT_NEAR(gradient_norm_squared(F, x, 1e-3), 4.0 * 1.3 * 1.3, 1e-8);
  EXPECT_DOUBLE_EQ(capped_square_distance(x, 1.0), 1.0);
}
