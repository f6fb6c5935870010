#include <gtest/gtest.h>

#include <cmath>

#include "hyperlab/common.hpp"
#include "hyperlab/evolution.hpp"

using namespace hyperlab;
using namespace hyperlab::evolution;
using geometry::RadialGrid;

namespace {

Eigen::VectorXcd gaussian_bump(const RadialGrid& g, double center, double width) {
  Eigen::VectorXcd f(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.nodes[i];
    f[static_cast<Eigen::Index>(i)] = cplx(std::exp(-std::pow((r - center) / width, 2)), 0.3 * std::sin(r));
  }
  return f;
}

// max |V M - (V M)^T| relative to max |V M|.
double vol_symmetry_defect(const GraphLaplacian& L) {
  const Eigen::MatrixXd M = L.dense();
  const Eigen::MatrixXd VM = Eigen::Map<const Eigen::VectorXd>(L.vol.data(), L.size()).asDiagonal() * M;
  return (VM - VM.transpose()).cwiseAbs().maxCoeff() / VM.cwiseAbs().maxCoeff();
}

// phi = (0.1 + 0.05 t^2) rho^2 + sin(t) rho.
WeightField test_weight(const RadialGrid& g, double t) {
  WeightField w;
  for (double r : g.nodes) {
    w.phi.push_back((0.1 + 0.05 * t * t) * r * r + std::sin(t) * r);
    w.phi_t.push_back(0.1 * t * r * r + std::cos(t) * r);
    w.phi_tt.push_back(0.1 * r * r - std::sin(t) * r);
  }
  return w;
}

}  // namespace

TEST(Evolution, GraphLaplaciansAreSelfAdjoint) {
  for (int n : {2, 3, 4}) {
    const auto g = RadialGrid::cell_centered(n, 5.0, 60);
    for (int ell : {0, 1, 3}) EXPECT_LE(vol_symmetry_defect(mode_graph(g, ell)), 1e-13);
  }
  EXPECT_LE(vol_symmetry_defect(polar_graph(polar_grid2d(4.0, 12, 16))), 1e-13);
  const auto g = RadialGrid::cell_centered(3, 5.0, 60);
  const auto L = mode_graph(g, 1);
  const auto f = gaussian_bump(g, 2.0, 0.5), h = gaussian_bump(g, 2.5, 0.7);
  EXPECT_NEAR(std::abs(L.inner(L.apply(f), h) - L.inner(f, L.apply(h))), 0.0, 1e-10 * std::abs(L.inner(L.apply(f), h)));
}

TEST(Evolution, LaplacianIsNonPositive) {
  const auto g = RadialGrid::cell_centered(2, 5.0, 80);
  const auto L = mode_graph(g, 0);
  const auto f = gaussian_bump(g, 1.5, 0.6);
  EXPECT_LT(L.inner(L.apply(f), f).real(), 0.0);
}

TEST(Evolution, ModeGraphMatchesPolarGraphForEll2) {
  const int radial = 80, angular = 512;
  const auto pg = polar_grid2d(5.0, radial, angular);
  const auto P = polar_graph(pg);
  const auto L2 = mode_graph(pg.radial, 2);
  const auto f = gaussian_bump(pg.radial, 2.0, 0.6);
  Eigen::VectorXcd u(pg.size());
  for (int k = 0; k < pg.size(); ++k) u[k] = f[k / angular] * std::cos(2.0 * pg.theta(k));
  const Eigen::VectorXcd Pu = P.apply(u), Lf = L2.apply(f);
  double err = 0.0, scale = Lf.cwiseAbs().maxCoeff();
  for (int k = 0; k < pg.size(); ++k) err = std::max(err, std::abs(Pu[k] - Lf[k / angular] * std::cos(2.0 * pg.theta(k))));
  // The angular stencil differs from -ell^2 by O(dtheta^2) / sinh^2(rho).
  EXPECT_LE(err / scale, 1e-3);
}

TEST(Evolution, SchrodingerConservesTheNorm) {
  const auto g = RadialGrid::cell_centered(3, 6.0, 200);
  EvolutionParams p;
  p.a = 0.0;
  p.b = 1.0;
  p.dt = 1e-2;
  p.t_final = 1.0;
  FieldState u{gaussian_bump(g, 2.0, 0.5), 0.0, 1};
  const double n0 = l2_norm(u, g);
  const auto tr = evolve(u, g, p, {{"norm", [&](const FieldState& s) { return l2_norm(s, g); }}});
  ASSERT_EQ(tr.times.size(), 101u);
  for (double v : tr.series.at("norm")) EXPECT_NEAR(v, n0, 1e-12 * n0);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
}

TEST(Evolution, HeatFlowDissipates) {
  const auto g = RadialGrid::cell_centered(2, 6.0, 120);
  EvolutionParams p;
  p.a = 1.0;
  p.b = 0.0;
  p.dt = 1e-2;
  p.t_final = 0.5;
  const auto tr = evolve({gaussian_bump(g, 2.0, 0.5), 0.0, 0}, g, p,
                         {{"norm", [&](const FieldState& s) { return l2_norm(s, g); }}});
  const auto& norm = tr.series.at("norm");
  for (std::size_t k = 1; k < norm.size(); ++k) EXPECT_LT(norm[k], norm[k - 1]);
}

TEST(Evolution, CrankNicolsonIsSecondOrderInTime) {
  // Smooth data vanishing at the Dirichlet radius keeps the stiff modes unexcited.
  const auto g = RadialGrid::cell_centered(3, 6.0, 120);
  FieldState u0{gaussian_bump(g, 2.0, 0.5).real().cast<cplx>(), 0.0, 0};
  const auto run = [&](double dt) {
    EvolutionParams p;
    p.a = 0.0;
    p.b = 1.0;
    p.dt = dt;
    p.t_final = 0.2;
    const CrankNicolson cn(g, 0, p);
    FieldState s = u0;
    for (long k = 0; k < std::lround(p.t_final / dt); ++k) s = cn.step(s);
    return s.values;
  };
  const Eigen::VectorXcd ref = run(0.2 / 1600);
  const double e1 = (run(0.2 / 50) - ref).norm(), e2 = (run(0.2 / 100) - ref).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
}

TEST(Evolution, ParamsAreValidated) {
  EvolutionParams p;
  p.a = -1.0;
  EXPECT_THROW(p.validate(10), DomainError);
  p.a = 0.0;
  p.b = 0.0;
  EXPECT_THROW(p.validate(10), DomainError);
  p.b = 1.0;
  p.dt = 0.0;
  EXPECT_THROW(p.validate(10), DomainError);
}

TEST(Evolution, ConjugatedOperatorMatchesDenseConjugation) {
  const auto g = RadialGrid::cell_centered(3, 4.0, 40);
  const auto L = mode_graph(g, 1);
  const auto w = test_weight(g, 0.3);
  const double a = 0.7, b = 0.4;
  const ConjugatedOperator op(L, w, a, b);
  const auto x = gaussian_bump(g, 1.5, 0.8);
  const int m = L.size();
  // Oracle: e^phi (a + ib) L e^{-phi} x built from the dense Laplacian.
  Eigen::VectorXcd y(m), ephi(m);
  for (int i = 0; i < m; ++i) {
    y[i] = std::exp(-w.phi[i]) * x[i];
    ephi[i] = std::exp(w.phi[i]);
  }
  const Eigen::VectorXcd Ly = L.dense().cast<cplx>() * y;
  Eigen::VectorXcd expect(m);
  for (int i = 0; i < m; ++i) expect[i] = ephi[i] * cplx(a, b) * Ly[i];
  Eigen::VectorXcd got = op.apply_S(x) + op.apply_A(x);
  for (int i = 0; i < m; ++i) got[i] -= w.phi_t[i] * x[i];
  EXPECT_LE((got - expect).cwiseAbs().maxCoeff(), 1e-11 * expect.cwiseAbs().maxCoeff());
}

TEST(Evolution, SplitIsSymmetricAndSkew) {
  const auto g = RadialGrid::cell_centered(3, 4.0, 40);
  const auto L = mode_graph(g, 2);
  const ConjugatedOperator op(L, test_weight(g, 0.6), 0.5, 1.0);
  const auto f = gaussian_bump(g, 1.5, 0.8), h = gaussian_bump(g, 2.2, 0.5);
  const double scale = std::abs(L.inner(op.apply_S(f), h)) + 1.0;
  EXPECT_NEAR(std::abs(L.inner(op.apply_S(f), h) - L.inner(f, op.apply_S(h))), 0.0, 1e-12 * scale);
  EXPECT_NEAR(std::abs(L.inner(op.apply_A(f), h) + L.inner(f, op.apply_A(h))), 0.0, 1e-12 * scale);
}

TEST(Evolution, TimeDerivativeOfSMatchesFiniteDifferences) {
  const auto g = RadialGrid::cell_centered(3, 4.0, 40);
  const auto L = mode_graph(g, 0);
  const auto x = gaussian_bump(g, 1.5, 0.8);
  const double t = 0.4, h = 1e-3;
  const auto S_at = [&](double s) { return ConjugatedOperator(L, test_weight(g, s), 0.5, 1.0).apply_S(x); };
  // Fourth-order central difference.
  const Eigen::VectorXcd fd = (8.0 * (S_at(t + h) - S_at(t - h)) - (S_at(t + 2 * h) - S_at(t - 2 * h))) / (12.0 * h);
  const Eigen::VectorXcd St = ConjugatedOperator(L, test_weight(g, t), 0.5, 1.0).apply_S_t(x);
  EXPECT_LE((St - fd).cwiseAbs().maxCoeff(), 1e-7 * St.cwiseAbs().maxCoeff());
}

TEST(Evolution, AssembledPairHasSmallDefects) {
  const auto g = RadialGrid::cell_centered(3, 5.0, 50);
  carleman::WeightSpec w;
  w.gamma = 0.3;
  w.n = 3;
  const auto pair = assemble_conjugated(g, 1, w, 0.0, 1.0, 0.0);
  EXPECT_LE(pair.sym_defect, 1e-12);
  EXPECT_LE(pair.anti_defect, 1e-12);
}

TEST(Evolution, ResolutionWarningFlagsSawtooth) {
  FieldState s;
  s.values.resize(40);
  for (int i = 0; i < 40; ++i) s.values[i] = (i % 2 == 0) ? 1.0 : -1.0;
  EXPECT_TRUE(resolution_warning(s).has_value());
  for (int i = 0; i < 40; ++i) s.values[i] = std::sin(0.2 * i);
  EXPECT_FALSE(resolution_warning(s).has_value());
}
