#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "hyperlab/asymptotics.hpp"
#include "hyperlab/carleman.hpp"
#include "hyperlab/evolution.hpp"
#include "hyperlab/functionals.hpp"
#include "hyperlab/geometry_core.hpp"
#include "hyperlab/warped_curvature.hpp"
#include "suites.hpp"

namespace hyperlab::runner {

namespace {

using geometry::HyperboloidPoint;
using geometry::RadialGrid;
namespace cv = curvature;

std::string num(double x) { return format_double(x); }
std::string num(int x) { return std::to_string(x); }

// Short form for verdict names only; tables keep full precision.
std::string label_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string tag(const std::string& stem, int n) { return stem + "_n" + std::to_string(n); }

// Independent stream per (seed, stream id) so that one sample is reproducible from its recipe.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  return std::mt19937_64(seed ^ (0x9E3779B97F4A7C15ULL * (id + 1)));
}

std::string point_recipe(std::uint64_t seed, int n, int index) {
  return "seed=" + std::to_string(seed) + " n=" + std::to_string(n) + " index=" + std::to_string(index);
}

// rho in [0.5, 6]; polar angles in [0.5, pi - 0.5] (away from the chart poles), the last angle in [0, 2 pi).
std::pair<double, cv::Angles> random_point(std::mt19937_64& rng, int n) {
  const double rho = 0.5 + 5.5 * unit01(rng);
  cv::Angles th(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    th[i] = i + 1 < n - 1 ? 0.5 + (kPi - 1.0) * unit01(rng) : 2.0 * kPi * unit01(rng);
  }
  return {rho, th};
}

double relerr(double closed, double oracle) { return std::abs(closed - oracle) / std::max(std::abs(oracle), 1.0); }

struct WorstComponent {
  double err = 0.0;
  std::string name;
  double closed = 0.0;
  double oracle = 0.0;
  void update(double c, double o, const std::string& label) {
    const double e = relerr(c, o);
    if (e > err || name.empty()) {
      err = e;
      name = label;
      closed = c;
      oracle = o;
    }
  }
};

WorstComponent compare_tensors(const cv::CurvatureReport& closed, const cv::GenericCurvature& oracle) {
  WorstComponent w;
  const int d = closed.n;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        w.update(closed.christoffels(a, b, c), oracle.christoffel(a, b, c),
                 "Gamma^" + std::to_string(a) + "_" + std::to_string(b) + std::to_string(c));
        for (int e = 0; e < d; ++e) {
          w.update(closed.riemann.full(a, b, c, e), oracle.riemann(a, b, c, e),
                   "R^" + std::to_string(a) + "_" + std::to_string(b) + std::to_string(c) + std::to_string(e));
        }
      }
      w.update(closed.ricci(a, b), oracle.ricci(a, b), "Ric_" + std::to_string(a) + std::to_string(b));
    }
  }
  w.update(closed.scalar, oracle.scalar, "scalar");
  return w;
}

// ---------------------------------------------------------------------------------------------
// curvature

void curvature_oracle_group(SuiteContext& ctx, int n) {
  GroupClock clock(ctx.report, "curvature_oracle");
  const auto seed = ctx.config.corpus.seed;
  const int count = ctx.config.corpus.size;
  const auto spec = cv::conformal_example_metric(n);
  std::vector<std::pair<double, cv::Angles>> points;
  auto rng = stream(seed, static_cast<std::uint64_t>(n));
  for (int k = 0; k < count; ++k) points.push_back(random_point(rng, n));
  std::vector<WorstComponent> worst(points.size());
  parallel_for(count, ctx.options.jobs, [&](int k) {
    const auto& [rho, th] = points[k];
    worst[k] = compare_tensors(cv::curvature_closed(spec, rho, th), cv::curvature_oracle(spec, rho, th));
  });
  auto& t = ctx.table(tag("curvature_oracle", n), {"rho", "theta", "component", "closed_form", "oracle", "rel_err"});
  int arg = -1;
  double max_err = 0.0;
  for (int k = 0; k < count; ++k) {
    t.rows.push_back({num(points[k].first), num(points[k].second[0]), worst[k].name, num(worst[k].closed),
                      num(worst[k].oracle), num(worst[k].err)});
    if (arg < 0 || worst[k].err > max_err) {
      max_err = worst[k].err;
      arg = k;
    }
  }
  if (count == 0) {
    ctx.warn("curvature oracle corpus is empty for n = " + std::to_string(n) + "; vacuous pass");
    return;
  }
  ctx.at_most("curvature_oracle", tag("oracle_max_rel_err", n), max_err, ctx.tol("oracle_rel"),
              {{"n", n}, {"points", count}}, point_recipe(seed, n, arg));
}

void curvature_flat_group(SuiteContext& ctx, int n) {
  GroupClock clock(ctx.report, "curvature_flat");
  const auto spec = cv::hyperbolic_metric(n);
  auto rng = stream(ctx.config.corpus.seed, 100 + static_cast<std::uint64_t>(n));
  double k_err = 0.0, ric_err = 0.0, scal_err = 0.0;
  const int count = std::max(ctx.config.corpus.size, 1);
  for (int k = 0; k < count; ++k) {
    const auto [rho, th] = random_point(rng, n);
    const auto rep = cv::curvature_closed(spec, rho, th);
    for (double v : rep.sectional_radial) k_err = std::max(k_err, std::abs(v + 1.0));
    for (int i = 0; i < rep.sectional_tangential.rows(); ++i) {
      for (int j = 0; j < rep.sectional_tangential.cols(); ++j) {
        if (i != j) k_err = std::max(k_err, std::abs(rep.sectional_tangential(i, j) + 1.0));
      }
    }
    const cv::Matrix diff = rep.ricci + (n - 1.0) * rep.metric;
    ric_err = std::max(ric_err, diff.cwiseAbs().maxCoeff() / std::max(1.0, rep.metric.cwiseAbs().maxCoeff()));
    scal_err = std::max(scal_err, std::abs(rep.scalar + n * (n - 1.0)));
  }
  const std::map<std::string, double> params{{"n", n}, {"points", count}};
  ctx.at_most("curvature_flat", tag("flat_sectional", n), k_err, ctx.tol("flat"), params);
  ctx.at_most("curvature_flat", tag("flat_ricci", n), ric_err, ctx.tol("flat"), params);
  ctx.at_most("curvature_flat", tag("flat_scalar", n), scal_err, ctx.tol("flat"), params);
}

void curvature_sectional_group(SuiteContext& ctx, int n) {
  GroupClock clock(ctx.report, "curvature_sectional");
  const double m = 2.0;
  const auto spec = cv::conformal_example_metric(n, m);
  const auto rhos = logspace(5.0, 50.0, 20);
  auto& t = ctx.table(tag("sectional_decay", n), {"theta1", "rho", "max_abs_K_plus_1"}, true);
  double worst = 1e300;
  for (double th1 : {0.3, 0.7, 1.2}) {
    cv::Angles th(n - 1, 0.9);
    th[0] = th1;
    const auto sec = cv::sectional_scan(spec, cv::coordinate_planes(n), rhos, th);
    std::vector<double> dev;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      double d = 0.0;
      for (const auto& plane : sec.values) d = std::max(d, std::abs(plane[k] + 1.0));
      dev.push_back(d);
      t.rows.push_back({num(th1), num(rhos[k]), num(d)});
    }
    worst = std::min(worst, -loglog_slope(rhos, dev));
  }
  ctx.at_least("curvature_sectional", tag("sectional_decay_exponent", n), worst, m - ctx.tol("slope"),
               {{"n", n}, {"m", m}});
}

void curvature_residual_group(SuiteContext& ctx, int n) {
  GroupClock clock(ctx.report, "curvature_residuals");
  const std::vector<cv::WarpedMetricSpec> metrics{cv::hyperbolic_metric(n), cv::conformal_example_metric(n),
                                                  cv::anisotropic_example_metric(n)};
  auto& t = ctx.table(tag("residuals", n), {"metric", "rho", "theta", "riccati", "riccati_trace", "bochner",
                                            "mean_curvature"});
  for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
    const auto& spec = metrics[mi];
    auto rng = stream(ctx.config.corpus.seed, 200 + 10 * static_cast<std::uint64_t>(n) + mi);
    std::vector<std::pair<double, cv::Angles>> pts;
    for (int k = 0; k < 20; ++k) pts.push_back(random_point(rng, n));
    std::vector<std::array<double, 4>> res(pts.size());
    parallel_for(static_cast<int>(pts.size()), ctx.options.jobs, [&](int k) {
      const auto& [rho, th] = pts[k];
      const auto rr = cv::riccati_residual(spec, rho, th);
      res[k] = {rr.frobenius, rr.trace_residual, cv::bochner_residual(spec, rho, th),
                cv::mean_curvature_residual(spec, rho, th)};
    });
    double riccati = 0.0, bochner = 0.0;
    int arg_r = 0, arg_b = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      t.rows.push_back({spec.name, num(pts[k].first), num(pts[k].second[0]), num(res[k][0]), num(res[k][1]),
                        num(res[k][2]), num(res[k][3])});
      const double r = std::max({res[k][0], res[k][1], res[k][3]});
      if (r > riccati) riccati = r, arg_r = static_cast<int>(k);
      if (res[k][2] > bochner) bochner = res[k][2], arg_b = static_cast<int>(k);
    }
    const std::map<std::string, double> params{{"n", n}, {"points", 20}};
    ctx.at_most("curvature_residuals", tag("riccati_" + spec.name, n), riccati, ctx.tol("residual"), params,
                point_recipe(ctx.config.corpus.seed, n, arg_r));
    ctx.at_most("curvature_residuals", tag("bochner_" + spec.name, n), bochner, ctx.tol("residual"), params,
                point_recipe(ctx.config.corpus.seed, n, arg_b));
  }
}

// ---------------------------------------------------------------------------------------------
// time evolution helpers

Eigen::VectorXcd profile_vector(const ProfileConfig& p, const RadialGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (p.kind == "zero") return {};
  Eigen::VectorXcd v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = grid.nodes[i];
    v[i] = p.kind == "constant" ? p.amplitude : p.amplitude * std::exp(-r * r / (p.scale * p.scale));
  }
  return v;
}

// gaussian: A e^{-(gamma + s) rho^2}; radial_decay: A rho e^{-s rho^2} / sinh rho;
// eigenfunction: A sin(k rho) / sinh rho with k = s pi / rho_max.
evolution::FieldState initial_state(const ProfileConfig& p, const RadialGrid& grid, double gamma) {
  evolution::FieldState u;
  u.values.resize(static_cast<Eigen::Index>(grid.size()));
  const double k = p.scale * kPi / grid.rho_max();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes[i];
    double v = 0.0;
    if (p.kind == "gaussian") {
      v = std::exp(-(gamma + p.scale) * r * r);
    } else if (p.kind == "radial_decay") {
      v = r * std::exp(-p.scale * r * r) / std::sinh(r);
    } else {
      v = std::sin(k * r) / std::sinh(r);
    }
    u.values[static_cast<Eigen::Index>(i)] = p.amplitude * v;
  }
  return u;
}

evolution::EvolutionParams make_params(const ExperimentConfig& c, const RadialGrid& grid, double a, double b,
                                       double gamma, double dt) {
  evolution::EvolutionParams p;
  p.a = a;
  p.b = b;
  p.gamma = gamma;
  p.V = profile_vector(c.physics.V, grid);
  const Eigen::VectorXcd F = profile_vector(c.physics.F, grid);
  if (F.size() > 0) p.F = [F](double) { return F; };
  p.dt = dt;
  p.t_final = c.physics.t_final;
  return p;
}

void add_checkpoint(SuiteContext& ctx, const std::string& name, const evolution::FieldState& s,
                    const RadialGrid& grid) {
  ctx.report.checkpoints.push_back({name, s, grid.nodes, grid.n});
}

}  // namespace

void suite_curvature(SuiteContext& ctx) {
  for (int n : ctx.config.dims) {
    if (n > 4) throw DomainError("curvature suite supports n <= 4");
    curvature_oracle_group(ctx, n);
    curvature_flat_group(ctx, n);
    curvature_sectional_group(ctx, n);
    curvature_residual_group(ctx, n);
  }
}

// ---------------------------------------------------------------------------------------------
// bilaplacian

void suite_bilaplacian(SuiteContext& ctx) {
  {
    GroupClock clock(ctx.report, "bilaplacian_interval");
    const auto rhos = logspace(1e-2, 50.0, 1000);
    auto& t = ctx.table("bilaplacian_interval", {"n", "rho", "value", "lower", "upper"}, true);
    for (int n : ctx.config.dims) {
      const auto iv = geometry::bilaplacian_interval(n);
      double excess = -1e300, dev8 = 0.0;
      for (double r : rhos) {
        const double v = geometry::bilaplacian_rho_squared(n, r);
        excess = std::max({excess, iv.lower - v, v - iv.upper});
        dev8 = std::max(dev8, std::abs(v - 8.0));
        t.rows.push_back({num(n), num(r), num(v), num(iv.lower), num(iv.upper)});
      }
      ctx.at_most("bilaplacian_interval", tag("interval_excess", n), excess, ctx.tol("interval_slack"),
                  {{"n", n}, {"lower", iv.lower}, {"upper", iv.upper}});
      if (n == 3) ctx.at_most("bilaplacian_interval", "n3_constant", dev8, ctx.tol("n3_constant"));
    }
  }
  {
    GroupClock clock(ctx.report, "bilaplacian_perturbed");
    const auto rhos = logspace(5.0, 50.0, 20);
    auto& t = ctx.table("bilaplacian_perturbed", {"n", "theta1", "rho", "difference", "rho2_difference"}, true);
    for (int n : ctx.config.dims) {
      if (n > 4) continue;
      const auto spec = cv::conformal_example_metric(n);
      for (double th1 : {0.3, 0.7, 1.2}) {
        cv::Angles th(n - 1, 0.9);
        th[0] = th1;
        std::vector<double> diff;
        double c_lower = 0.0, c_upper = 0.0;
        for (std::size_t k = 0; k < rhos.size(); ++k) {
          const double r = rhos[k];
          const double d = std::abs(cv::bilaplacian_perturbed(spec, r, th) - geometry::bilaplacian_rho_squared(n, r));
          diff.push_back(d);
          (2 * k < rhos.size() ? c_lower : c_upper) = std::max(2 * k < rhos.size() ? c_lower : c_upper, d * r * r);
          t.rows.push_back({num(n), num(th1), num(r), num(d), num(d * r * r)});
        }
        const std::string suffix = "_n" + std::to_string(n) + "_theta" + label_num(th1);
        // The constant C = sup rho^2 |difference| taken over the lower half of the range also bounds
        // the upper half, so rho^2 |difference| does not grow.
        ctx.at_most("bilaplacian_perturbed", "perturbed_bound" + suffix, c_upper / c_lower, 1.0 + 1e-9,
                    {{"n", n}, {"theta1", th1}, {"C", std::max(c_lower, c_upper)}});
        const double slope = loglog_slope(rhos, diff);
        ctx.at_most("bilaplacian_perturbed", "perturbed_slope" + suffix, std::abs(slope + 2.0), ctx.tol("slope"),
                    {{"n", n}, {"theta1", th1}, {"slope", slope}});
      }
    }
  }
  {
    GroupClock clock(ctx.report, "bilaplacian_oracle");
    auto& t = ctx.table("bilaplacian_oracle", {"n", "rho", "closed_minus", "closed_plus", "oracle"});
    for (int n : ctx.config.dims) {
      if (n > 3) continue;
      const auto spec = cv::conformal_example_metric(n);
      double err_minus = 0.0, err_plus = 0.0;
      for (double r : {1.0, 2.0, 3.0}) {
        const cv::Angles th(n - 1, 0.8);
        const double o = cv::oracle_bilaplacian_rho_squared(spec, r, th);
        const double cm = cv::bilaplacian_perturbed(spec, r, th, {-1.0, 1.0});
        const double cp = cv::bilaplacian_perturbed(spec, r, th, {+1.0, 1.0});
        err_minus = std::max(err_minus, relerr(cm, o));
        err_plus = std::max(err_plus, relerr(cp, o));
        t.rows.push_back({num(n), num(r), num(cm), num(cp), num(o)});
      }
      ctx.at_most("bilaplacian_oracle", tag("codazzi_sign_oracle", n), err_minus, ctx.tol("oracle_rel"),
                  {{"n", n}, {"opposite_sign_rel_err", err_plus}});
    }
  }
}

// ---------------------------------------------------------------------------------------------
// kinematics

void suite_kinematics(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "kinematics");
  const int count = ctx.config.corpus.size;
  auto& t = ctx.table("kinematics", {"rho", "theta", "R", "t", "rho_t", "rho_t_fd", "rho_tt", "rho_tt_fd", "q_t",
                                     "q_t_fd", "q_tt", "q_tt_fd"});
  double worst = 0.0;
  int arg = -1;
  for (int k = 0; k < count; ++k) {
    auto rng = stream(ctx.config.corpus.seed, 1000 + static_cast<std::uint64_t>(k));
    double rho, theta, R, tt;
    HyperboloidPoint x = HyperboloidPoint::origin(2);
    do {
      rho = 0.2 + 3.8 * unit01(rng);
      theta = 2.0 * kPi * unit01(rng);
      R = 0.5 + 4.5 * unit01(rng);
      tt = 0.05 + 0.9 * unit01(rng);
      x = HyperboloidPoint::polar2(rho, theta);
    } while (geometry::hyperbolic_distance(x, geometry::moving_center(2, R, tt).P) < 0.1);
    const auto kin = geometry::moving_center_kinematics(x, R, tt);
    const auto half = geometry::moving_center_half_square(x, R, tt);
    auto d = [&](double s) { return geometry::hyperbolic_distance(x, geometry::moving_center(2, R, s).P); };
    auto q = [&](double s) { return 0.5 * d(s) * d(s); };
    const double h = 1e-3;
    const double fd_t = fd_derivative(d, tt, h), fd_tt = fd_second_derivative(d, tt, h);
    const double fq_t = fd_derivative(q, tt, h), fq_tt = fd_second_derivative(q, tt, h);
    const double e = std::max({relerr(kin.rho_t, fd_t), relerr(kin.rho_tt, fd_tt), relerr(half.q_t, fq_t),
                               relerr(half.q_tt, fq_tt)});
    if (arg < 0 || e > worst) worst = e, arg = k;
    t.rows.push_back({num(rho), num(theta), num(R), num(tt), num(kin.rho_t), num(fd_t), num(kin.rho_tt), num(fd_tt),
                      num(half.q_t), num(fq_t), num(half.q_tt), num(fq_tt)});
  }
  if (count == 0) {
    ctx.warn("kinematics corpus is empty; vacuous pass");
  } else {
    ctx.at_most("kinematics", "kinematics_max_rel_err", worst, ctx.tol("kinematics"), {{"samples", count}},
                ctx.recipe(arg));
  }
}

// ---------------------------------------------------------------------------------------------
// evolution

void suite_evolution(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "evolution");
  const auto& c = ctx.config;
  const int n = c.dims.front();
  if (n != 3) throw DomainError("the eigenfunction test runs on H^3 (n = 3)");
  if (c.physics.initial.kind != "eigenfunction") throw DomainError("the evolution suite needs eigenfunction data");
  if (c.grid.cells % 4 != 0) throw DomainError("grid.cells must be divisible by 4");
  const std::complex<double> z(c.physics.a, c.physics.b);
  auto& t = ctx.table("evolution_convergence", {"cells", "dt", "max_error", "mass_drift"}, true);
  std::vector<double> errors;
  double drift_fine = 0.0;
  for (int level : {c.grid.cells / 4, c.grid.cells / 2, c.grid.cells}) {
    const auto grid = RadialGrid::cell_centered(3, c.grid.rho_max, level);
    const double dt = c.physics.dt * c.grid.cells / level;
    auto params = make_params(c, grid, c.physics.a, c.physics.b, 0.0, dt);
    if (params.V.size() > 0 || params.F) throw DomainError("the eigenfunction test needs V = F = 0");
    const auto u0 = initial_state(c.physics.initial, grid, 0.0);
    if (auto w = evolution::resolution_warning(u0)) ctx.warn(*w);
    const evolution::CrankNicolson cn(grid, 0, params);
    evolution::FieldState u = u0;
    const long steps = std::lround(c.physics.t_final / dt);
    for (long s = 0; s < steps; ++s) u = cn.step(u);
    const double k = c.physics.initial.scale * kPi / grid.rho_max();
    const std::complex<double> factor = std::exp(-z * (1.0 + k * k) * (steps * dt));
    double err = 0.0;
    for (Eigen::Index i = 0; i < u.values.size(); ++i) err = std::max(err, std::abs(u.values[i] - factor * u0.values[i]));
    const double drift = std::abs(evolution::l2_norm(u, grid) - std::abs(factor) * evolution::l2_norm(u0, grid));
    errors.push_back(err);
    drift_fine = drift;
    t.rows.push_back({num(level), num(dt), num(err), num(drift)});
    if (level == c.grid.cells) add_checkpoint(ctx, "evolution_final", u, grid);
  }
  const std::map<std::string, double> params{{"n", 3}, {"t_final", c.physics.t_final}, {"dt", c.physics.dt}};
  ctx.at_most("evolution", "phase_error", errors[2], ctx.tol("phase_error"), params);
  const double p_coarse = std::log2(errors[0] / errors[1]), p_fine = std::log2(errors[1] / errors[2]);
  ctx.at_most("evolution", "order_coarse", std::abs(p_coarse - 2.0), ctx.tol("order"), {{"order", p_coarse}});
  ctx.at_most("evolution", "order_fine", std::abs(p_fine - 2.0), ctx.tol("order"), {{"order", p_fine}});
  ctx.at_most("evolution", "norm_drift", drift_fine, 1e-10, params);
}

// ---------------------------------------------------------------------------------------------
// commutator

void suite_commutator(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "commutator");
  const auto& c = ctx.config;
  const double a = c.physics.a, b = c.physics.b, mod2 = a * a + b * b;
  auto& t = ctx.table("commutator", {"n", "gamma", "index", "ell", "rho_c", "width", "lhs", "rhs", "gap_coarse",
                                     "gap_fine", "reduction", "lower_margin"});
  for (int n : c.dims) {
    for (double gamma : c.physics.gammas) {
      const auto coarse = RadialGrid::cell_centered(n, c.grid.rho_max, c.grid.cells);
      const auto fine = RadialGrid::cell_centered(n, c.grid.rho_max, 2 * c.grid.cells);
      CorpusSpec cs;
      cs.size = c.corpus.size;
      cs.rho_min = 0.2;
      cs.rho_max = c.grid.rho_max - 6.0 * coarse.h;
      cs.margin = 0.1;
      cs.width_lo = 0.5;
      cs.width_hi = 0.8;
      const auto bumps = corpus(c.corpus.seed, cs);
      carleman::WeightSpec w;
      w.kind = carleman::WeightKind::static_quadratic;
      w.gamma = gamma;
      w.n = n;
      struct Row {
        functionals::CommutatorCheck coarse, fine;
        double lower_margin;
      };
      std::vector<Row> rows(bumps.size());
      const double bound = mod2 * gamma * geometry::frak_C(n);
      // One mode at a time keeps a single pair of dense operator sets alive.
      for (int ell = 0; ell < 3; ++ell) {
        const std::array<evolution::DiscreteOperatorPair, 2> pairs{
            evolution::assemble_conjugated(coarse, ell, w, a, b, 0.5),
            evolution::assemble_conjugated(fine, ell, w, a, b, 0.5)};
        std::vector<int> members;
        for (int k = ell; k < static_cast<int>(bumps.size()); k += 3) members.push_back(k);
        parallel_for(static_cast<int>(members.size()), ctx.options.jobs, [&](int m) {
          const int k = members[m];
          Row r{};
          double lower = 1e300;
          for (int level = 0; level < 2; ++level) {
            const RadialGrid& g = level == 0 ? coarse : fine;
            Eigen::VectorXcd f(static_cast<Eigen::Index>(g.size()));
            double norm2 = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
              const double v = carleman::bump_profile(bumps[k], std::abs(g.nodes[i] - bumps[k].rho_c)).g;
              f[static_cast<Eigen::Index>(i)] = v;
              norm2 += g.quad_weights[i] * v * v;
            }
            f /= std::sqrt(norm2);
            const auto chk = functionals::commutator_check(pairs[level], f, g, ell, a, b);
            (level == 0 ? r.coarse : r.fine) = chk;
            lower = std::min(lower, chk.lhs + bound * chk.norm2);
          }
          r.lower_margin = lower;
          rows[k] = r;
        });
      }
      double max_gap = 0.0, min_reduction = 1e300, min_lower = 1e300;
      int arg_gap = -1, arg_red = -1, arg_low = -1;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        const double red = r.coarse.gap / r.fine.gap;
        const int ik = static_cast<int>(k);
        if (arg_gap < 0 || r.coarse.gap > max_gap) max_gap = r.coarse.gap, arg_gap = ik;
        if (r.coarse.gap > 1e-10 && (arg_red < 0 || red < min_reduction)) min_reduction = red, arg_red = ik;
        if (arg_low < 0 || r.lower_margin < min_lower) min_lower = r.lower_margin, arg_low = ik;
        t.rows.push_back({num(n), num(gamma), num(ik), num(ik % 3), num(bumps[k].rho_c), num(bumps[k].width),
                          num(r.coarse.lhs), num(r.coarse.rhs), num(r.coarse.gap), num(r.fine.gap), num(red),
                          num(r.lower_margin)});
      }
      if (bumps.empty()) {
        ctx.warn("commutator corpus is empty; vacuous pass");
        continue;
      }
      const std::map<std::string, double> params{{"n", n}, {"gamma", gamma}, {"a", a}, {"b", b},
                                                 {"cells", c.grid.cells}};
      ctx.at_most("commutator", tag("baseline_gap", n), max_gap, ctx.tol("commutator_gap"), params,
                  ctx.recipe(arg_gap));
      if (arg_red >= 0) {
        ctx.at_least("commutator", tag("gap_reduction", n), min_reduction, ctx.tol("refinement_ratio"), params,
                     ctx.recipe(arg_red));
      }
      ctx.at_least("commutator", tag("lower_bound", n), min_lower, -ctx.tol("lower_bound"), params,
                   ctx.recipe(arg_low));
    }
  }
}

// ---------------------------------------------------------------------------------------------
// gaussian decay and space-time estimate

void suite_gaussian_decay(SuiteContext& ctx) {
  const auto& c = ctx.config;
  if (!(c.physics.a > 0.0)) throw DomainError("gaussian-decay needs a > 0 for the Ginzburg-Landau run");
  auto& t = ctx.table("gaussian_decay", {"n", "gamma", "a", "b", "time", "decay_margin"}, true);
  struct Run {
    double a, b;
    std::string label;
  };
  const std::vector<Run> runs{{1.0, 0.0, "heat"}, {c.physics.a, c.physics.b, "gl"}};
  for (int n : c.dims) {
    const auto grid = RadialGrid::cell_centered(n, c.grid.rho_max, c.grid.cells);
    for (double gamma : c.physics.gammas) {
      for (const auto& run : runs) {
        const auto params = make_params(c, grid, run.a, run.b, gamma, c.physics.dt);
        const auto u0 = initial_state(c.physics.initial, grid, gamma);
        evolution::Trajectory tr;
        {
          GroupClock clock(ctx.report, "gaussian_decay");
          tr = evolution::evolve(u0, grid, params, {}, 1);
          const auto dm = functionals::gaussian_decay_check(tr, grid, params, ctx.tol("decay_margin"));
          for (std::size_t k = 0; k < dm.times.size(); ++k) {
            t.rows.push_back({num(n), num(gamma), num(run.a), num(run.b), num(dm.times[k]), num(dm.margin[k])});
          }
          const std::map<std::string, double> p{{"n", n}, {"gamma", gamma}, {"a", run.a}, {"b", run.b}};
          const std::string name = run.label + "_n" + std::to_string(n) + "_gamma" + label_num(gamma);
          ctx.at_least("gaussian_decay", "decay_margin_" + name, dm.min_margin, -ctx.tol("decay_margin"), p);
          const double ode = functionals::decay_ode_residual(gamma, run.a, run.b, tr.times);
          ctx.at_most("gaussian_decay", "ode_residual_" + name, ode, ctx.tol("ode_residual"), p);
        }
        {
          GroupClock clock(ctx.report, "space_time");
          const auto st = functionals::space_time_estimate_check(tr, grid, params, ctx.tol("space_time"));
          const std::map<std::string, double> p{{"n", n},
                                                {"gamma", gamma},
                                                {"a", run.a},
                                                {"b", run.b},
                                                {"log_lhs", st.log_lhs},
                                                {"log_rhs", st.log_rhs}};
          ctx.at_least("space_time", "space_time_" + run.label + "_n" + std::to_string(n) + "_gamma" + label_num(gamma),
                       st.margin, -ctx.tol("space_time"), p);
        }
      }
    }
  }
  GroupClock clock(ctx.report, "space_time");
  ctx.at_most("space_time", "M3_spot", std::abs(functionals::space_time_M3(0.0, 1.0, 0.0, 3) - 115.0 / 6.0),
              ctx.tol("spot"), {{"M3", functionals::space_time_M3(0.0, 1.0, 0.0, 3)}});
}

// ---------------------------------------------------------------------------------------------
// log-convexity

void suite_convexity(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "convexity");
  const auto& c = ctx.config;
  if (c.physics.F.kind != "zero") throw DomainError("the convexity suite runs with F = 0");
  const int n = c.dims.front();
  const double gamma = c.physics.gammas.front(), sigma = c.weight.sigma;
  struct Run {
    double a, b;
    std::string label;
  };
  const std::vector<Run> runs{{0.0, 1.0, "schrodinger"}, {c.physics.a, c.physics.b, "gl"}};
  auto& t = ctx.table("log_weighted_norm", {"run", "cells", "time", "log_H", "log_H_transfer"}, true);
  for (const auto& run : runs) {
    std::vector<double> n_hat;
    for (int level : {c.grid.cells, 2 * c.grid.cells}) {
      const auto grid = RadialGrid::cell_centered(n, c.grid.rho_max, level);
      const auto params = make_params(c, grid, run.a, run.b, gamma, c.physics.dt * c.grid.cells / level);
      const auto u0 = initial_state(c.physics.initial, grid, gamma);
      const auto tr = evolution::evolve(
          u0, grid, params,
          {{"log_H", [&](const evolution::FieldState& s) { return functionals::weighted_norm(s, grid, gamma); }}}, 1);
      const functionals::WeightedNormSeries series{tr.times, tr.series.at("log_H"), gamma};
      const double M0 = (run.a * run.a + run.b * run.b) * gamma * geometry::frak_C(n);
      const auto verdict = functionals::convexity_report(series, M0, params.M1(), 0.0, ctx.tol("convexity"));
      const auto transfer =
          functionals::log_weight_transfer(tr, grid, sigma, 0.5 * sigma, sigma * (std::log(c.grid.rho_max) + 4.0));
      if (transfer.coverage_warning) ctx.warn("transfer kernel truncation for run " + run.label);
      for (std::size_t k = 0; k < series.times.size(); ++k) {
        t.rows.push_back({run.label, num(level), num(series.times[k]), num(series.log_H[k]),
                          num(transfer.series.log_H[k])});
      }
      const std::map<std::string, double> p{{"n", n}, {"gamma", gamma}, {"a", run.a}, {"b", run.b},
                                            {"cells", level}, {"N_hat", verdict.N_hat},
                                            {"interpolation_gap", verdict.interpolation_gap}};
      const std::string suffix = run.label + "_cells" + std::to_string(level);
      ctx.at_least("convexity", "second_difference_" + suffix, verdict.min_second_difference, -ctx.tol("convexity"), p);
      ctx.at_least("convexity", "transfer_second_difference_" + suffix, transfer.verdict.min_second_difference,
                   -ctx.tol("convexity"), {{"sigma", sigma}, {"cells", level}});
      n_hat.push_back(verdict.N_hat);
    }
    const double scale = std::max(n_hat[0], n_hat[1]);
    const double rel = scale > 0.0 ? std::abs(n_hat[0] - n_hat[1]) / scale : 0.0;
    ctx.at_most("convexity", "n_hat_stability_" + run.label, rel, ctx.tol("n_hat_rel"),
                {{"N_hat_coarse", n_hat[0]}, {"N_hat_fine", n_hat[1]}});
  }
}

// ---------------------------------------------------------------------------------------------
// mollifier

void suite_mollifier(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "mollifier");
  const double R = ctx.config.weight.R;
  const std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  auto phi = [R](const HyperboloidPoint& x) { return geometry::capped_square_distance(x, R); };
  const int count = ctx.config.corpus.size;
  auto& tu = ctx.table("mollifier_upper", {"rho", "theta", "eps", "mollified", "capped", "excess"});
  double worst = -1e300;
  int arg = -1, unconverged = 0;
  for (int k = 0; k < count; ++k) {
    auto rng = stream(ctx.config.corpus.seed, 5000 + static_cast<std::uint64_t>(k));
    const double rho = (R + 1.0) * unit01(rng), theta = 2.0 * kPi * unit01(rng);
    const double eps = eps_list[static_cast<std::size_t>(k) % eps_list.size()];
    const auto x = HyperboloidPoint::polar2(rho, theta);
    const auto m = geometry::mollify_exp(phi, eps, x, 16);
    if (!m.converged) ++unconverged;
    const double excess = m.value - phi(x) - 2.0 * R * eps;
    if (arg < 0 || excess > worst) worst = excess, arg = k;
    tu.rows.push_back({num(rho), num(theta), num(eps), num(m.value), num(phi(x)), num(excess)});
  }
  if (unconverged > 0) ctx.warn(std::to_string(unconverged) + " mollifier evaluations did not converge");
  if (count == 0) {
    ctx.warn("mollifier corpus is empty; upper bound vacuous");
  } else {
    ctx.at_most("mollifier", "upper_bound_excess", worst, ctx.tol("mollifier_upper"), {{"R", R}, {"C_R", 2.0 * R}},
                ctx.recipe(arg));
  }
  // Gradient structure on points away from the cap, where Phi_R = d^2.
  auto& tg = ctx.table("mollifier_gradient", {"eps", "sup_defect", "empirical_C"}, true);
  std::vector<double> sups;
  for (double eps : eps_list) {
    double sup = -1e300;
    for (int k = 0; k < 20; ++k) {
      const auto x = HyperboloidPoint::polar2(0.3 + (R - 1.0 - 0.3) * k / 19.0, 0.37 * k);
      auto Fe = [&](const HyperboloidPoint& y) { return geometry::mollify_exp_fixed(phi, eps, y, 16); };
      sup = std::max(sup, geometry::gradient_norm_squared(Fe, x, 1e-2) - 4.0 * Fe(x));
    }
    sups.push_back(std::abs(sup));
    tg.rows.push_back({num(eps), num(sup), num(sup / (eps * eps))});
  }
  const double slope = loglog_slope(eps_list, sups);
  ctx.at_most("mollifier", "gradient_eps2_slope", std::abs(slope - 2.0), ctx.tol("mollifier_slope"),
              {{"slope", slope}, {"empirical_C", sups.back() / (eps_list.back() * eps_list.back())}});
}

// ---------------------------------------------------------------------------------------------
// Carleman

namespace {

carleman::WeightSpec weight_spec(const ExperimentConfig& c) {
  carleman::WeightSpec w;
  w.kind = carleman::parse_kind(c.weight.kind);
  w.mu = c.weight.mu;
  w.eps = c.weight.eps;
  w.R = c.weight.R;
  w.ell = c.weight.ell;
  w.gamma = c.physics.gammas.front();
  w.n = 2;
  return w;
}

void run_carleman(SuiteContext& ctx, carleman::EvolutionOperator op) {
  const auto& c = ctx.config;
  const auto w = weight_spec(c);
  const bool schr = op == carleman::EvolutionOperator::schrodinger;
  if (w.kind != (schr ? carleman::WeightKind::schrodinger_moving : carleman::WeightKind::heat_moving)) {
    throw DomainError("weight kind does not match the evolution operator");
  }
  if (!carleman::hypothesis_ok(w)) {
    throw HypothesisError("R = " + num(w.R) + " does not exceed 4 mu eps^{-1/2} frak_C_2 = " +
                          num(carleman::moving_threshold(w)));
  }
  const auto grid = evolution::polar_grid2d(c.grid.rho_max, c.grid.cells, c.grid.angular_cells);
  CorpusSpec cs;
  cs.size = c.corpus.size;
  cs.rho_min = 0.0;
  cs.rho_max = c.grid.rho_max - 6.0 * grid.radial.h;
  cs.margin = 0.1;
  const auto bumps = corpus(c.corpus.seed, cs);
  struct Row {
    carleman::CarlemanRatio ratio;
    carleman::VirialGap virial;
  };
  std::vector<Row> rows(bumps.size());
  {
    GroupClock clock(ctx.report, "carleman");
    parallel_for(static_cast<int>(bumps.size()), ctx.options.jobs, [&](int k) {
      rows[k].ratio = carleman::carleman_ratio(w, bumps[k], op);
      const auto f = carleman::sample_bump(bumps[k], grid, bumps[k].t_c);
      rows[k].virial = carleman::virial_lower_bound_check(w, f, grid, op, bumps[k].t_c);
    });
  }
  auto& t = ctx.table(schr ? "carleman" : "carleman_heat",
                      {"index", "rho_c", "theta_c", "t_c", "width", "t_width", "ratio", "virial_lhs", "virial_rhs",
                       "virial_gap"});
  double min_ratio = 1e300, min_gap = 1e300;
  int arg_r = -1, arg_v = -1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& b = bumps[k];
    const auto& r = rows[k];
    const int ik = static_cast<int>(k);
    if (arg_r < 0 || r.ratio.ratio < min_ratio) min_ratio = r.ratio.ratio, arg_r = ik;
    if (arg_v < 0 || r.virial.gap < min_gap) min_gap = r.virial.gap, arg_v = ik;
    t.rows.push_back({num(ik), num(b.rho_c), num(b.theta_c), num(b.t_c), num(b.width), num(b.t_width),
                      num(r.ratio.ratio), num(r.virial.lhs), num(r.virial.rhs), num(r.virial.gap)});
  }
  const std::map<std::string, double> params{{"mu", w.mu}, {"eps", w.eps}, {"R", w.R},
                                             {"threshold", carleman::moving_threshold(w)}};
  const std::string label = schr ? "schrodinger" : "heat";
  if (bumps.empty()) {
    ctx.warn("Carleman corpus is empty; vacuous pass");
  } else {
    ctx.at_least("carleman", "min_ratio_" + label, min_ratio, 1.0 - ctx.tol("carleman_ratio"), params,
                 ctx.recipe(arg_r));
    ctx.at_least("carleman", "min_virial_gap_" + label, min_gap, -ctx.tol("virial"), params, ctx.recipe(arg_v));
  }
  {
    GroupClock clock(ctx.report, "carleman_frontier");
    const std::vector<carleman::TestBump> head(bumps.begin(), bumps.begin() + std::min<std::size_t>(3, bumps.size()));
    const auto frontier = carleman::feasibility_frontier({0.5, 1.0, 2.0}, {0.5, 1.0}, {0.5, 1.0, 2.0}, head, op);
    auto& tf = ctx.table(schr ? "frontier" : "frontier_heat", {"mu", "eps", "R", "min_ratio", "hypothesis_ok"}, true);
    for (const auto& cell : frontier) {
      tf.rows.push_back({num(cell.mu), num(cell.eps), num(cell.R), num(cell.min_ratio), cell.hypothesis_ok ? "1" : "0"});
    }
  }
}

}  // namespace

void suite_carleman(SuiteContext& ctx) { run_carleman(ctx, carleman::EvolutionOperator::schrodinger); }

void suite_carleman_heat(SuiteContext& ctx) { run_carleman(ctx, carleman::EvolutionOperator::heat); }

void suite_carleman_qlog(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "carleman_qlog");
  const auto& c = ctx.config;
  auto w = weight_spec(c);
  if (w.kind != carleman::WeightKind::quadratic_log) throw DomainError("carleman-qlog needs the quadratic_log weight");
  const double threshold = carleman::quadratic_log_mu_threshold(w);
  if (c.weight.mu == 0.0) w.mu = threshold;

  double identity = 0.0;
  auto& ti = ctx.table("q_exponent", {"ell", "log_R", "Q", "identity_residual"}, true);
  for (int ell : {1, 2, 3}) {
    for (double logR = 3.0; logR <= 10.0 + 1e-12; logR += 0.5) {
      const auto q = asymptotics::q_exponent(ell, std::exp(logR));
      identity = std::max(identity, q.identity_residual);
      ti.rows.push_back({num(ell), num(logR), num(q.Q), num(q.identity_residual)});
    }
  }
  ctx.at_most("carleman_qlog", "exponent_identity", identity, ctx.tol("identity"));

  std::vector<double> R_list;
  for (double logR = 3.0; logR <= 8.0 + 1e-12; logR += 0.5) R_list.push_back(std::exp(logR));
  const auto mm = carleman::mystery_inequality_check(w.ell, R_list, 1.0);
  auto& tm = ctx.table("log_F_margin", {"R", "log_F", "margin", "direct_margin"}, true);
  double min_margin = 1e300, min_direct = 1e300;
  for (const auto& m : mm) {
    min_margin = std::min(min_margin, m.margin);
    min_direct = std::min(min_direct, m.direct_margin);
    tm.rows.push_back({num(m.R), num(m.log_F), num(m.margin), num(m.direct_margin)});
  }
  ctx.at_least("carleman_qlog", "F_margin", min_margin, 0.0, {{"ell", w.ell}});
  ctx.at_least("carleman_qlog", "F_margin_direct", min_direct, 0.0, {{"ell", w.ell}});

  CorpusSpec cs;
  cs.size = c.corpus.size;
  cs.rho_min = w.rho0;
  cs.rho_max = 4.0;
  cs.margin = 0.1;
  const auto bumps = corpus(c.corpus.seed, cs);
  std::vector<carleman::QuadraticLogRatio> ratios(bumps.size());
  parallel_for(static_cast<int>(bumps.size()), ctx.options.jobs,
               [&](int k) { ratios[k] = carleman::quadratic_log_ratio(w, bumps[k]); });
  auto& tr = ctx.table("qlog_ratio", {"index", "rho_c", "theta_c", "t_c", "ratio"});
  double min_ratio = 1e300;
  int arg = -1;
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    if (arg < 0 || ratios[k].ratio < min_ratio) min_ratio = ratios[k].ratio, arg = static_cast<int>(k);
    tr.rows.push_back({num(static_cast<int>(k)), num(bumps[k].rho_c), num(bumps[k].theta_c), num(bumps[k].t_c),
                       num(ratios[k].ratio)});
  }
  if (bumps.empty()) {
    ctx.warn("quadratic-log corpus is empty; vacuous pass");
  } else {
    ctx.at_least("carleman_qlog", "min_ratio", min_ratio, 1.0 - ctx.tol("carleman_ratio"),
                 {{"mu", w.mu}, {"mu_threshold", threshold}, {"R", w.R}, {"ell", w.ell}}, ctx.recipe(arg));
  }
}

// ---------------------------------------------------------------------------------------------
// Laplace asymptotics

void suite_asymptotics(SuiteContext& ctx) {
  GroupClock clock(ctx.report, "asymptotics");
  const double sigma = ctx.config.weight.sigma;
  const double g0 = asymptotics::default_gamma0(sigma);
  auto& t = ctx.table("laplace", {"rho", "ratio", "fitted_prefactor", "reference_prefactor", "gamma0_shift"}, true);
  std::vector<double> devs;
  double max_shift = 0.0;
  for (double rho : {10.0, 25.0, 50.0, 100.0, 200.0}) {
    const auto probe = asymptotics::laplace_probe(sigma, rho, g0);
    const double ratio = std::exp(probe.log_I - probe.log_ref);
    const double fitted = std::exp(probe.log_I - (sigma * rho * rho * std::log(rho) - sigma * rho)) * std::sqrt(rho);
    const double shift = std::abs(probe.log_I - asymptotics::laplace_integral_log(sigma, rho, 0.5 * g0));
    if (rho >= 25.0 && rho <= 100.0) max_shift = std::max(max_shift, shift);
    t.rows.push_back({num(rho), num(ratio), num(fitted), num(std::sqrt(2.0 * kPi * sigma)), num(shift)});
    if (rho == 25.0 || rho == 50.0 || rho == 100.0) devs.push_back(std::abs(ratio - 1.0));
  }
  ctx.at_most("asymptotics", "ratio_at_50", devs[1], ctx.tol("laplace"), {{"sigma", sigma}, {"rho", 50.0}});
  const double increase = std::max(devs[1] - devs[0], devs[2] - devs[1]);
  ctx.at_most("asymptotics", "deviation_decreasing", increase, 0.0,
              {{"dev_25", devs[0]}, {"dev_50", devs[1]}, {"dev_100", devs[2]}});
  ctx.at_most("asymptotics", "gamma0_insensitivity", max_shift, ctx.tol("gamma0"), {{"sigma", sigma}});
}

}  // namespace hyperlab::runner
