#include "hyperlab/functionals.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <limits>

#include "hyperlab/common.hpp"
#include "hyperlab/quadrature.hpp"

namespace hyperlab::functionals {

using evolution::FieldState;
using geometry::RadialGrid;

double sphere_area(int n) {
  if (n < 1) throw DomainError("sphere dimension must be >= 0");
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double weighted_norm(const FieldState& state, const RadialGrid& grid, double gamma) {
  if (state.values.size() == 0) throw DomainError("weighted_norm of an empty state");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  if (static_cast<std::size_t>(state.values.size()) != grid.size()) throw GridError("state does not match the grid");
  LogAccumulator acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = std::norm(state.values[i]);
    if (m == 0.0) continue;
    const double rho = grid.nodes[i];
    acc.add(std::log(grid.quad_weights[i] * m) + 2.0 * gamma * rho * rho);
  }
  const double v = acc.value();
  return v == kNegInf ? v : v + std::log(sphere_area(grid.n));
}

ConvexityVerdict convexity_report(const WeightedNormSeries& s, double M0, double M1, double M2, double tol_conv) {
  const std::size_t m = s.times.size();
  if (m < 5 || s.log_H.size() != m) throw DomainError("convexity_report needs at least 5 matching samples");
  for (std::size_t k = 1; k < m; ++k) {
    if (!(s.times[k] > s.times[k - 1])) throw DomainError("series times must be increasing");
  }
  for (double v : s.log_H) {
    if (!std::isfinite(v)) throw DomainError("series contains a non-finite log H");
  }
  ConvexityVerdict v;
  v.min_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double hl = s.times[k] - s.times[k - 1], hr = s.times[k + 1] - s.times[k];
    const double d2 = 2.0 * ((s.log_H[k + 1] - s.log_H[k]) / hr - (s.log_H[k] - s.log_H[k - 1]) / hl) / (hl + hr);
    v.min_second_difference = std::min(v.min_second_difference, d2);
  }
  const double t0 = s.times.front(), span = s.times.back() - t0;
  v.interpolation_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double u = (s.times[k] - t0) / span;
    v.interpolation_gap = std::max(v.interpolation_gap, s.log_H[k] - ((1.0 - u) * s.log_H.front() + u * s.log_H.back()));
  }
  const double budget = M0 + M1 + M2 + M1 * M1 + M2 * M2;
  const double excess = std::max(v.interpolation_gap, 0.0);
  v.N_hat = excess == 0.0 ? 0.0 : (budget > 0.0 ? excess / budget : std::numeric_limits<double>::infinity());
  v.pass = v.min_second_difference >= -tol_conv;
  return v;
}

namespace {

template <class T>
T decay_rate_t(double gamma, double a, double b, T t) {
  return gamma * a / (a + 4.0 * gamma * (a * a + b * b) * t);
}

// sqrt of sum_i vol_i |u_i|^2 e^{2 alpha rho_i^2} |S^{n-1}|, in log space.
double log_weighted_l2(const Eigen::VectorXcd& u, const RadialGrid& grid, double alpha) {
  LogAccumulator acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = std::norm(u[i]);
    if (m == 0.0) continue;
    acc.add(std::log(grid.quad_weights[i] * m) + 2.0 * alpha * grid.nodes[i] * grid.nodes[i]);
  }
  const double v = acc.value();
  return v == kNegInf ? v : 0.5 * (v + std::log(sphere_area(grid.n)));
}

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

void require_states(const evolution::Trajectory& tr) {
  if (tr.states.size() != tr.times.size() || tr.states.empty()) {
    throw DomainError("trajectory must carry the state at every recorded time");
  }
}

}  // namespace

double decay_rate(double gamma, double a, double b, double t) { return decay_rate_t(gamma, a, b, t); }

double decay_ode_residual(double gamma, double a, double b, const std::vector<double>& times) {
  if (!(a > 0.0)) throw DomainError("the decay rate needs a > 0");
  constexpr double h = 1e-30;
  double worst = 0.0;
  for (double t : times) {
    const double d = decay_rate_t(gamma, a, b, std::complex<double>(t, h)).imag() / h;
    const double alpha = decay_rate(gamma, a, b, t);
    const double rhs = -4.0 * (a + b * b / a) * alpha * alpha;
    worst = std::max(worst, std::abs(d - rhs) / std::max(std::abs(d), 1e-300));
  }
  return worst;
}

DecayMargin gaussian_decay_check(const evolution::Trajectory& tr, const RadialGrid& grid,
                                 const evolution::EvolutionParams& p, double tol) {
  if (!(p.a > 0.0)) throw DomainError("gaussian_decay_check needs a > 0");
  require_states(tr);
  double v_sup = 0.0;
  for (Eigen::Index i = 0; i < p.V.size(); ++i) {
    v_sup = std::max(v_sup, std::abs(std::max(p.a * p.V[i].real(), 0.0) - p.b * p.V[i].imag()));
  }
  const double log_u0 = log_weighted_l2(tr.states.front().values, grid, p.gamma);
  const double modulus = std::hypot(p.a, p.b);
  DecayMargin out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    const double alpha = decay_rate(p.gamma, p.a, p.b, t);
    const double log_lhs = log_weighted_l2(tr.states[k].values, grid, alpha);
    // L^1 in time of ||e^{alpha(t) rho^2} F(s)|| over the recorded s <= t, trapezoid.
    double log_forcing = kNegInf;
    if (p.F && k > 0) {
      LogAccumulator acc;
      for (std::size_t j = 0; j <= k; ++j) {
        const double w = 0.5 * ((j > 0 ? tr.times[j] - tr.times[j - 1] : 0.0) + (j < k ? tr.times[j + 1] - tr.times[j] : 0.0));
        const double l = log_weighted_l2(p.F(tr.times[j]), grid, alpha);
        if (w > 0.0 && l != kNegInf) acc.add(std::log(w) + l);
      }
      log_forcing = acc.value();
    }
    const double log_rhs = v_sup * t + log_add(log_u0, log_forcing == kNegInf ? kNegInf : std::log(modulus) + log_forcing);
    const double margin = log_lhs == kNegInf ? std::numeric_limits<double>::infinity() : log_rhs - log_lhs;
    out.times.push_back(t);
    out.margin.push_back(margin);
    out.min_margin = std::min(out.min_margin, margin);
  }
  out.pass = out.min_margin >= -tol;
  return out;
}

CommutatorCheck commutator_check(const evolution::DiscreteOperatorPair& pair, const Eigen::VectorXcd& f,
                                 const RadialGrid& grid, int ell, double a, double b) {
  const int m = static_cast<int>(grid.size());
  if (f.size() != m || pair.S_mat.rows() != m) throw GridError("vector or operators do not match the grid");
  const double fmax = f.cwiseAbs().maxCoeff();
  for (int i = std::max(0, m - 5); i < m; ++i) {
    if (std::abs(f[i]) > 1e-14 * fmax) throw SupportError("test vector reaches the outer 5 cells");
  }
  CommutatorCheck out;
  auto inner = [&](const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < m; ++i) acc += pair.vol[i] * x[i] * std::conj(y[i]);
    return acc;
  };
  out.norm2 = inner(f, f).real();
  // (S_t + S A - A S) f by matrix-vector products only.
  const Eigen::VectorXcd Cf =
      pair.S_t_mat * f + pair.S_mat * (pair.A_mat * f) - pair.A_mat * (pair.S_mat * f);
  out.lhs = inner(Cf, f).real();

  const carleman::RadialWeight w = carleman::radial_weight(pair.weight, pair.t);
  const int n = grid.n;
  const double mod2 = a * a + b * b;
  const double ang = static_cast<double>(ell) * (ell + n - 2);
  double rhs = 0.0;
  for (int i = 0; i < m; ++i) {
    const double rho = grid.nodes[i], f2 = std::norm(f[i]);
    const double hess_grad = 32.0 * w.kappa * w.kappa * w.kappa * rho * rho;
    const double bilap = w.kappa * geometry::bilaplacian_rho_squared(n, rho);
    const double tangential = 8.0 * w.kappa * (1.0 + rho_coth_minus_one(rho)) * ang * csch2_safe(rho);
    const double time = 4.0 * a * 4.0 * w.kappa * w.kappa_t * rho * rho + w.kappa_tt * rho * rho + w.beta_tt;
    rhs += grid.quad_weights[i] * (mod2 * (hess_grad - bilap + tangential) + time) * f2;
  }
  // Radial gradient terms on the faces, including the Dirichlet ghost face.
  for (int i = 0; i < m; ++i) {
    const double face = grid.faces[i + 1];
    const std::complex<double> right = i + 1 < m ? f[i + 1] : 0.0;
    const std::complex<double> df = (right - f[i]) / grid.h;
    const std::complex<double> fmid = 0.5 * (right + f[i]);
    const double area = std::pow(std::sinh(face), n - 1) * grid.h;
    rhs += area * (mod2 * 8.0 * w.kappa * std::norm(df) + 4.0 * b * 2.0 * w.kappa_t * face * (df * std::conj(fmid)).imag());
  }
  out.rhs = rhs;
  out.gap = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.rhs));
  return out;
}

double space_time_M3(double M1, double a, double b, int n) {
  return (M1 * M1 + 1.0 / 6.0 + 2.0 * geometry::frak_C(n)) * (a * a + b * b) + 3.0;
}

double space_time_M4(double a, double b) { return 7.0 / 6.0 * (a * a + b * b); }

SpaceTimeMargin space_time_estimate_check(const evolution::Trajectory& tr, const RadialGrid& grid,
                                          const evolution::EvolutionParams& p, double tol) {
  require_states(tr);
  if (std::abs(tr.times.front()) > 1e-12 || std::abs(tr.times.back() - 1.0) > 1e-9) {
    throw DomainError("space-time estimate needs a trajectory covering [0, 1]");
  }
  const int n = grid.n, m = static_cast<int>(grid.size());
  const double g = p.gamma, mod2 = p.a * p.a + p.b * p.b;
  const double log_area = std::log(sphere_area(n));
  LogAccumulator lhs;
  double log_sup_u = kNegInf, log_sup_F = kNegInf;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    const double wt = 0.5 * ((k > 0 ? t - tr.times[k - 1] : 0.0) + (k + 1 < tr.times.size() ? tr.times[k + 1] - t : 0.0));
    const Eigen::VectorXcd& u = tr.states[k].values;
    const int ell = tr.states[k].mode_ell;
    const double ang = static_cast<double>(ell) * (ell + n - 2);
    log_sup_u = std::max(log_sup_u, 2.0 * log_weighted_l2(u, grid, g));
    if (p.F) log_sup_F = std::max(log_sup_F, 2.0 * log_weighted_l2(p.F(t), grid, g));
    const double tw = t * (1.0 - t) * wt;
    if (tw <= 0.0 || g == 0.0) continue;
    const double c_grad = std::log(2.0 * g * mod2 * tw), c_pot = std::log(16.0 * g * g * g * mod2 * tw);
    for (int i = 0; i < m; ++i) {
      const double rho = grid.nodes[i], u2 = std::norm(u[i]);
      if (u2 == 0.0) continue;
      const double lv = std::log(grid.quad_weights[i] * u2) + 2.0 * g * rho * rho;
      lhs.add(c_pot + lv + std::log(rho * rho * (2.0 + rho_coth_minus_one(rho))));
      if (ang > 0.0) lhs.add(c_grad + lv + std::log(ang * csch2_safe(rho)));
      const double face = grid.faces[i + 1];
      const std::complex<double> right = i + 1 < m ? u[i + 1] : 0.0;
      const double d2 = std::norm((right - u[i]) / grid.h);
      if (d2 > 0.0) lhs.add(c_grad + std::log(std::pow(std::sinh(face), n - 1) * grid.h * d2) + 2.0 * g * face * face);
    }
  }
  SpaceTimeMargin out;
  out.log_lhs = lhs.value() == kNegInf ? kNegInf : lhs.value() + log_area;
  const double M3 = space_time_M3(p.M1(), p.a, p.b, n), M4 = space_time_M4(p.a, p.b);
  out.log_rhs = log_add(std::log(M3) + log_sup_u, log_sup_F == kNegInf ? kNegInf : std::log(M4) + log_sup_F);
  out.margin = out.log_lhs == kNegInf ? std::numeric_limits<double>::infinity() : out.log_rhs - out.log_lhs;
  out.pass = out.margin >= -tol;
  return out;
}

namespace {

double kernel_exponent(double gamma, double rho, double sigma) {
  return std::log(2.0) + 2.0 * gamma * rho * rho - sigma * std::exp(2.0 * gamma / sigma);
}

}  // namespace

double transfer_kernel_log(double rho, double sigma, double gamma0, double gamma_max, int panels) {
  if (!(sigma > 0.0) || !(gamma_max > gamma0)) throw DomainError("transfer kernel needs sigma > 0 and gamma_max > gamma0");
  const QuadratureRule q = composite_gauss_legendre(16, panels, gamma0, gamma_max);
  LogAccumulator acc;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) acc.add(std::log(q.weights[k]) + kernel_exponent(q.nodes[k], rho, sigma));
  return acc.value();
}

double transfer_kernel_log_exact(double rho, double sigma, double gamma0) {
  // w = e^{2 gamma / sigma}: integral = sigma^{1 - s} Gamma(s) Q(s, sigma w0) with s = sigma rho^2.
  const double s = sigma * rho * rho;
  const double x0 = sigma * std::exp(2.0 * gamma0 / sigma);
  return (1.0 - s) * std::log(sigma) + std::lgamma(s) + std::log(boost::math::gamma_q(s, x0));
}

TransferResult log_weight_transfer(const evolution::Trajectory& tr, const RadialGrid& grid, double sigma,
                                   double gamma0, double gamma_max) {
  require_states(tr);
  TransferResult out;
  out.series.gamma = sigma;
  std::vector<double> log_k(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    log_k[i] = transfer_kernel_log(grid.nodes[i], sigma, gamma0, gamma_max);
    out.tail_fraction = std::max(out.tail_fraction, std::exp(kernel_exponent(gamma_max, grid.nodes[i], sigma) - log_k[i]));
  }
  out.coverage_warning = out.tail_fraction > 1e-8;
  const double log_area = std::log(sphere_area(grid.n));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    LogAccumulator acc;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double m = std::norm(tr.states[k].values[i]);
      if (m > 0.0) acc.add(std::log(grid.quad_weights[i] * m) + log_k[i]);
    }
    out.series.times.push_back(tr.times[k]);
    out.series.log_H.push_back(acc.value() + log_area);
  }
  if (out.series.times.size() >= 5) out.verdict = convexity_report(out.series, 0.0, 0.0, 0.0);
  return out;
}

WeightedNormSeries transfer_from_family(const std::vector<WeightedNormSeries>& family, double sigma) {
  if (family.size() < 2) throw DomainError("transfer needs at least two gamma values");
  const std::size_t m = family.front().times.size();
  WeightedNormSeries out;
  out.gamma = sigma;
  out.times = family.front().times;
  for (std::size_t k = 0; k < m; ++k) {
    LogAccumulator acc;
    for (std::size_t j = 0; j < family.size(); ++j) {
      if (family[j].log_H.size() != m) throw DomainError("family series differ in length");
      const double gj = family[j].gamma;
      const double w = 0.5 * ((j > 0 ? gj - family[j - 1].gamma : 0.0) +
                              (j + 1 < family.size() ? family[j + 1].gamma - gj : 0.0));
      acc.add(std::log(w) + std::log(2.0) - sigma * std::exp(2.0 * gj / sigma) + family[j].log_H[k]);
    }
    out.log_H.push_back(acc.value());
  }
  return out;
}

}  // namespace hyperlab::functionals
