#include "hyperlab/carleman.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hyperlab/asymptotics.hpp"
#include "hyperlab/common.hpp"
#include "hyperlab/quadrature.hpp"

namespace hyperlab::carleman {

using geometry::HyperboloidPoint;
using geometry::hyperbolic_distance;
using geometry::minkowski;

std::string kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::static_quadratic: return "static_quadratic";
    case WeightKind::schrodinger_moving: return "schrodinger_moving";
    case WeightKind::heat_moving: return "heat_moving";
    case WeightKind::quadratic_log: return "quadratic_log";
  }
  return "unknown";
}

WeightKind parse_kind(const std::string& name) {
  for (WeightKind k : {WeightKind::static_quadratic, WeightKind::schrodinger_moving, WeightKind::heat_moving,
                       WeightKind::quadratic_log}) {
    if (kind_name(k) == name) return k;
  }
  throw DomainError("unknown weight kind '" + name + "'");
}

void validate(const WeightSpec& s) {
  if (!(s.mu > 0.0)) throw DomainError("weight mu must be positive");
  if (!(s.eps > 0.0)) throw DomainError("weight eps must be positive");
  if (!(s.R > 0.0)) throw DomainError("weight R must be positive");
  if (!(s.gamma >= 0.0)) throw DomainError("weight gamma must be >= 0");
  if (s.ell < 1) throw DomainError("weight ell must be >= 1");
  if (s.n < 2) throw DomainError("weight dimension must be >= 2");
  if (!(s.rho0 > 0.0)) throw DomainError("weight rho0 must be positive");
}

bool is_radial(WeightKind kind) { return kind == WeightKind::static_quadratic || kind == WeightKind::quadratic_log; }

double moving_threshold(const WeightSpec& s) { return 4.0 * s.mu / std::sqrt(s.eps) * geometry::frak_C(s.n); }

namespace {

// S(u) = 35u^4 - 84u^5 + 70u^6 - 20u^7 and derivatives.
double smoothstep(double u, int d) {
  switch (d) {
    case 0: return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
    case 1: return 140.0 * std::pow(u * (1.0 - u), 3);
    default: return 420.0 * u * u * (1.0 - u) * (1.0 - u) * (1.0 - 2.0 * u);
  }
}

}  // namespace

double time_bump(double t, int d) {
  if (d < 0 || d > 2) throw DomainError("time_bump supports derivatives 0..2");
  if (t <= 0.125 || t >= 0.875) return 0.0;
  if (t >= 0.25 && t <= 0.75) return d == 0 ? 3.0 : 0.0;
  const bool rising = t < 0.5;
  const double u = rising ? 8.0 * (t - 0.125) : 8.0 * (0.875 - t);
  const double scale = d == 0 ? 3.0 : (d == 1 ? 24.0 * (rising ? 1.0 : -1.0) : 192.0);
  return scale * smoothstep(u, d);
}

double time_bump_dtt_sup() {
  // |S''| peaks at u = 1/2 -+ 1/sqrt(20) with value 420 * 2 / (25 sqrt 20); 192 = 3 * 8^2 carries the amplitude.
  return 192.0 * 420.0 * 2.0 / (25.0 * std::sqrt(20.0));
}

double quadratic_log_mu_threshold(const WeightSpec& s) {
  const double Q = asymptotics::q_exponent(s.ell, s.R).Q;
  const double F = geometry::frak_C(s.n);
  const double first = std::sqrt(F) * s.R * s.R / (4.0 * s.rho0);
  const double second = std::pow(time_bump_dtt_sup() / (8.0 * s.rho0 * s.rho0), 1.0 / (3.0 - Q)) * s.R * s.R *
                        std::log(s.R) / s.ell;
  return std::max(first, second);
}

bool hypothesis_ok(const WeightSpec& s) {
  switch (s.kind) {
    case WeightKind::static_quadratic: return s.gamma >= 0.0;
    case WeightKind::schrodinger_moving:
    case WeightKind::heat_moving: return s.R > moving_threshold(s);
    case WeightKind::quadratic_log: return s.mu >= quadratic_log_mu_threshold(s);
  }
  return false;
}

RadialWeight radial_weight(const WeightSpec& s, double t) {
  RadialWeight w;
  if (s.kind == WeightKind::static_quadratic) {
    w.kappa = s.gamma;
  } else if (s.kind == WeightKind::quadratic_log) {
    const double muQ = std::pow(s.mu, asymptotics::q_exponent(s.ell, s.R).Q);
    w.kappa = s.mu / (s.R * s.R);
    w.beta = muQ * time_bump(t, 0);
    w.beta_t = muQ * time_bump(t, 1);
    w.beta_tt = muQ * time_bump(t, 2);
  } else {
    throw DomainError("moving-center weights are not radial");
  }
  return w;
}

namespace {

// beta(t) of the moving weights and its first two derivatives.
std::array<double, 3> moving_beta(const WeightSpec& s, double t) {
  const double k = (1.0 + s.eps) * s.R * s.R / (16.0 * s.mu);
  std::array<double, 3> b{-k * t * (1.0 - t), -k * (1.0 - 2.0 * t), 2.0 * k};
  if (s.kind == WeightKind::heat_moving) {
    const double c = s.R * s.R / 6.0;
    b[0] += c * t * (1.0 - t) * (1.0 - 2.0 * t);
    b[1] += c * (1.0 - 6.0 * t + 6.0 * t * t);
    b[2] += c * (12.0 * t - 6.0);
  }
  return b;
}

double rho_over_sinh(double rho) { return rho < 1e-4 ? 1.0 - rho * rho / 6.0 : rho / std::sinh(rho); }

}  // namespace

WeightJet weight_jet(const WeightSpec& s, const HyperboloidPoint& x, double t) {
  if (is_radial(s.kind)) {
    const RadialWeight w = radial_weight(s, t);
    const double rho = hyperbolic_distance(x, HyperboloidPoint::origin(x.dim()));
    const double r2 = rho * rho;
    return {w.kappa * r2 + w.beta, w.kappa_t * r2 + w.beta_t, w.kappa_tt * r2 + w.beta_tt};
  }
  const auto hs = geometry::moving_center_half_square(x, s.R, t);
  const auto b = moving_beta(s, t);
  return {2.0 * s.mu * hs.q + b[0], 2.0 * s.mu * hs.q_t + b[1], 2.0 * s.mu * hs.q_tt + b[2]};
}

double weight_eval(const WeightSpec& s, const HyperboloidPoint& x, double t) { return weight_jet(s, x, t).phi; }

ProfileJet bump_profile(const TestBump& b, double s) {
  const double L = b.radius();
  if (s >= L) return {0.0, 0.0, 0.0, 0.0};
  const double w2 = b.width * b.width, L2 = L * L;
  const double E = std::exp(-s * s / (2.0 * w2));
  const double u = 1.0 - s * s / L2;
  const double u5 = std::pow(u, 5), C = u5 * u;
  // g = E C; g' = s E (-C / w^2 - 12 u^5 / L^2).
  const double bracket = -C / w2 - 12.0 * u5 / L2;
  const double g1 = s * E * bracket;
  const double ratio = s < 1e-4 ? 1.0 - s * s / 6.0 : s / std::sinh(s);
  // g'' = E [bracket + s (-s/w^2) bracket + s (-C'/w^2 - 60 u^4 u'/L^2)], u' = -2s/L^2, C' = 6 u^5 u'.
  const double up = -2.0 * s / L2;
  const double dbracket = -6.0 * u5 * up / w2 - 60.0 * std::pow(u, 4) * up / L2;
  const double g2 = E * (bracket - s * s / w2 * bracket + s * dbracket);
  return {E * C, g1, ratio * E * bracket, g2};
}

std::pair<double, double> bump_time(const TestBump& b, double t) {
  const double tau = t - b.t_c, Lt = b.t_radius();
  if (std::abs(tau) >= Lt) return {0.0, 0.0};
  const double w2 = b.t_width * b.t_width;
  const double E = std::exp(-tau * tau / (2.0 * w2));
  const double u = 1.0 - tau * tau / (Lt * Lt);
  const double u5 = std::pow(u, 5);
  return {E * u5 * u, E * tau * (-u5 * u / w2 - 12.0 * u5 / (Lt * Lt))};
}

std::complex<double> bump_value(const TestBump& b, const HyperboloidPoint& x, double t) {
  const double s = hyperbolic_distance(x, b.center());
  return b.amplitude * bump_profile(b, s).g * bump_time(b, t).first;
}

bool bump_inside(const TestBump& b, double rho_min, double rho_max, double margin, double margin_t) {
  return b.rho_c - b.radius() >= rho_min + margin && b.rho_c + b.radius() <= rho_max - margin &&
         b.t_c - b.t_radius() >= margin_t && b.t_c + b.t_radius() <= 1.0 - margin_t;
}

namespace {

// Weight data shared by all points of one time slice: phi = 2 kappa q(x, P) + beta, q = d(x, P)^2 / 2.
struct Slice {
  HyperboloidPoint P;
  Eigen::VectorXd Pdot;  // zero for radial weights
  double kappa;
  double beta_t;
};

Slice make_slice(const WeightSpec& s, double t) {
  if (is_radial(s.kind)) {
    const RadialWeight w = radial_weight(s, t);
    return {HyperboloidPoint::origin(2), Eigen::VectorXd::Zero(3), w.kappa, w.beta_t};
  }
  const auto mc = geometry::moving_center(2, s.R, t);
  return {mc.P, mc.velocity, s.mu, moving_beta(s, t)[1]};
}

struct PointEval {
  std::complex<double> value;  // conjugated operator applied to f
  double f;                    // f itself
  double grad_f2;              // |grad f|^2
  double rho2;                 // d(x, origin)^2
};

PointEval evaluate(const Slice& sl, const TestBump& b, const HyperboloidPoint& C, const HyperboloidPoint& x,
                   double t, std::complex<double> z) {
  const auto [T, T1] = bump_time(b, t);
  const double s = hyperbolic_distance(x, C);
  const ProfileJet j = bump_profile(b, s);
  const double A = b.amplitude;
  const double f = A * j.g * T, f_t = A * j.g * T1;
  const double rho = hyperbolic_distance(x, sl.P);
  const double f1 = rho_over_sinh(rho);
  const double phi_t = 2.0 * sl.kappa * f1 * minkowski(x.coords(), sl.Pdot) + sl.beta_t;
  const double cP = minkowski(x.coords(), sl.P.coords()), cC = minkowski(x.coords(), C.coords());
  const double cross = cP * cC - minkowski(sl.P.coords(), C.coords());
  const double grad_dot = 2.0 * sl.kappa * f1 * j.g1_over_sinh * cross * A * T;
  const double lap_f = A * T * (j.g2 + j.g1_over_sinh * std::cosh(s));
  const double lap_phi = sl.kappa * (4.0 + 2.0 * rho_coth_minus_one(rho));
  const double grad_phi2 = 4.0 * sl.kappa * sl.kappa * rho * rho;
  const std::complex<double> value = f_t - phi_t * f - z * (lap_f - 2.0 * grad_dot + (grad_phi2 - lap_phi) * f);
  const double rho_o = hyperbolic_distance(x, HyperboloidPoint::origin(2));
  return {value, f, A * A * T * T * j.g1 * j.g1, rho_o * rho_o};
}

struct Node {
  HyperboloidPoint x;
  double w;
};

std::vector<Node> spatial_nodes(const TestBump& b, const QuadratureResolution& res) {
  const HyperboloidPoint C = b.center();
  const Eigen::MatrixXd frame = geometry::tangent_frame(C);
  const auto radial = composite_gauss_legendre(res.radial, 2, 0.0, b.radius());
  std::vector<Node> nodes;
  nodes.reserve(radial.nodes.size() * res.angular);
  const double dchi = 2.0 * kPi / res.angular;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double s = radial.nodes[i];
    for (int k = 0; k < res.angular; ++k) {
      const double chi = (k + 0.5) * dchi;
      const Eigen::VectorXd u = std::cos(chi) * frame.col(0) + std::sin(chi) * frame.col(1);
      nodes.push_back({HyperboloidPoint::from_coords(std::cosh(s) * C.coords() + std::sinh(s) * u),
                       radial.weights[i] * std::sinh(s) * dchi});
    }
  }
  return nodes;
}

struct Integrals {
  double f2 = 0.0, op2 = 0.0, grad2 = 0.0, rho_f2 = 0.0;
};

Integrals integrate(const WeightSpec& spec, const TestBump& b, std::complex<double> z, const QuadratureResolution& res) {
  Integrals acc;
  if (b.amplitude == 0.0) return acc;
  const auto nodes = spatial_nodes(b, res);
  const HyperboloidPoint C = b.center();
  const auto times = composite_gauss_legendre(res.temporal, 2, b.t_c - b.t_radius(), b.t_c + b.t_radius());
  for (std::size_t k = 0; k < times.nodes.size(); ++k) {
    const double t = times.nodes[k];
    const Slice sl = make_slice(spec, t);
    for (const Node& nd : nodes) {
      const PointEval e = evaluate(sl, b, C, nd.x, t, z);
      const double w = nd.w * times.weights[k];
      acc.f2 += w * e.f * e.f;
      acc.op2 += w * std::norm(e.value);
      acc.grad2 += w * e.grad_f2;
      acc.rho_f2 += w * e.rho2 * e.f * e.f;
    }
  }
  return acc;
}

std::complex<double> op_factor(EvolutionOperator op) {
  return op == EvolutionOperator::schrodinger ? std::complex<double>(0.0, 1.0) : std::complex<double>(1.0, 0.0);
}

CarlemanRatio ratio_unchecked(const WeightSpec& spec, const TestBump& b, EvolutionOperator op,
                              const QuadratureResolution& res) {
  CarlemanRatio r;
  r.c = spec.R / 4.0 * std::sqrt(spec.eps / spec.mu);
  const Integrals in = integrate(spec, b, op_factor(op), res);
  r.lhs = r.c * std::sqrt(in.f2);
  r.rhs = std::sqrt(in.op2);
  r.ratio = r.lhs > 0.0 ? r.rhs / r.lhs : 1.0;
  return r;
}

void require_moving(const WeightSpec& spec) {
  validate(spec);
  if (is_radial(spec.kind)) throw DomainError("carleman_ratio needs a moving-center weight");
  if (spec.n != 2) throw DomainError("carleman_ratio is implemented on H^2");
}

}  // namespace

std::complex<double> conjugated_apply(const WeightSpec& spec, const TestBump& bump, EvolutionOperator op,
                                      const HyperboloidPoint& x, double t) {
  if (spec.n != 2 || x.dim() != 2) throw DomainError("conjugated_apply is implemented on H^2");
  return evaluate(make_slice(spec, t), bump, bump.center(), x, t, op_factor(op)).value;
}

CarlemanRatio carleman_ratio(const WeightSpec& spec, const TestBump& b, EvolutionOperator op,
                             const QuadratureResolution& res) {
  require_moving(spec);
  if (!hypothesis_ok(spec)) throw HypothesisError("R must exceed 4 mu eps^{-1/2} frak_C_n");
  return ratio_unchecked(spec, b, op, res);
}

QuadraticLogRatio quadratic_log_ratio(const WeightSpec& spec, const TestBump& b, const QuadratureResolution& res) {
  validate(spec);
  if (spec.kind != WeightKind::quadratic_log) throw DomainError("quadratic_log_ratio needs a quadratic_log weight");
  if (spec.n != 2) throw DomainError("quadratic_log_ratio is implemented on H^2");
  QuadraticLogRatio r;
  r.mu_threshold = quadratic_log_mu_threshold(spec);
  if (spec.mu < r.mu_threshold) throw HypothesisError("mu is below the quadratic-log threshold");
  if (b.rho_c - b.radius() < spec.rho0) throw SupportError("bump reaches inside the excluded ball rho < rho0");
  const Integrals in = integrate(spec, b, op_factor(EvolutionOperator::schrodinger), res);
  const double k = spec.mu / (spec.R * spec.R);
  r.lhs = k * in.grad2 + k * k * k * in.rho_f2;
  r.rhs = in.op2;
  r.ratio = r.lhs > 0.0 ? r.rhs / r.lhs : 1.0;
  return r;
}

evolution::WeightField weight_field(const WeightSpec& spec, const evolution::PolarGrid2D& grid, double t) {
  evolution::WeightField w;
  const int m = grid.size();
  w.phi.resize(m);
  w.phi_t.resize(m);
  w.phi_tt.resize(m);
  for (int k = 0; k < m; ++k) {
    const WeightJet j = weight_jet(spec, grid.point(k), t);
    w.phi[k] = j.phi;
    w.phi_t[k] = j.phi_t;
    w.phi_tt[k] = j.phi_tt;
  }
  return w;
}

Eigen::VectorXcd sample_bump(const TestBump& b, const evolution::PolarGrid2D& grid, double t) {
  Eigen::VectorXcd f(grid.size());
  for (int k = 0; k < grid.size(); ++k) f[k] = bump_value(b, grid.point(k), t);
  return f;
}

VirialGap virial_lower_bound_check(const WeightSpec& spec, const Eigen::VectorXcd& f, const evolution::PolarGrid2D& grid,
                                   EvolutionOperator op, double t) {
  require_moving(spec);
  if (f.size() != grid.size()) throw GridError("field does not match the polar grid");
  const int nr = static_cast<int>(grid.radial.size());
  const double fmax = f.cwiseAbs().maxCoeff();
  VirialGap out;
  if (fmax == 0.0) return out;
  for (int i = std::max(0, nr - 5); i < nr; ++i) {
    for (int j = 0; j < grid.angular; ++j) {
      if (std::abs(f[grid.index(i, j)]) > 1e-14 * fmax) throw SupportError("field reaches the outer 5 cells");
    }
  }
  const evolution::GraphLaplacian g = evolution::polar_graph(grid);
  const Eigen::VectorXcd fn = f / std::sqrt(g.norm2(f));
  const double a = op == EvolutionOperator::heat ? 1.0 : 0.0, b = op == EvolutionOperator::heat ? 0.0 : 1.0;
  const evolution::ConjugatedOperator conj(g, weight_field(spec, grid, t), a, b);
  out.lhs = conj.commutator_form(fn);
  const double eR2 = spec.eps * spec.R * spec.R;
  out.rhs = op == EvolutionOperator::heat ? eR2 / (16.0 * spec.mu)
                                           : eR2 / (8.0 * spec.mu) - spec.mu * geometry::frak_C(spec.n);
  out.gap = out.lhs - out.rhs;
  return out;
}

std::vector<FrontierCell> feasibility_frontier(const std::vector<double>& mus, const std::vector<double>& epss,
                                               const std::vector<double>& R_factors, const std::vector<TestBump>& corpus,
                                               EvolutionOperator op, const QuadratureResolution& res) {
  std::vector<FrontierCell> cells;
  for (double mu : mus) {
    for (double eps : epss) {
      for (double factor : R_factors) {
        WeightSpec spec;
        spec.kind = op == EvolutionOperator::heat ? WeightKind::heat_moving : WeightKind::schrodinger_moving;
        spec.mu = mu;
        spec.eps = eps;
        spec.R = factor * moving_threshold(spec);
        validate(spec);
        FrontierCell c{mu, eps, spec.R, corpus.empty() ? 1.0 : std::numeric_limits<double>::infinity(),
                       hypothesis_ok(spec)};
        for (const TestBump& b : corpus) c.min_ratio = std::min(c.min_ratio, ratio_unchecked(spec, b, op, res).ratio);
        cells.push_back(c);
      }
    }
  }
  return cells;
}

std::vector<MysteryMargin> mystery_inequality_check(int ell, const std::vector<double>& R_list, double C_cal) {
  if (!(C_cal > 0.0)) throw DomainError("C_cal must be positive");
  std::vector<MysteryMargin> out;
  for (double R : R_list) {
    const double logR = std::log(R);
    const double L = std::log(logR / ell);
    const double logC = std::log(C_cal);
    const double C0 = std::exp(3.0 * L / logR * logC);
    const double logC1 = 2.0 * (L - logR) / logR * logC;
    MysteryMargin m;
    m.R = R;
    m.log_F = C0 * std::pow(logR / ell, 3) + logC1 + 2.0 * std::log(logR) - 2.0 * std::log(static_cast<double>(ell)) -
              2.0 * logR;
    m.margin = m.log_F - 0.5 * std::log(2.0);
    const double Q = asymptotics::q_exponent(ell, R).Q;
    const double log_mu = logC + 6.0 / (3.0 - Q) * logR;
    m.direct_margin = 2.0 * std::exp(Q * log_mu) - std::log(2.0) - (2.0 - 2.0 * Q) * log_mu;
    out.push_back(m);
  }
  return out;
}

}  // namespace hyperlab::carleman
