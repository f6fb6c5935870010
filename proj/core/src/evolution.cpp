#include "hyperlab/evolution.hpp"

#include <lapacke.h>

#include <cmath>
#include <sstream>

#include "hyperlab/common.hpp"

namespace hyperlab::evolution {

using geometry::RadialGrid;

Eigen::VectorXcd GraphLaplacian::apply(const Eigen::VectorXcd& x) const {
  const int m = size();
  if (x.size() != m) throw GridError("vector size does not match the graph");
  Eigen::VectorXcd flux = Eigen::VectorXcd::Zero(m);
  for (const Edge& e : edges) {
    const cplx d = e.w * (x[e.j] - x[e.i]);
    flux[e.i] += d;
    flux[e.j] -= d;
  }
  Eigen::VectorXcd out(m);
  for (int i = 0; i < m; ++i) out[i] = (flux[i] - sink[i] * x[i]) / vol[i] + potential[i] * x[i];
  return out;
}

Eigen::MatrixXd GraphLaplacian::dense() const {
  const int m = size();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) L(i, i) = -sink[i] / vol[i] + potential[i];
  for (const Edge& e : edges) {
    L(e.i, e.j) += e.w / vol[e.i];
    L(e.j, e.i) += e.w / vol[e.j];
    L(e.i, e.i) -= e.w / vol[e.i];
    L(e.j, e.j) -= e.w / vol[e.j];
  }
  return L;
}

cplx GraphLaplacian::inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
  cplx acc = 0.0;
  for (int i = 0; i < size(); ++i) acc += vol[i] * f[i] * std::conj(g[i]);
  return acc;
}

double GraphLaplacian::norm2(const Eigen::VectorXcd& f) const {
  double acc = 0.0;
  for (int i = 0; i < size(); ++i) acc += vol[i] * std::norm(f[i]);
  return acc;
}

GraphLaplacian mode_graph(const RadialGrid& grid, int ell) {
  if (ell < 0) throw DomainError("mode index must be >= 0");
  const int m = static_cast<int>(grid.size());
  const int n = grid.n;
  GraphLaplacian g;
  g.vol = grid.quad_weights;
  g.sink.assign(m, 0.0);
  g.potential.assign(m, 0.0);
  const double centrifugal = static_cast<double>(ell) * (ell + n - 2);
  for (int i = 0; i < m; ++i) g.potential[i] = -centrifugal * csch2_safe(grid.nodes[i]);
  for (int i = 0; i + 1 < m; ++i) g.edges.push_back({i, i + 1, std::pow(std::sinh(grid.faces[i + 1]), n - 1) / grid.h});
  g.sink[m - 1] = std::pow(std::sinh(grid.faces[m]), n - 1) / grid.h;
  return g;
}

PolarGrid2D polar_grid2d(double rho_max, int radial_cells, int angular_cells) {
  if (angular_cells < 4) throw GridError("polar grid needs at least 4 angular cells");
  PolarGrid2D p;
  p.radial = RadialGrid::cell_centered(2, rho_max, radial_cells);
  p.angular = angular_cells;
  p.dtheta = 2.0 * kPi / angular_cells;
  return p;
}

GraphLaplacian polar_graph(const PolarGrid2D& p) {
  const RadialGrid& r = p.radial;
  const int nr = static_cast<int>(r.size()), na = p.angular;
  GraphLaplacian g;
  g.vol.resize(p.size());
  g.sink.assign(p.size(), 0.0);
  g.potential.assign(p.size(), 0.0);
  for (int i = 0; i < nr; ++i) {
    // cosh(b) - cosh(a) = 2 sinh(mid) sinh(half), free of cancellation.
    const double mid = 0.5 * (r.faces[i] + r.faces[i + 1]), half = 0.5 * r.h;
    const double v = p.dtheta * 2.0 * std::sinh(mid) * std::sinh(half);
    const double w_ang = r.h / (std::sinh(r.nodes[i]) * p.dtheta);
    for (int j = 0; j < na; ++j) {
      const int k = p.index(i, j);
      g.vol[k] = v;
      g.edges.push_back({k, p.index(i, (j + 1) % na), w_ang});
      if (i + 1 < nr) g.edges.push_back({k, p.index(i + 1, j), std::sinh(r.faces[i + 1]) * p.dtheta / r.h});
    }
  }
  const double w_out = std::sinh(r.faces[nr]) * p.dtheta / r.h;
  for (int j = 0; j < na; ++j) g.sink[p.index(nr - 1, j)] = w_out;
  return g;
}

FieldState laplacian_mode(const FieldState& state, const RadialGrid& grid) {
  const GraphLaplacian g = mode_graph(grid, state.mode_ell);
  return {g.apply(state.values), state.time, state.mode_ell};
}

std::optional<std::string> resolution_warning(const FieldState& state) {
  int crossings = 0;
  for (Eigen::Index i = 1; i < state.values.size(); ++i) {
    if ((state.values[i - 1].real() < 0.0) != (state.values[i].real() < 0.0)) ++crossings;
  }
  if (crossings == 0) return std::nullopt;
  const double per_oscillation = 2.0 * static_cast<double>(state.values.size()) / crossings;
  if (per_oscillation >= 8.0) return std::nullopt;
  std::ostringstream os;
  os << "under-resolved data: " << per_oscillation << " samples per oscillation";
  return os.str();
}

double l2_norm(const FieldState& state, const RadialGrid& grid) {
  if (static_cast<std::size_t>(state.values.size()) != grid.size()) throw GridError("state does not match the grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) acc += grid.quad_weights[i] * std::norm(state.values[i]);
  return std::sqrt(acc);
}

void EvolutionParams::validate(std::size_t grid_size) const {
  if (!(a >= 0.0)) throw DomainError("a must be >= 0");
  if (a == 0.0 && b == 0.0) throw DomainError("(a, b) must not both vanish");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(t_final > 0.0)) throw DomainError("t_final must be positive");
  if (V.size() != 0) {
    if (static_cast<std::size_t>(V.size()) != grid_size) throw GridError("potential samples do not match the grid");
    if (!V.allFinite()) throw DomainError("potential must be finite");
  }
}

double EvolutionParams::M1() const { return V.size() == 0 ? 0.0 : V.cwiseAbs().maxCoeff(); }

CrankNicolson::CrankNicolson(const RadialGrid& grid, int ell, const EvolutionParams& params)
    : params_(&params), graph_(mode_graph(grid, ell)), ell_(ell), z_(params.a, params.b) {
  params.validate(grid.size());
  const int m = graph_.size();
  const Eigen::MatrixXd L = graph_.dense();
  const cplx half = 0.5 * params.dt * z_;
  dl_.resize(m - 1);
  du_.resize(m - 1);
  d_.resize(m);
  du2_.resize(m);
  ipiv_.resize(m);
  rl_.resize(m - 1);
  ru_.resize(m - 1);
  rd_.resize(m);
  for (int i = 0; i < m; ++i) {
    const cplx diag = L(i, i) + (params.V.size() ? params.V[i] : cplx(0.0));
    d_[i] = 1.0 - half * diag;
    rd_[i] = 1.0 + half * diag;
    if (i + 1 < m) {
      du_[i] = -half * L(i, i + 1);
      dl_[i] = -half * L(i + 1, i);
      ru_[i] = half * L(i, i + 1);
      rl_[i] = half * L(i + 1, i);
    }
  }
  const int info = LAPACKE_zgttrf(m, reinterpret_cast<lapack_complex_double*>(dl_.data()),
                                  reinterpret_cast<lapack_complex_double*>(d_.data()),
                                  reinterpret_cast<lapack_complex_double*>(du_.data()),
                                  reinterpret_cast<lapack_complex_double*>(du2_.data()), ipiv_.data());
  if (info != 0) throw SolverError("Crank-Nicolson matrix is singular (zgttrf info " + std::to_string(info) + ")");
}

FieldState CrankNicolson::step(const FieldState& state) const {
  const int m = graph_.size();
  if (state.values.size() != m) throw GridError("state does not match the grid");
  if (state.mode_ell != ell_) throw DomainError("state mode does not match the stepper");
  const double dt = params_->dt;
  std::vector<cplx> rhs(m);
  for (int i = 0; i < m; ++i) {
    cplx acc = rd_[i] * state.values[i];
    if (i > 0) acc += rl_[i - 1] * state.values[i - 1];
    if (i + 1 < m) acc += ru_[i] * state.values[i + 1];
    rhs[i] = acc;
  }
  if (params_->F) {
    const Eigen::VectorXcd f = params_->F(state.time + 0.5 * dt);
    if (f.size() != m) throw GridError("forcing samples do not match the grid");
    for (int i = 0; i < m; ++i) rhs[i] += dt * z_ * f[i];
  }
  const int info = LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', m, 1,
                                  reinterpret_cast<const lapack_complex_double*>(dl_.data()),
                                  reinterpret_cast<const lapack_complex_double*>(d_.data()),
                                  reinterpret_cast<const lapack_complex_double*>(du_.data()),
                                  reinterpret_cast<const lapack_complex_double*>(du2_.data()), ipiv_.data(),
                                  reinterpret_cast<lapack_complex_double*>(rhs.data()), m);
  if (info != 0) throw SolverError("Crank-Nicolson solve failed (zgttrs info " + std::to_string(info) + ")");
  FieldState out{Eigen::Map<Eigen::VectorXcd>(rhs.data(), m), state.time + dt, state.mode_ell};
  if (!out.values.allFinite()) throw SolverError("non-finite values after Crank-Nicolson step");
  return out;
}

FieldState step(const FieldState& state, const RadialGrid& grid, const EvolutionParams& params) {
  return CrankNicolson(grid, state.mode_ell, params).step(state);
}

Trajectory evolve(const FieldState& u0, const RadialGrid& grid, const EvolutionParams& params,
                  const std::vector<Hook>& hooks, int state_stride) {
  const CrankNicolson cn(grid, u0.mode_ell, params);
  const long steps = std::lround(params.t_final / params.dt);
  Trajectory tr;
  tr.times.reserve(steps + 1);
  auto record = [&](const FieldState& s, long k) {
    tr.times.push_back(s.time);
    for (const Hook& h : hooks) tr.series[h.name].push_back(h.fn(s));
    if (state_stride > 0 && k % state_stride == 0) tr.states.push_back(s);
  };
  FieldState u = u0;
  record(u, 0);
  for (long k = 1; k <= steps; ++k) {
    try {
      u = cn.step(u);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (at t = " << u.time << ")";
      throw SolverError(os.str());
    }
    record(u, k);
  }
  return tr;
}

ConjugatedOperator::ConjugatedOperator(const GraphLaplacian& graph, WeightField weight, double a, double b)
    : graph_(&graph), weight_(std::move(weight)), a_(a), b_(b) {
  const int m = graph.size();
  if (static_cast<int>(weight_.phi.size()) != m || static_cast<int>(weight_.phi_t.size()) != m ||
      static_cast<int>(weight_.phi_tt.size()) != m) {
    throw GridError("weight field does not match the graph");
  }
  diag_.resize(m);
  for (int i = 0; i < m; ++i) diag_[i] = -graph.sink[i] / graph.vol[i] + graph.potential[i];
  coef_.reserve(graph.edges.size());
  for (const Edge& e : graph.edges) {
    diag_[e.i] -= e.w / graph.vol[e.i];
    diag_[e.j] -= e.w / graph.vol[e.j];
    const double d = weight_.phi[e.i] - weight_.phi[e.j];
    coef_.push_back({e.i, e.j, e.w, std::cosh(d), std::sinh(d), weight_.phi_t[e.i] - weight_.phi_t[e.j]});
  }
}

// Edge (i, j) contributes w/V_i * k(phi_i - phi_j) x_j to row i and w/V_j * k(phi_j - phi_i) x_i to row j,
// with k = cosh (symmetric part) or sinh (antisymmetric part).
Eigen::VectorXcd ConjugatedOperator::apply_S(const Eigen::VectorXcd& x) const {
  const auto& vol = graph_->vol;
  const cplx ib(0.0, b_);
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = (a_ * diag_[i] + weight_.phi_t[i]) * x[i];
  for (const EdgeCoef& c : coef_) {
    const cplx sym_ij = a_ * c.ch + ib * c.sh, sym_ji = a_ * c.ch - ib * c.sh;
    out[c.i] += c.w / vol[c.i] * sym_ij * x[c.j];
    out[c.j] += c.w / vol[c.j] * sym_ji * x[c.i];
  }
  return out;
}

Eigen::VectorXcd ConjugatedOperator::apply_A(const Eigen::VectorXcd& x) const {
  const auto& vol = graph_->vol;
  const cplx ib(0.0, b_);
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = ib * diag_[i] * x[i];
  for (const EdgeCoef& c : coef_) {
    const cplx anti_ij = ib * c.ch + a_ * c.sh, anti_ji = ib * c.ch - a_ * c.sh;
    out[c.i] += c.w / vol[c.i] * anti_ij * x[c.j];
    out[c.j] += c.w / vol[c.j] * anti_ji * x[c.i];
  }
  return out;
}

Eigen::VectorXcd ConjugatedOperator::apply_S_t(const Eigen::VectorXcd& x) const {
  const auto& vol = graph_->vol;
  const cplx ib(0.0, b_);
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = weight_.phi_tt[i] * x[i];
  for (const EdgeCoef& c : coef_) {
    // d/dt of the S entries: sinh'(d) = cosh(d), cosh'(d) = sinh(d), d_t = dphi_t.
    const cplx ij = (a_ * c.sh + ib * c.ch) * c.dphi_t;
    const cplx ji = (a_ * c.sh - ib * c.ch) * c.dphi_t;
    out[c.i] += c.w / vol[c.i] * ij * x[c.j];
    out[c.j] += c.w / vol[c.j] * ji * x[c.i];
  }
  return out;
}

double ConjugatedOperator::commutator_form(const Eigen::VectorXcd& f) const {
  const Eigen::VectorXcd Sf = apply_S(f), Af = apply_A(f);
  return graph_->inner(apply_S_t(f), f).real() + 2.0 * graph_->inner(Sf, Af).real();
}

WeightField radial_weight_field(const RadialGrid& grid, const carleman::WeightSpec& weight, double t) {
  const carleman::RadialWeight rw = carleman::radial_weight(weight, t);
  WeightField w;
  for (double rho : grid.nodes) {
    const double r2 = rho * rho;
    w.phi.push_back(rw.kappa * r2 + rw.beta);
    w.phi_t.push_back(rw.kappa_t * r2 + rw.beta_t);
    w.phi_tt.push_back(rw.kappa_tt * r2 + rw.beta_tt);
  }
  return w;
}

namespace {

Eigen::MatrixXcd densify(int m, const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& op) {
  Eigen::MatrixXcd M(m, m);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(m);
  for (int k = 0; k < m; ++k) {
    e[k] = 1.0;
    M.col(k) = op(e);
    e[k] = 0.0;
  }
  return M;
}

double adjoint_defect(const Eigen::MatrixXcd& M, const std::vector<double>& vol, double sign) {
  Eigen::MatrixXcd VM = M;
  for (Eigen::Index i = 0; i < M.rows(); ++i) VM.row(i) *= vol[i];
  const double scale = VM.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const Eigen::MatrixXcd D = VM - sign * VM.adjoint();
  return D.cwiseAbs().maxCoeff() / scale;
}

}  // namespace

DiscreteOperatorPair assemble_conjugated(const RadialGrid& grid, int ell, const carleman::WeightSpec& weight,
                                         double a, double b, double t) {
  const GraphLaplacian g = mode_graph(grid, ell);
  const ConjugatedOperator op(g, radial_weight_field(grid, weight, t), a, b);
  DiscreteOperatorPair pair;
  const int m = g.size();
  pair.S_mat = densify(m, [&](const Eigen::VectorXcd& x) { return op.apply_S(x); });
  pair.A_mat = densify(m, [&](const Eigen::VectorXcd& x) { return op.apply_A(x); });
  pair.S_t_mat = densify(m, [&](const Eigen::VectorXcd& x) { return op.apply_S_t(x); });
  pair.vol = g.vol;
  pair.weight = weight;
  pair.t = t;
  pair.sym_defect = adjoint_defect(pair.S_mat, pair.vol, 1.0);
  pair.anti_defect = adjoint_defect(pair.A_mat, pair.vol, -1.0);
  return pair;
}

}  // namespace hyperlab::evolution
