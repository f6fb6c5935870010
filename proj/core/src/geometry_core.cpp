#include "hyperlab/geometry_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperlab/common.hpp"
#include "hyperlab/quadrature.hpp"

namespace hyperlab::geometry {

double minkowski(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x[0] * y[0] - x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

namespace {

// Recompute x0 from the spatial part so <x,x> = 1 holds to rounding.
Eigen::VectorXd project(Eigen::VectorXd c) {
  c[0] = std::sqrt(1.0 + c.tail(c.size() - 1).squaredNorm());
  return c;
}

}  // namespace

HyperboloidPoint HyperboloidPoint::from_coords(const Eigen::VectorXd& coords) {
  if (coords.size() < 3) throw DomainError("hyperboloid point needs n >= 2");
  if (!(coords[0] > 0.0)) throw DomainError("hyperboloid point must have x0 > 0");
  const double defect = std::abs(minkowski(coords, coords) - 1.0) / std::max(1.0, coords[0] * coords[0]);
  if (!(defect <= 1e-9)) throw DomainError("point is off the hyperboloid (defect " + std::to_string(defect) + ")");
  return HyperboloidPoint(project(coords));
}

HyperboloidPoint HyperboloidPoint::origin(int n) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[0] = 1.0;
  return HyperboloidPoint(c);
}

HyperboloidPoint HyperboloidPoint::from_polar(double rho, const Eigen::VectorXd& direction) {
  const double norm = direction.norm();
  if (!(norm > 0.0)) throw DomainError("polar direction must be nonzero");
  Eigen::VectorXd c(direction.size() + 1);
  c[0] = std::cosh(rho);
  c.tail(direction.size()) = std::sinh(rho) * direction / norm;
  return HyperboloidPoint(project(c));
}

HyperboloidPoint HyperboloidPoint::polar2(double rho, double theta) {
  Eigen::VectorXd dir(2);
  dir << std::cos(theta), std::sin(theta);
  return from_polar(rho, dir);
}

double HyperboloidPoint::constraint_defect() const {
  return std::abs(minkowski(coords_, coords_) - 1.0) / std::max(1.0, coords_[0] * coords_[0]);
}

double hyperbolic_distance(const HyperboloidPoint& x, const HyperboloidPoint& y) {
  const Eigen::VectorXd& a = x.coords();
  const Eigen::VectorXd& b = y.coords();
  if (a.size() != b.size()) throw DomainError("distance between points of different dimension");
  const double c = minkowski(a, b);
  if (c < 1.0 - 1e-9) throw DomainError("<x,y> < 1: points are off the hyperboloid");
  // c - 1 = -<x-y, x-y>/2 without the cancellation of forming c first.
  const Eigen::VectorXd w = a - b;
  const double z = std::max(0.0, -0.5 * minkowski(w, w));
  if (z <= 1e-4) return std::log1p(z + std::sqrt(z * (2.0 + z)));
  return std::acosh(std::max(c, 1.0));
}

double tangent_norm(const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, -minkowski(v, v))); }

HyperboloidPoint exp_map(const HyperboloidPoint& base, const Eigen::VectorXd& v) {
  const Eigen::VectorXd& x = base.coords();
  if (v.size() != x.size()) throw DomainError("tangent vector has the wrong dimension");
  const double scale = std::max({1.0, std::abs(x[0]), v.cwiseAbs().maxCoeff()});
  if (std::abs(minkowski(x, v)) > 1e-10 * scale * scale) throw DomainError("vector is not tangent at the base point");
  const double r = tangent_norm(v);
  if (r == 0.0) return base;
  return HyperboloidPoint::from_coords(project(std::cosh(r) * x + (std::sinh(r) / r) * v));
}

Eigen::MatrixXd tangent_frame(const HyperboloidPoint& x) {
  const int n = x.dim();
  const Eigen::VectorXd& c = x.coords();
  const Eigen::VectorXd s = c.tail(n);
  Eigen::MatrixXd frame(n + 1, n);
  frame.row(0) = s.transpose();
  // I + s s^T / (1 + x0) is the spatial block of the boost taking the origin to x.
  frame.bottomRows(n) = Eigen::MatrixXd::Identity(n, n) + s * s.transpose() / (1.0 + c[0]);
  return frame;
}

Eigen::VectorXd distance_gradient(const HyperboloidPoint& x, const HyperboloidPoint& y) {
  const double d = hyperbolic_distance(x, y);
  if (d <= 1e-12) throw DegenerateError("distance gradient at coincident points");
  return -(y.coords() - std::cosh(d) * x.coords()) / std::sinh(d);
}

double sinh_power_integral(int n, double a, double b) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.05)));
  const auto rule = composite_gauss_legendre(8, panels, a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * std::pow(std::sinh(rule.nodes[i]), n - 1);
  return acc;
}

RadialGrid RadialGrid::cell_centered(int n, double rho_max, int cells) {
  if (n < 2) throw GridError("dimension must be >= 2");
  if (cells < 5) throw GridError("radial grid needs at least 5 cells");
  if (!(rho_max > 0.0)) throw GridError("rho_max must be positive");
  RadialGrid g;
  g.n = n;
  g.h = rho_max / (cells + 0.5);
  g.nodes.resize(cells);
  g.faces.resize(cells + 1);
  g.quad_weights.resize(cells);
  const auto ref = gauss_legendre(8);
  for (int i = 0; i <= cells; ++i) g.faces[i] = i * g.h;
  for (int i = 0; i < cells; ++i) {
    g.nodes[i] = (i + 0.5) * g.h;
    const double a = g.faces[i], half = 0.5 * g.h, mid = a + half;
    double acc = 0.0;
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) acc += ref.weights[k] * std::pow(std::sinh(mid + half * ref.nodes[k]), n - 1);
    g.quad_weights[i] = acc * half;
  }
  return g;
}

std::vector<double> radial_laplacian(const std::vector<double>& f, const RadialGrid& grid) {
  const std::size_t m = grid.nodes.size();
  if (m < 5) throw GridError("radial_laplacian needs at least 5 nodes");
  if (f.size() != m) throw GridError("sample count does not match the grid");
  const double h = grid.nodes[1] - grid.nodes[0];
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(grid.nodes[i] - grid.nodes[i - 1] - h) > 1e-9 * h) throw GridError("radial_laplacian needs a uniform grid");
  }
  std::vector<double> out(m);
  const double k = grid.n - 1;
  for (std::size_t i = 0; i < m; ++i) {
    double d1, d2;
    if (i == 0) {
      d1 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
      d2 = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    } else if (i == m - 1) {
      d1 = (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h);
      d2 = (2.0 * f[i] - 5.0 * f[i - 1] + 4.0 * f[i - 2] - f[i - 3]) / (h * h);
    } else {
      d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
      d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    }
    out[i] = d2 + k * coth_safe(grid.nodes[i]) * d1;
  }
  return out;
}

double bilaplacian_rho_squared(int n, double rho) {
  if (n < 2) throw DomainError("dimension must be >= 2");
  if (!(rho > 0.0)) throw DomainError("bilaplacian_rho_squared needs rho > 0");
  const double k = n - 1;
  return 2.0 * k * (k + (n - 3) * one_minus_rho_coth_times_csch2(rho));
}

double bilaplacian_rho_power(int n, double delta, double rho) {
  if (n < 2) throw DomainError("dimension must be >= 2");
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
  if (!(rho >= 1.0)) throw DomainError("bilaplacian_rho_power needs rho >= 1");
  const double k = n - 1;
  const double ct = coth_safe(rho), cs2 = csch2_safe(rho);
  const double radial = (1.0 - 2.0 * delta) *
                        (k * k + 2.0 * delta * (2.0 * delta + 1.0) / (rho * rho) - 4.0 * delta * k * ct / rho);
  const double angular = k * (3.0 - n) * cs2 * (rho * ct - (1.0 - 2.0 * delta));
  return 2.0 * (1.0 - delta) * std::pow(rho, -2.0 * delta) * (radial + angular);
}

BilaplacianInterval bilaplacian_interval(int n) {
  if (n < 2) throw DomainError("dimension must be >= 2");
  if (n == 2) return {2.0, 8.0 / 3.0, false, true};
  if (n == 3) return {8.0, 8.0, true, true};
  return {4.0 * n * (n - 1) / 3.0, 2.0 * (n - 1) * (n - 1), false, false};
}

double frak_C(int n) {
  if (n < 2) throw DomainError("dimension must be >= 2");
  if (n == 2) return 8.0 / 3.0;
  if (n == 3) return 8.0;
  return 2.0 * (n - 1) * (n - 1);
}

PowerSweep default_power_sweep() {
  PowerSweep s;
  s.deltas = {0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.49};
  return s;
}

GeometryConstants geometry_constants(int n, const PowerSweep& sweep) {
  GeometryConstants gc;
  gc.n = n;
  gc.frak_C_n = frak_C(n);
  double sup = 0.0;
  for (double d : sweep.deltas) {
    for (double r : logspace(sweep.rho_lo, sweep.rho_hi, sweep.rho_count)) sup = std::max(sup, std::abs(bilaplacian_rho_power(n, d, r)));
  }
  gc.frak_D_n = sup;
  return gc;
}

MovingCenter moving_center(int n, double R, double t) {
  // t(1-t) is formed first so that s(t) and s(1-t) agree bit for bit.
  const double s = R * (t * (1.0 - t)), sd = R * (1.0 - 2.0 * t), sdd = -2.0 * R;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n + 1);
  p[0] = std::cosh(s);
  p[1] = -std::sinh(s);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n + 1);
  unit[0] = std::sinh(s);
  unit[1] = -std::cosh(s);
  return {HyperboloidPoint::from_coords(p), sd * unit, sdd * unit, std::abs(sd)};
}

Kinematics moving_center_kinematics(const HyperboloidPoint& x, double R, double t) {
  const MovingCenter mc = moving_center(x.dim(), R, t);
  const double rho = hyperbolic_distance(x, mc.P);
  if (rho <= 1e-6) throw DegenerateError("x coincides with the moving center P(t)");
  const double sh = std::sinh(rho);
  const double rho_t = minkowski(x.coords(), mc.velocity) / sh;
  const double rho_tt = coth_safe(rho) * (mc.speed * mc.speed - rho_t * rho_t) + minkowski(x.coords(), mc.acceleration) / sh;
  return {rho, rho_t, rho_tt};
}

HalfSquareKinematics moving_center_half_square(const HyperboloidPoint& x, double R, double t) {
  const MovingCenter mc = moving_center(x.dim(), R, t);
  const double rho = hyperbolic_distance(x, mc.P);
  const double c = minkowski(x.coords(), mc.P.coords());
  const double c_t = minkowski(x.coords(), mc.velocity);
  const double c_tt = minkowski(x.coords(), mc.acceleration) + mc.speed * mc.speed * c;
  // f(c) = acosh(c)^2/2: f' = rho/sinh rho, f'' = (1 - rho coth rho) csch^2 rho.
  const double f1 = rho < 1e-4 ? 1.0 - rho * rho / 6.0 : rho / std::sinh(rho);
  const double f2 = one_minus_rho_coth_times_csch2(rho);
  return {0.5 * rho * rho, f1 * c_t, f2 * c_t * c_t + f1 * c_tt};
}

namespace {

double mollifier_profile(double z) { return z < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0; }

double mollify_fixed(const std::function<double(const HyperboloidPoint&)>& phi, double eps, const HyperboloidPoint& x,
                     int samples) {
  const int n = x.dim();
  const Eigen::MatrixXd frame = tangent_frame(x);
  const Eigen::VectorXd& base = x.coords();
  const auto radial = gauss_legendre(samples, 0.0, eps);
  const int n_chi = 2 * samples;
  double num = 0.0, den = 0.0;
  auto point_at = [&](double r, const Eigen::VectorXd& unit_tangent) {
    Eigen::VectorXd c = std::cosh(r) * base + std::sinh(r) * unit_tangent;
    c[0] = std::sqrt(1.0 + c.tail(n).squaredNorm());
    return HyperboloidPoint::from_coords(c);
  };
  if (n == 2) {
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = radial.nodes[i];
      const double w = radial.weights[i] * mollifier_profile(r / eps) * std::sinh(r) * (2.0 * kPi / n_chi);
      for (int j = 0; j < n_chi; ++j) {
        const double chi = 2.0 * kPi * j / n_chi;
        const Eigen::VectorXd u = std::cos(chi) * frame.col(0) + std::sin(chi) * frame.col(1);
        num += w * phi(point_at(r, u));
        den += w;
      }
    }
  } else if (n == 3) {
    const auto polar = gauss_legendre(samples, -1.0, 1.0);
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double r = radial.nodes[i];
      const double sr = std::sinh(r);
      const double wr = radial.weights[i] * mollifier_profile(r / eps) * sr * sr * (2.0 * kPi / n_chi);
      for (std::size_t k = 0; k < polar.nodes.size(); ++k) {
        const double ct = polar.nodes[k], st = std::sqrt(1.0 - ct * ct);
        const double w = wr * polar.weights[k];
        for (int j = 0; j < n_chi; ++j) {
          const double chi = 2.0 * kPi * j / n_chi;
          const Eigen::VectorXd u =
              ct * frame.col(0) + st * std::cos(chi) * frame.col(1) + st * std::sin(chi) * frame.col(2);
          num += w * phi(point_at(r, u));
          den += w;
        }
      }
    }
  } else {
    throw DomainError("mollify_exp supports n = 2 and n = 3");
  }
  return num / den;
}

}  // namespace

double mollify_exp_fixed(const std::function<double(const HyperboloidPoint&)>& phi, double eps,
                         const HyperboloidPoint& x, int samples) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("mollifier radius must lie in (0, 1]");
  if (samples < 2) throw DomainError("mollifier needs at least 2 samples");
  return mollify_fixed(phi, eps, x, samples);
}

MollifyResult mollify_exp(const std::function<double(const HyperboloidPoint&)>& phi, double eps,
                          const HyperboloidPoint& x, int samples) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("mollifier radius must lie in (0, 1]");
  if (samples < 2) throw DomainError("mollifier needs at least 2 samples");
  const double coarse = mollify_fixed(phi, eps, x, samples);
  const double fine = mollify_fixed(phi, eps, x, 2 * samples);
  const double change = std::abs(fine - coarse);
  return {fine, change, change <= 1e-6};
}

double capped_square_distance(const HyperboloidPoint& x, double R) {
  const double d = hyperbolic_distance(x, HyperboloidPoint::origin(x.dim()));
  return d <= R ? d * d : R * R;
}

double gradient_norm_squared(const std::function<double(const HyperboloidPoint&)>& F, const HyperboloidPoint& x,
                             double step) {
  const Eigen::MatrixXd frame = tangent_frame(x);
  double acc = 0.0;
  for (int a = 0; a < x.dim(); ++a) {
    const Eigen::VectorXd e = frame.col(a);
    const double g = fd_derivative([&](double s) { return F(exp_map(x, s * e)); }, 0.0, step);
    acc += g * g;
  }
  return acc;
}

}  // namespace hyperlab::geometry
