#include "hyperlab/warped_curvature.hpp"

#include <algorithm>
#include <cmath>

#include "hyperlab/common.hpp"

namespace hyperlab::curvature {
namespace {

constexpr double kRhoStep = 1e-3;     // radial FD step for Upsilon derivatives and d_rho of closed forms
constexpr double kThetaStep = 2e-3;   // first angular derivatives of analytic fields
constexpr double kOuterStep = 1e-2;   // derivatives of quantities that already contain FD

constexpr double kC1[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

template <class F>
Matrix matrix_derivative(const F& f, double x, double h) {
  Matrix acc;
  for (int k = 1; k <= 4; ++k) {
    Matrix d = f(x + k * h) - f(x - k * h);
    if (k == 1) acc = kC1[0] * d;
    else acc += kC1[k - 1] * d;
  }
  return acc / h;
}

Matrix checked_inverse(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) throw SingularMetricError("metric is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Matrix upsilon_rho(const WarpedMetricSpec& spec, double rho, const Angles& th) {
  if (spec.upsilon_rho) return spec.upsilon_rho(rho, th);
  return matrix_derivative([&](double r) { return spec.upsilon(r, th); }, rho, kRhoStep);
}

Matrix upsilon_rho_rho(const WarpedMetricSpec& spec, double rho, const Angles& th) {
  if (spec.upsilon_rho_rho) return spec.upsilon_rho_rho(rho, th);
  return matrix_derivative([&](double r) { return upsilon_rho(spec, r, th); }, rho, kRhoStep);
}

// d/d theta_k of a matrix field of the angles.
template <class F>
Matrix angular_derivative(const F& f, Angles th, int k, double h) {
  const double t0 = th[k];
  return matrix_derivative(
      [&](double t) {
        th[k] = t;
        return f(th);
      },
      t0, h);
}

// Christoffels Gamma~^i_{jk} of Upsilon from its angular derivatives.
Tensor3 sphere_christoffel(const Matrix& Yi, const std::vector<Matrix>& dY) {
  const int d = static_cast<int>(Yi.rows());
  Tensor3 G(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) acc += Yi(i, l) * (dY[j](l, k) + dY[k](l, j) - dY[l](j, k));
        G(i, j, k) = 0.5 * acc;
      }
  return G;
}

// Everything at (rho, theta) that the closed forms consume.
struct Local {
  int n = 2, d = 1;
  double rho = 0, s = 0, c = 0, ct = 0;
  Matrix Y, Yi, Yd, Ydd, B;
  std::vector<Matrix> dY, dYd, dB;
  Tensor3 Gt;
  GenericCurvature intrinsic;
};

Local make_local(const WarpedMetricSpec& spec, double rho, const Angles& th, bool need_intrinsic = true) {
  if (!(rho > 0.0)) throw DomainError("warped metric needs rho > 0");
  if (static_cast<int>(th.size()) != spec.n - 1) throw DomainError("angle count must be n - 1");
  Local L;
  L.n = spec.n;
  L.d = spec.n - 1;
  L.rho = rho;
  L.s = std::sinh(rho);
  L.c = std::cosh(rho);
  L.ct = coth_safe(rho);
  L.Y = spec.upsilon(rho, th);
  L.Yi = checked_inverse(L.Y);
  L.Yd = upsilon_rho(spec, rho, th);
  L.Ydd = upsilon_rho_rho(spec, rho, th);
  L.B = L.Yi * L.Yd;
  for (int k = 0; k < L.d; ++k) {
    L.dY.push_back(angular_derivative([&](const Angles& a) { return spec.upsilon(rho, a); }, th, k, kThetaStep));
    L.dYd.push_back(angular_derivative([&](const Angles& a) { return upsilon_rho(spec, rho, a); }, th, k, kThetaStep));
    L.dB.push_back(angular_derivative(
        [&](const Angles& a) { return Matrix(checked_inverse(spec.upsilon(rho, a)) * upsilon_rho(spec, rho, a)); }, th, k,
        kThetaStep));
  }
  L.Gt = sphere_christoffel(L.Yi, L.dY);
  if (need_intrinsic) {
    L.intrinsic = generic_curvature([&](const std::vector<double>& a) { return spec.upsilon(rho, a); }, th);
  }
  return L;
}

// nabla~_j Ydot_{ki}
double nabla_Yd(const Local& L, int j, int k, int i) {
  double acc = L.dYd[j](k, i);
  for (int m = 0; m < L.d; ++m) acc -= L.Gt(m, j, k) * L.Yd(m, i) + L.Gt(m, j, i) * L.Yd(k, m);
  return acc;
}

// nabla~_j B^i_k
double nabla_B(const Local& L, int j, int i, int k) {
  double acc = L.dB[j](i, k);
  for (int m = 0; m < L.d; ++m) acc += L.Gt(i, j, m) * L.B(m, k) - L.Gt(m, j, k) * L.B(i, m);
  return acc;
}

Matrix ricci_sphere_block(const Local& L) {
  const double alpha = (L.n - 2) * L.c * L.c + L.s * L.s;
  const double trB = L.B.trace();
  const Matrix YdYiYd = L.Yd * L.Yi * L.Yd;
  return L.intrinsic.ricci - alpha * L.Y - 0.5 * L.s * L.c * (trB * L.Y + (L.n - 1) * L.Yd) -
         0.5 * L.s * L.s * (L.Ydd - YdYiYd + 0.5 * trB * L.Yd);
}

double ricci_00(const Local& L) {
  return -(L.n - 1) - L.ct * L.B.trace() - 0.5 * (L.Yi * L.Ydd).trace() + 0.25 * (L.B * L.B).trace();
}

RicciScalar ricci_from_local(const Local& L) {
  RicciScalar out;
  out.ricci = Matrix::Zero(L.n, L.n);
  out.ricci(0, 0) = ricci_00(L);
  for (int i = 0; i < L.d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < L.d; ++j) acc += nabla_B(L, j, j, i);
    double dtr = 0.0;
    for (int j = 0; j < L.d; ++j) dtr += L.dB[i](j, j);
    out.ricci(0, i + 1) = out.ricci(i + 1, 0) = 0.5 * (acc - dtr);
  }
  const Matrix Rs = ricci_sphere_block(L);
  out.ricci.bottomRightCorner(L.d, L.d) = Rs;
  out.scalar = out.ricci(0, 0) + (L.Yi * Rs).trace() / (L.s * L.s);
  return out;
}

Matrix metric_from_local(const Local& L) {
  Matrix g = Matrix::Zero(L.n, L.n);
  g(0, 0) = 1.0;
  g.bottomRightCorner(L.d, L.d) = L.s * L.s * L.Y;
  return g;
}

RiemannFamilies riemann_from_local(const Local& L) {
  const int n = L.n, d = L.d;
  const double s = L.s, c = L.c, ct = L.ct;
  RiemannFamilies R;
  R.n = n;
  const Matrix I = Matrix::Identity(d, d);
  R.R0i0j = -s * s * (L.Y + ct * L.Yd + 0.5 * L.Ydd - 0.25 * L.Yd * L.Yi * L.Yd);
  R.Ri0j0 = -I - ct * L.B - 0.5 * L.Yi * L.Ydd + 0.25 * L.B * L.B;
  R.Rijkl = Tensor4(d);
  R.R0ijk = Tensor3(d);
  R.Ri0jk = Tensor3(d);
  const Tensor4& Rt = L.intrinsic.riemann;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
          const double dik = i == k ? 1.0 : 0.0, dil = i == l ? 1.0 : 0.0;
          R.Rijkl(i, j, k, l) = (d > 1 ? Rt(i, j, k, l) : 0.0) - c * c * (dik * L.Y(l, j) - dil * L.Y(k, j)) -
                                0.5 * s * c *
                                    (dik * L.Yd(l, j) - dil * L.Yd(k, j) + L.B(i, k) * L.Y(l, j) - L.B(i, l) * L.Y(k, j)) -
                                0.25 * s * s * (L.B(i, k) * L.Yd(l, j) - L.B(i, l) * L.Yd(k, j));
        }
        R.R0ijk(i, j, k) = -0.5 * s * s * (nabla_Yd(L, j, k, i) - nabla_Yd(L, k, j, i));
        R.Ri0jk(i, j, k) = 0.5 * (nabla_B(L, j, i, k) - nabla_B(L, k, i, j));
      }

  // Lowered tensor from the families R^0_{i0j}, R^i_{jkl}, R^0_{ijk}, then raise the first index.
  Tensor4 low(n);
  const Matrix g = metric_from_local(L);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double v = R.R0i0j(i, j);
      low(0, i + 1, 0, j + 1) = v;
      low(i + 1, 0, j + 1, 0) = v;
      low(0, i + 1, j + 1, 0) = -v;
      low(i + 1, 0, 0, j + 1) = -v;
      for (int k = 0; k < d; ++k) {
        const double w = R.R0ijk(i, j, k);
        low(0, i + 1, j + 1, k + 1) = w;
        low(i + 1, 0, j + 1, k + 1) = -w;
        low(j + 1, k + 1, 0, i + 1) = w;
        low(j + 1, k + 1, i + 1, 0) = -w;
        for (int l = 0; l < d; ++l) {
          double acc = 0.0;
          for (int m = 0; m < d; ++m) acc += g(i + 1, m + 1) * R.Rijkl(m, j, k, l);
          low(i + 1, j + 1, k + 1, l + 1) = acc;
        }
      }
    }
  const Matrix gi = checked_inverse(g);
  R.full = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int cc = 0; cc < n; ++cc)
        for (int e = 0; e < n; ++e) {
          double acc = 0.0;
          for (int f = 0; f < n; ++f) acc += gi(a, f) * low(f, b, cc, e);
          R.full(a, b, cc, e) = acc;
        }
  return R;
}

}  // namespace

Matrix round_sphere_metric(int n, const Angles& theta) {
  Matrix h = Matrix::Zero(n - 1, n - 1);
  double f = 1.0;
  for (int i = 0; i < n - 1; ++i) {
    h(i, i) = f;
    if (i < n - 2) f *= std::sin(theta[i]) * std::sin(theta[i]);
  }
  return h;
}

namespace {

struct Decay {
  double m;
  double value(double r) const { return std::pow(1.0 + r * r, -0.5 * m); }
  double d1(double r) const { return -m * r * std::pow(1.0 + r * r, -0.5 * m - 1.0); }
  double d2(double r) const {
    return -m * std::pow(1.0 + r * r, -0.5 * m - 1.0) + m * (m + 2.0) * r * r * std::pow(1.0 + r * r, -0.5 * m - 2.0);
  }
};

}  // namespace

WarpedMetricSpec hyperbolic_metric(int n) {
  WarpedMetricSpec s;
  s.n = n;
  s.name = "hyperbolic";
  s.sphere_metric = [n](double, const Angles& th) { return round_sphere_metric(n, th); };
  s.upsilon = s.sphere_metric;
  s.upsilon_rho = [n](double, const Angles&) { return Matrix(Matrix::Zero(n - 1, n - 1)); };
  s.upsilon_rho_rho = s.upsilon_rho;
  s.decay_m = 0.0;
  return s;
}

WarpedMetricSpec conformal_example_metric(int n, double m, double eps0) {
  WarpedMetricSpec s;
  s.n = n;
  s.name = "conformal";
  s.decay_m = m;
  const Decay dec{m};
  s.sphere_metric = [n](double, const Angles& th) { return round_sphere_metric(n, th); };
  s.upsilon = [=](double r, const Angles& th) {
    return Matrix((1.0 + dec.value(r) * eps0 * std::cos(th[0])) * round_sphere_metric(n, th));
  };
  s.upsilon_rho = [=](double r, const Angles& th) {
    return Matrix(dec.d1(r) * eps0 * std::cos(th[0]) * round_sphere_metric(n, th));
  };
  s.upsilon_rho_rho = [=](double r, const Angles& th) {
    return Matrix(dec.d2(r) * eps0 * std::cos(th[0]) * round_sphere_metric(n, th));
  };
  return s;
}

namespace {

Matrix anisotropic_shape(int n, const Angles& th) {
  const int d = n - 1;
  Matrix C(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) C(i, j) = std::cos(th[0] + 0.7 * i);
      else C(i, j) = 0.5 * std::sin(th[std::min(i, j)] + th[std::max(i, j)]);
    }
  const Matrix h = round_sphere_metric(n, th);
  const Eigen::VectorXd D = h.diagonal().cwiseSqrt();
  return D.asDiagonal() * C * D.asDiagonal();
}

}  // namespace

WarpedMetricSpec anisotropic_example_metric(int n, double m, double eps0) {
  WarpedMetricSpec s;
  s.n = n;
  s.name = "anisotropic";
  s.decay_m = m;
  const Decay dec{m};
  s.sphere_metric = [n](double, const Angles& th) { return round_sphere_metric(n, th); };
  s.upsilon = [=](double r, const Angles& th) {
    return Matrix(round_sphere_metric(n, th) + eps0 * dec.value(r) * anisotropic_shape(n, th));
  };
  s.upsilon_rho = [=](double r, const Angles& th) { return Matrix(eps0 * dec.d1(r) * anisotropic_shape(n, th)); };
  s.upsilon_rho_rho = [=](double r, const Angles& th) { return Matrix(eps0 * dec.d2(r) * anisotropic_shape(n, th)); };
  return s;
}

Tensor3 generic_christoffel(const MetricFunction& g, const std::vector<double>& x, double h1) {
  const Matrix g0 = g(x);
  const int n = static_cast<int>(g0.rows());
  std::vector<Matrix> dg(n);
  for (int k = 0; k < n; ++k) {
    std::vector<double> y = x;
    dg[k] = matrix_derivative(
        [&](double t) {
          y[k] = t;
          return g(y);
        },
        x[k], h1);
  }
  const Matrix gi = checked_inverse(g0);
  Tensor3 G(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int e = 0; e < n; ++e) acc += gi(a, e) * (dg[b](e, c) + dg[c](e, b) - dg[e](b, c));
        G(a, b, c) = 0.5 * acc;
      }
  return G;
}

GenericCurvature generic_curvature(const MetricFunction& g, const std::vector<double>& x, double h1, double h2) {
  GenericCurvature out;
  out.metric = g(x);
  const int n = static_cast<int>(out.metric.rows());
  out.christoffel = generic_christoffel(g, x, h1);
  const Tensor3& G = out.christoffel;
  // dG[c](a, b, d) = d_c Gamma^a_{bd}
  std::vector<Tensor3> dG(n, Tensor3(n));
  for (int c = 0; c < n; ++c) {
    auto f = [&](const std::vector<double>& y) { return generic_christoffel(g, y, h1).data; };
    const auto v = fd_partial(f, x, c, h2);
    dG[c].data = v;
  }
  out.riemann = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double acc = dG[c](a, d, b) - dG[d](a, c, b);
          for (int e = 0; e < n; ++e) acc += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
          out.riemann(a, b, c, d) = acc;
        }
  out.ricci = Matrix::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) acc += out.riemann(a, b, a, d);
      out.ricci(b, d) = acc;
    }
  out.scalar = (checked_inverse(out.metric) * out.ricci).trace();
  return out;
}

MetricFunction full_metric(const WarpedMetricSpec& spec) {
  return [spec](const std::vector<double>& x) {
    const Angles th(x.begin() + 1, x.end());
    const double s = std::sinh(x[0]);
    Matrix g = Matrix::Zero(spec.n, spec.n);
    g(0, 0) = 1.0;
    g.bottomRightCorner(spec.n - 1, spec.n - 1) = s * s * spec.upsilon(x[0], th);
    return g;
  };
}

namespace {
std::vector<double> point(double rho, const Angles& th) {
  std::vector<double> x{rho};
  x.insert(x.end(), th.begin(), th.end());
  return x;
}
}  // namespace

GenericCurvature curvature_oracle(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  return generic_curvature(full_metric(spec), point(rho, theta));
}

Tensor3 christoffel_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const Local L = make_local(spec, rho, theta, false);
  Tensor3 G(L.n);
  for (int i = 0; i < L.d; ++i)
    for (int j = 0; j < L.d; ++j) {
      G(0, i + 1, j + 1) = -L.s * L.c * L.Y(i, j) - 0.5 * L.s * L.s * L.Yd(i, j);
      const double v = (i == j ? L.ct : 0.0) + 0.5 * L.B(i, j);
      G(i + 1, 0, j + 1) = v;
      G(i + 1, j + 1, 0) = v;
      for (int k = 0; k < L.d; ++k) G(i + 1, j + 1, k + 1) = L.Gt(i, j, k);
    }
  return G;
}

RiemannFamilies riemann_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  return riemann_from_local(make_local(spec, rho, theta));
}

RicciScalar ricci_scalar_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  return ricci_from_local(make_local(spec, rho, theta));
}

double sectional_curvature(const Tensor4& riemann, const Matrix& g, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  const int n = riemann.dim;
  const double area = X.dot(g * X) * Y.dot(g * Y) - std::pow(X.dot(g * Y), 2);
  const double scale = X.dot(g * X) * Y.dot(g * Y);
  if (!(area > 1e-12 * scale) || scale == 0.0) throw DegenerateError("plane is degenerate (parallel or zero vectors)");
  const Eigen::VectorXd gX = g * X;
  double num = 0.0;
  for (int e = 0; e < n; ++e)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) num += gX[e] * riemann(e, b, c, d) * Y[b] * X[c] * Y[d];
  return num / area;
}

CurvatureReport curvature_closed(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const Local L = make_local(spec, rho, theta);
  CurvatureReport rep;
  rep.n = L.n;
  rep.rho = rho;
  rep.theta = theta;
  rep.metric = metric_from_local(L);
  rep.christoffels = christoffel_closed(spec, rho, theta);
  rep.riemann = riemann_from_local(L);
  const RicciScalar rs = ricci_from_local(L);
  rep.ricci = rs.ricci;
  rep.scalar = rs.scalar;
  auto e = [&](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(L.n);
    v[i] = 1.0;
    return v;
  };
  for (int j = 1; j < L.n; ++j) rep.sectional_radial.push_back(sectional_curvature(rep.riemann.full, rep.metric, e(0), e(j)));
  rep.sectional_tangential = Matrix::Zero(L.d, L.d);
  for (int j = 1; j < L.n; ++j)
    for (int k = 1; k < L.n; ++k)
      if (j != k) rep.sectional_tangential(j - 1, k - 1) = sectional_curvature(rep.riemann.full, rep.metric, e(j), e(k));
  return rep;
}

std::vector<Plane> coordinate_planes(int n) {
  std::vector<Plane> planes;
  auto e = [&](int i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[i] = 1.0;
    return v;
  };
  for (int j = 1; j < n; ++j) planes.push_back({e(0), e(j)});
  for (int j = 1; j < n; ++j)
    for (int k = j + 1; k < n; ++k) planes.push_back({e(j), e(k)});
  return planes;
}

SectionalSeries sectional_scan(const WarpedMetricSpec& spec, const std::vector<Plane>& planes,
                               const std::vector<double>& rho_list, const Angles& theta) {
  for (std::size_t k = 1; k < rho_list.size(); ++k)
    if (!(rho_list[k] > rho_list[k - 1])) throw DomainError("rho_list must be strictly increasing");
  SectionalSeries out;
  out.rho = rho_list;
  out.values.assign(planes.size(), {});
  for (double r : rho_list) {
    const Local L = make_local(spec, r, theta);
    const RiemannFamilies R = riemann_from_local(L);
    const Matrix g = metric_from_local(L);
    for (std::size_t p = 0; p < planes.size(); ++p) out.values[p].push_back(sectional_curvature(R.full, g, planes[p].X, planes[p].Y));
  }
  return out;
}

ShapeOperatorState shape_operator(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const Local L = make_local(spec, rho, theta, false);
  ShapeOperatorState st;
  st.S = L.ct * Matrix::Identity(L.d, L.d) + 0.5 * L.B;
  st.A = L.s * L.c * L.Y + 0.5 * L.s * L.s * L.Yd;
  st.H = st.S.trace();
  return st;
}

RiccatiResidual riccati_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const Local L = make_local(spec, rho, theta, false);
  const Matrix S = shape_operator(spec, rho, theta).S;
  const Matrix dS = matrix_derivative([&](double r) { return shape_operator(spec, r, theta).S; }, rho, kRhoStep);
  const Matrix M = -Matrix::Identity(L.d, L.d) - L.ct * L.B - 0.5 * L.Yi * L.Ydd + 0.25 * L.B * L.B;
  RiccatiResidual out;
  out.frobenius = (dS + S * S + M).norm();
  const double dH = fd_derivative([&](double r) { return shape_operator(spec, r, theta).H; }, rho, kRhoStep);
  out.trace_residual = std::abs(dH + (S * S).trace() + ricci_00(L));
  return out;
}

namespace {

// T(a, j, k) = nabla~_a Ydot_{jk} at (rho, th).
Tensor3 nabla_Yd_field(const WarpedMetricSpec& spec, double rho, const Angles& th) {
  const Local L = make_local(spec, rho, th, false);
  Tensor3 T(L.d);
  for (int a = 0; a < L.d; ++a)
    for (int j = 0; j < L.d; ++j)
      for (int k = 0; k < L.d; ++k) T(a, j, k) = nabla_Yd(L, a, j, k);
  return T;
}

// Upsilon^{ja} Upsilon^{kb} nabla~_b nabla~_a Ydot_{jk}
double double_divergence_Yd(const WarpedMetricSpec& spec, const Local& L, const Angles& th) {
  const int d = L.d;
  const Tensor3 T = nabla_Yd_field(spec, L.rho, th);
  std::vector<Tensor3> dT(d, Tensor3(d));
  for (int b = 0; b < d; ++b) {
    auto f = [&](const std::vector<double>& a) { return nabla_Yd_field(spec, L.rho, a).data; };
    dT[b].data = fd_partial(f, th, b, kOuterStep);
  }
  double acc = 0.0;
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double v = dT[b](a, j, k);
          for (int m = 0; m < d; ++m) v -= L.Gt(m, b, a) * T(m, j, k) + L.Gt(m, b, j) * T(a, m, k) + L.Gt(m, b, k) * T(a, j, m);
          acc += L.Yi(j, a) * L.Yi(k, b) * v;
        }
  return acc;
}

double trace_A_ric_direct(const Local& L) {
  const Matrix A = L.s * L.c * L.Y + 0.5 * L.s * L.s * L.Yd;
  const Matrix Aup = L.Yi * A * L.Yi / std::pow(L.s, 4);
  return (Aup * ricci_sphere_block(L)).trace();
}

double trace_A_ric_decomposed(const Local& L) {
  const int n = L.n;
  const double s = L.s, c = L.c;
  const double alpha = (n - 2) * c * c + s * s;
  const double trB = L.B.trace();
  const Matrix B2 = L.B * L.B;
  const double trB2 = B2.trace(), trB3 = (B2 * L.B).trace();
  const double Rt = (L.Yi * L.intrinsic.ricci).trace();
  const double X = Rt - (n - 1) * alpha - (n - 1) * s * c * trB -
                   0.5 * s * s * ((L.Yi * L.Ydd).trace() - trB2 + 0.5 * trB * trB);
  const double ricYd = (L.Yi * L.intrinsic.ricci * L.Yi * L.Yd).trace();
  const double YdYdd = (L.B * L.Yi * L.Ydd).trace();
  const double Y = ricYd - alpha * trB - 0.5 * s * c * (trB * trB + (n - 1) * trB2) -
                   0.5 * s * s * (YdYdd - trB3 + 0.5 * trB * trB2);
  return L.ct / (s * s) * X + Y / (2.0 * s * s);
}

}  // namespace

BilaplacianBreakdown bilaplacian_perturbed_breakdown(const WarpedMetricSpec& spec, double rho, const Angles& theta,
                                                     const BilaplacianOptions& opts) {
  if (!(rho >= opts.rho0)) throw DomainError("bilaplacian_perturbed needs rho >= rho0");
  const Local L = make_local(spec, rho, theta);
  const Matrix S = L.ct * Matrix::Identity(L.d, L.d) + 0.5 * L.B;
  const Matrix M = -Matrix::Identity(L.d, L.d) - L.ct * L.B - 0.5 * L.Yi * L.Ydd + 0.25 * L.B * L.B;
  const double H = S.trace();
  const Matrix S2 = S * S;
  const double S_norm2 = S2.trace();
  const double ric00 = ricci_00(L);
  auto ric00_at = [&](double r) { return ricci_00(make_local(spec, r, theta, false)); };
  auto scalar_at = [&](double r) { return ricci_from_local(make_local(spec, r, theta)).scalar; };
  const double d_ric00 = fd_derivative(ric00_at, rho, kRhoStep);
  const double d_scalar = fd_derivative(scalar_at, rho, kRhoStep);
  const double div2A = double_divergence_Yd(spec, L, theta) / (2.0 * L.s * L.s);
  const double h32 = 0.5 * d_scalar + trace_A_ric_direct(L) - d_ric00 - H * ric00;

  BilaplacianBreakdown out;
  out.H = H;
  out.S_norm2 = S_norm2;
  out.ric00 = ric00;
  out.div2A = div2A;
  out.h32 = h32;
  const double radial_part = 2.0 * (S2 * S).trace() + 2.0 * (M * S).trace() - d_ric00;
  out.delta_H = radial_part - H * S_norm2 - H * ric00 + div2A + opts.codazzi_sign * h32;
  out.value = 2.0 * H * H - 4.0 * S_norm2 - 4.0 * ric00 + 2.0 * rho * out.delta_H;
  return out;
}

double bilaplacian_perturbed(const WarpedMetricSpec& spec, double rho, const Angles& theta,
                             const BilaplacianOptions& opts) {
  return bilaplacian_perturbed_breakdown(spec, rho, theta, opts).value;
}

TraceDecomposition trace_decomposition_check(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const Local L = make_local(spec, rho, theta);
  TraceDecomposition out;
  out.direct = trace_A_ric_direct(L);
  out.decomposed = trace_A_ric_decomposed(L);
  out.residual = std::abs(out.direct - out.decomposed);
  return out;
}

namespace {

// g^{ab}(d_a d_b f - Gamma^c_{ab} d_c f) with FD derivatives of f.
double laplacian_with(const Matrix& gi, const Tensor3& G, const ScalarField& f, const std::vector<double>& x, double hf) {
  const int n = static_cast<int>(gi.rows());
  std::vector<double> grad(n);
  Matrix hess(n, n);
  for (int a = 0; a < n; ++a) {
    std::vector<double> y = x;
    auto fa = [&](double t) {
      y[a] = t;
      return f(y);
    };
    grad[a] = fd_derivative(fa, x[a], hf);
    hess(a, a) = fd_second_derivative(fa, x[a], hf);
    y = x;
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      auto fab = [&](double ta) {
        std::vector<double> y = x;
        y[a] = ta;
        return fd_derivative(
            [&](double tb) {
              y[b] = tb;
              return f(y);
            },
            x[b], hf);
      };
      hess(a, b) = hess(b, a) = fd_derivative(fab, x[a], hf);
    }
  double acc = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double v = hess(a, b);
      for (int c = 0; c < n; ++c) v -= G(c, a, b) * grad[c];
      acc += gi(a, b) * v;
    }
  return acc;
}

double oracle_laplacian_rho(const MetricFunction& g, const std::vector<double>& x) {
  const Matrix gi = checked_inverse(g(x));
  const Tensor3 G = generic_christoffel(g, x);
  double acc = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b) acc -= gi(a, b) * G(0, a, b);
  return acc;
}

}  // namespace

double oracle_laplacian(const WarpedMetricSpec& spec, const ScalarField& f, const std::vector<double>& x, double h1) {
  const MetricFunction g = full_metric(spec);
  return laplacian_with(checked_inverse(g(x)), generic_christoffel(g, x, h1), f, x, kOuterStep);
}

double oracle_bilaplacian_rho_squared(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const MetricFunction g = full_metric(spec);
  // Delta(rho^2) = 2 + 2 rho Delta rho
  const ScalarField lap_rho2 = [&](const std::vector<double>& y) { return 2.0 + 2.0 * y[0] * oracle_laplacian_rho(g, y); };
  return oracle_laplacian(spec, lap_rho2, point(rho, theta));
}

double bochner_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const MetricFunction g = full_metric(spec);
  const std::vector<double> x = point(rho, theta);
  const GenericCurvature oc = generic_curvature(g, x);
  const Matrix gi = checked_inverse(oc.metric);
  const int n = spec.n;
  Matrix hess(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) hess(a, b) = -oc.christoffel(0, a, b);
  const double hess_norm2 = (gi * hess * gi * hess.transpose()).trace();
  const double d_lap = fd_derivative(
      [&](double r) {
        std::vector<double> y = x;
        y[0] = r;
        return oracle_laplacian_rho(g, y);
      },
      rho, kRhoStep);
  return std::abs(hess_norm2 + d_lap + oc.ricci(0, 0));
}

double mean_curvature_residual(const WarpedMetricSpec& spec, double rho, const Angles& theta) {
  const double H = shape_operator(spec, rho, theta).H;
  return std::abs(H - oracle_laplacian_rho(full_metric(spec), point(rho, theta)));
}

std::vector<double> lambda_decay_slopes(const WarpedMetricSpec& spec, const Angles& theta,
                                        const std::vector<double>& rho_list) {
  std::vector<double> n0, n1, n2;
  for (double r : rho_list) {
    n0.push_back((spec.upsilon(r, theta) - spec.sphere_metric(r, theta)).norm());
    n1.push_back(upsilon_rho(spec, r, theta).norm());
    n2.push_back(upsilon_rho_rho(spec, r, theta).norm());
  }
  return {loglog_slope(rho_list, n0), loglog_slope(rho_list, n1), loglog_slope(rho_list, n2)};
}

double frak_F_sweep(const WarpedMetricSpec& spec, const std::vector<Angles>& angles, double rho_lo, double rho_hi,
                    std::size_t count, const BilaplacianOptions& opts) {
  double sup = 0.0;
  for (const auto& th : angles)
    for (double r : logspace(rho_lo, rho_hi, count)) sup = std::max(sup, std::abs(bilaplacian_perturbed(spec, r, th, opts)));
  return sup;
}

}  // namespace hyperlab::curvature
