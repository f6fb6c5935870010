#include "hyperlab/common.hpp"

#include <algorithm>

namespace hyperlab {

double log_sum_exp(std::span<const double> log_terms) {
  LogAccumulator acc;
  for (double v : log_terms) acc.add(v);
  return acc.value();
}

double rho_coth_minus_one(double rho) {
  const double r = std::abs(rho);
  if (r < 0.1) {
    // x coth x = 1 + x^2/3 - x^4/45 + 2x^6/945 - x^8/4725 + 2x^10/93555
    const double x2 = r * r;
    return x2 * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * (2.0 / 93555.0)))));
  }
  return r / std::tanh(r) - 1.0;
}

double coth_safe(double rho) {
  if (std::abs(rho) < 1e-3) {
    const double x2 = rho * rho;
    return 1.0 / rho + rho * (1.0 / 3.0 - x2 / 45.0);
  }
  return 1.0 / std::tanh(rho);
}

double csch2_safe(double rho) {
  if (std::abs(rho) < 1e-3) {
    const double x2 = rho * rho;
    return 1.0 / x2 - 1.0 / 3.0 + x2 / 15.0;
  }
  if (std::abs(rho) > 350.0) return 4.0 * std::exp(-2.0 * std::abs(rho));
  const double s = std::sinh(rho);
  return 1.0 / (s * s);
}

double one_minus_rho_coth_times_csch2(double rho) {
  const double r = std::abs(rho);
  if (r < 1e-3) {
    // -1/3 + 2 r^2/15 - 2 r^4/189 (series of (1 - r coth r) csch^2 r)
    const double x2 = r * r;
    return -1.0 / 3.0 + x2 * (2.0 / 15.0 - x2 * 2.0 / 189.0);
  }
  return -rho_coth_minus_one(r) * csch2_safe(r);
}

double log_sinh(double rho) {
  if (rho > 20.0) return rho - std::log(2.0) + std::log1p(-std::exp(-2.0 * rho));
  return std::log(std::sinh(rho));
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = std::exp(a + s * (b - a));
  }
  if (count > 0) {
    out.front() = lo;
    out.back() = hi;
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = lo + s * (hi - lo);
  }
  return out;
}

}  // namespace hyperlab
