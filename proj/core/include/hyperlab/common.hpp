#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};
class SingularMetricError : public Error {
 public:
  using Error::Error;
};
class GridError : public Error {
 public:
  using Error::Error;
};
class SolverError : public Error {
 public:
  using Error::Error;
};
class SupportError : public Error {
 public:
  using Error::Error;
};
class HypothesisError : public Error {
 public:
  using Error::Error;
};
class DegenerateError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp. value() is -inf while nothing (or only -inf) was added.
class LogAccumulator {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  void merge(const LogAccumulator& other) {
    if (other.max_ == kNegInf) return;
    add_scaled(other.max_, other.sum_);
  }
  [[nodiscard]] double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  void add_scaled(double log_max, double sum) {
    if (log_max <= max_) {
      sum_ += sum * std::exp(log_max - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_max) + sum;
      max_ = log_max;
    }
  }
  double max_ = kNegInf;
  double sum_ = 0.0;
};

double log_sum_exp(std::span<const double> log_terms);

// rho*coth(rho) - 1, accurate for all rho >= 0.
double rho_coth_minus_one(double rho);
// coth(rho), with the Laurent branch below 1e-3.
double coth_safe(double rho);
// csch^2(rho), with the Laurent branch below 1e-3.
double csch2_safe(double rho);
// (1 - rho coth rho) csch^2 rho, finite at 0 (limit -1/3).
double one_minus_rho_coth_times_csch2(double rho);
// log(sinh(rho)) for rho > 0 without overflow.
double log_sinh(double rho);

// Central-difference first derivative of a vector-valued map along one coordinate,
// 8th-order stencil. F maps std::vector<double> -> std::vector<double>.
template <class F>
std::vector<double> fd_partial(const F& f, std::vector<double> x, std::size_t dir, double h) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const double x0 = x[dir];
  std::vector<double> out;
  for (int k = 1; k <= 4; ++k) {
    x[dir] = x0 + k * h;
    const auto fp = f(x);
    x[dir] = x0 - k * h;
    const auto fm = f(x);
    if (out.empty()) out.assign(fp.size(), 0.0);
    for (std::size_t i = 0; i < fp.size(); ++i) out[i] += c[k - 1] * (fp[i] - fm[i]);
  }
  for (auto& v : out) v /= h;
  return out;
}

// Scalar 8th-order central first derivative.
template <class F>
double fd_derivative(const F& f, double x, double h) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  double acc = 0.0;
  for (int k = 1; k <= 4; ++k) acc += c[k - 1] * (f(x + k * h) - f(x - k * h));
  return acc / h;
}

// Scalar 8th-order central second derivative.
template <class F>
double fd_second_derivative(const F& f, double x, double h) {
  static constexpr double c[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
  double acc = c[0] * f(x);
  for (int k = 1; k <= 4; ++k) acc += c[k] * (f(x + k * h) + f(x - k * h));
  return acc / (h * h);
}

// Least-squares slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

std::vector<double> logspace(double lo, double hi, std::size_t count);
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace hyperlab
