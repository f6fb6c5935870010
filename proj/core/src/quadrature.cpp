#include "hyperlab/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <map>
#include <mutex>

namespace hyperlab {
namespace {

QuadratureRule reference_rule(int points) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find(points); it != cache.end()) return it->second;

  // legendre_p_zeros returns the non-negative zeros in increasing order.
  const auto zeros = boost::math::legendre_p_zeros<double>(points);
  QuadratureRule rule;
  auto weight = [points](double x) {
    const double dp = boost::math::legendre_p_prime<double>(points, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    rule.nodes.push_back(-*it);
    rule.weights.push_back(weight(*it));
  }
  for (double z : zeros) {
    rule.nodes.push_back(z);
    rule.weights.push_back(weight(z));
  }
  cache.emplace(points, rule);
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int points, double a, double b) {
  QuadratureRule ref = reference_rule(points);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    ref.nodes[i] = mid + half * ref.nodes[i];
    ref.weights[i] *= half;
  }
  return ref;
}

QuadratureRule composite_gauss_legendre(int points, int panels, double a, double b) {
  QuadratureRule out;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto r = gauss_legendre(points, a + p * h, a + (p + 1) * h);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

}  // namespace hyperlab
