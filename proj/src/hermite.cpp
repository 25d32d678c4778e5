#include "spq/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spq {
namespace {

constexpr int kMaxDegree = 200;
constexpr int kMaxBoundednessDegree = 150;

void check_degree(int n) {
  if (n < 0 || n > kMaxDegree) {
    throw std::invalid_argument("Hermite degree must be in [0, 200], got " + std::to_string(n));
  }
}

}  // namespace

std::vector<double> hermite_values(int n, double y) {
  check_degree(n);
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = y;
  for (int k = 1; k < n; ++k) {
    h[static_cast<std::size_t>(k) + 1] =
        (y * h[static_cast<std::size_t>(k)] - std::sqrt(static_cast<double>(k)) * h[static_cast<std::size_t>(k) - 1]) /
        std::sqrt(static_cast<double>(k + 1));
  }
  return h;
}

double hermite_eval(int n, double y) { return hermite_values(n, y).back(); }

std::vector<double> quadrature_of_hermite(RuleFamily family, int level, int n_max) {
  check_degree(n_max);
  const auto& rule = level_nodes(family, level);
  std::vector<double> q(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (std::size_t k = 0; k < rule.count(); ++k) {
    const auto h = hermite_values(n_max, rule.nodes[k]);
    for (std::size_t n = 0; n < q.size(); ++n) q[n] += rule.weights[k] * h[n];
  }
  return q;
}

int verify_exactness(RuleFamily family, int level, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("exactness tolerance must be positive");
  const auto q = quadrature_of_hermite(family, level, kMaxDegree);
  int certified = -1;
  for (std::size_t n = 0; n < q.size(); ++n) {
    const double exact = n == 0 ? 1.0 : 0.0;
    if (std::abs(q[n] - exact) > tol) break;
    certified = static_cast<int>(n);
  }
  return certified;
}

double verify_boundedness(RuleFamily family, int level, int n_max) {
  if (n_max < 0 || n_max > kMaxBoundednessDegree) {
    throw std::invalid_argument("boundedness scan degree must be in [0, 150], got " + std::to_string(n_max));
  }
  double worst = 0.0;
  for (double v : quadrature_of_hermite(family, level, n_max)) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace spq
