#ifndef SPQ_HERMITE_HPP
#define SPQ_HERMITE_HPP

#include <vector>

#include "spq/univariate_rules.hpp"

namespace spq {

/// Orthonormal probabilists' Hermite polynomial H_n(y) by forward
/// recurrence, 0 <= n <= 200.
double hermite_eval(int n, double y);

/// H_0(y), ..., H_n(y).
std::vector<double> hermite_values(int n, double y);

/// Q_l(H_n) for n = 0..n_max.
std::vector<double> quadrature_of_hermite(RuleFamily family, int level, int n_max);

/// Largest n* such that |Q_l(H_n) - delta_{n0}| <= tol for every n <= n*.
/// The scan stops at degree 200; returns -1 if even n = 0 fails.
int verify_exactness(RuleFamily family, int level, double tol = 1e-10);

/// max_{n <= n_max} |Q_l(H_n)|, n_max <= 150.
double verify_boundedness(RuleFamily family, int level, int n_max = 150);

}  // namespace spq

#endif  // SPQ_HERMITE_HPP
