#ifndef SPQ_PROBLEMS_HPP
#define SPQ_PROBLEMS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spq/sparse_grid.hpp"

namespace spq {

/// f(y) = exp(sum_{j <= J} y_j j^{-alpha}).
struct Example1Problem {
  double alpha = 2.0;
  Dimension J = 10000;

  double operator()(const GridPoint& point) const;
  Integrand integrand() const;
  /// exp(0.5 * sum_{j <= J} j^{-2 alpha}).
  double reference() const;
};

double example1_eval(const GridPoint& point, double alpha, Dimension J = 10000);
double example1_reference(double alpha, Dimension J);

/// -(e^kappa u')' = g on (0,1), u(0) = u(1) = 0, with
/// kappa = kappa0 + sum_j y_j j^{-alpha} sin(pi j x), on a uniform P1 mesh.
struct LognormalPDEProblem {
  double alpha = 2.0;
  std::size_t mesh_n = 1024;  // cells
  Dimension J = 1023;
  double kappa0 = 0.0;
  double g = 1.0;

  double h() const { return 1.0 / static_cast<double>(mesh_n); }
  /// Two outputs: f1 = Q(u), f2 = Q(u)^2.
  Integrand integrand() const;
  /// One output: f1 when qoi == 0, f2 when qoi == 1.
  Integrand integrand(int qoi) const;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nodal values u_0..u_n including the zero boundary values.
std::vector<double> assemble_and_solve(const GridPoint& point, const LognormalPDEProblem& problem);

struct QoIVector {
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Integral of the P1 interpolant (boundary values included in u).
QoIVector qoi_eval(const std::vector<double>& u, double h);

/// Counter-based standard normal stream: sample (trial, sample, dim) is a
/// pure function of the seed, independent of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t trial, std::uint64_t sample, std::uint64_t dim);

struct MCResult {
  std::vector<double> estimates;  // one per trial
  std::vector<double> errors;     // |estimate - reference| per trial
  double mean_abs_error = 0.0;
};

/// Plain Monte Carlo over `dims` i.i.d. standard normal parameters using the
/// first output of f.
MCResult mc_estimate(const Integrand& f, Dimension dims, std::size_t samples, std::size_t trials,
                     std::uint64_t seed, double reference, unsigned threads = 1);

}  // namespace spq

#endif  // SPQ_PROBLEMS_HPP
