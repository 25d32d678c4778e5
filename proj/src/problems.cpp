#include "spq/problems.hpp"

#include <cmath>
#include <numbers>

#include "spq/parallel.hpp"
#include "spq/univariate_rules.hpp"

namespace spq {

double example1_eval(const GridPoint& point, double alpha, Dimension J) {
  double sum = 0.0;
  for (const auto& c : point.coords) {
    if (c.dimension > J) continue;
    sum += c.value * std::pow(static_cast<double>(c.dimension), -alpha);
  }
  return std::exp(sum);
}

double example1_reference(double alpha, Dimension J) {
  // smallest terms first
  double zeta = 0.0;
  for (Dimension j = J; j >= 1; --j) zeta += std::pow(static_cast<double>(j), -2.0 * alpha);
  return std::exp(0.5 * zeta);
}

double Example1Problem::operator()(const GridPoint& point) const { return example1_eval(point, alpha, J); }

Integrand Example1Problem::integrand() const {
  const Example1Problem self = *this;
  return Integrand::scalar([self](const GridPoint& p) { return self(p); });
}

double Example1Problem::reference() const { return example1_reference(alpha, J); }

std::vector<double> assemble_and_solve(const GridPoint& point, const LognormalPDEProblem& problem) {
  const std::size_t n = problem.mesh_n;
  if (n < 2) throw std::invalid_argument("PDE mesh needs at least 2 cells");
  const double h = problem.h();

  // kappa at element midpoints
  std::vector<double> kappa(n, problem.kappa0);
  for (const auto& c : point.coords) {
    if (c.dimension > problem.J || c.value == 0.0) continue;
    const double amp = c.value * std::pow(static_cast<double>(c.dimension), -problem.alpha);
    const double freq = std::numbers::pi * static_cast<double>(c.dimension);
    if (point.coords.size() <= 32) {
      for (std::size_t i = 0; i < n; ++i) kappa[i] += amp * std::sin(freq * (static_cast<double>(i) + 0.5) * h);
    } else {
      // rotate (cos, sin) of the angle by one cell per step
      const double step_c = std::cos(freq * h);
      const double step_s = std::sin(freq * h);
      double cs = std::cos(0.5 * freq * h);
      double sn = std::sin(0.5 * freq * h);
      for (std::size_t i = 0; i < n; ++i) {
        kappa[i] += amp * sn;
        const double next_c = cs * step_c - sn * step_s;
        sn = sn * step_c + cs * step_s;
        cs = next_c;
      }
    }
  }

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::exp(kappa[i]);
    if (!std::isfinite(a[i]) || a[i] <= 0.0) {
      throw SolverError("diffusion coefficient not finite at point {" + key_to_string(point.key) + "}");
    }
  }

  // Thomas elimination on the interior unknowns 1..n-1.
  const std::size_t m = n - 1;
  std::vector<double> diag(m), upper(m), rhs(m, problem.g * h);
  for (std::size_t k = 0; k < m; ++k) {
    diag[k] = (a[k] + a[k + 1]) / h;
    upper[k] = k + 1 < m ? -a[k + 1] / h : 0.0;
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double factor = upper[k - 1] / diag[k - 1];  // lower == upper (symmetric)
    diag[k] -= factor * upper[k - 1];
    rhs[k] -= factor * rhs[k - 1];
  }
  std::vector<double> u(n + 1, 0.0);
  u[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) u[k + 1] = (rhs[k] - upper[k] * u[k + 2]) / diag[k];
  for (double v : u) {
    if (!std::isfinite(v)) throw SolverError("non-finite solution at point {" + key_to_string(point.key) + "}");
  }
  return u;
}

QoIVector qoi_eval(const std::vector<double>& u, double h) {
  if (u.size() < 2) return {};
  double s = 0.5 * (u.front() + u.back());
  for (std::size_t i = 1; i + 1 < u.size(); ++i) s += u[i];
  const double f1 = h * s;
  return {f1, f1 * f1};
}

Integrand LognormalPDEProblem::integrand() const {
  const LognormalPDEProblem self = *this;
  return Integrand{2, [self](const GridPoint& p, std::span<double> out) {
                     const auto q = qoi_eval(assemble_and_solve(p, self), self.h());
                     out[0] = q.f1;
                     out[1] = q.f2;
                   }};
}

Integrand LognormalPDEProblem::integrand(int qoi) const {
  if (qoi != 0 && qoi != 1) throw std::invalid_argument("PDE quantity of interest must be 0 (f1) or 1 (f2)");
  const LognormalPDEProblem self = *this;
  return Integrand{1, [self, qoi](const GridPoint& p, std::span<double> out) {
                     const auto q = qoi_eval(assemble_and_solve(p, self), self.h());
                     out[0] = qoi == 0 ? q.f1 : q.f2;
                   }};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t trial, std::uint64_t sample, std::uint64_t dim) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ trial);
  x = splitmix64(x ^ sample);
  x = splitmix64(x ^ dim);
  const double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  return inverse_normal_cdf(u);
}

MCResult mc_estimate(const Integrand& f, Dimension dims, std::size_t samples, std::size_t trials,
                     std::uint64_t seed, double reference, unsigned threads) {
  if (samples < 1 || trials < 1) throw std::invalid_argument("Monte Carlo needs samples >= 1 and trials >= 1");
  MCResult result;
  result.estimates.assign(trials, 0.0);
  parallel_for(trials, threads, [&](std::size_t t) {
    GridPoint point;
    point.coords.resize(dims);
    std::vector<double> value(f.outputs);
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      for (Dimension j = 0; j < dims; ++j) point.coords[j] = Coordinate{j + 1, counter_normal(seed, t, s, j + 1)};
      f.evaluate(point, value);
      sum += value[0];
    }
    result.estimates[t] = sum / static_cast<double>(samples);
  });
  double total = 0.0;
  for (double e : result.estimates) {
    result.errors.push_back(std::abs(e - reference));
    total += result.errors.back();
  }
  result.mean_abs_error = total / static_cast<double>(trials);
  return result;
}

}  // namespace spq
