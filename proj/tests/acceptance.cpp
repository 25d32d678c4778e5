// Acceptance checks. Usage: spq_acceptance <1..8>. Prints one line
// "AC<n> PASS|FAIL ..." and exits nonzero on failure.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "spq/construction.hpp"
#include "spq/experiment.hpp"
#include "spq/hermite.hpp"
#include "spq/problems.hpp"

using namespace spq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// detail lines go to stdout before the verdict so ctest shows them
void note(const std::string& s) { std::printf("  %s\n", s.c_str()); }

int verdict(int ac, bool pass, const std::string& summary) {
  std::printf("AC%d %s %s\n", ac, pass ? "PASS" : "FAIL", summary.c_str());
  return pass ? 0 : 1;
}

double axis_value(const Checkpoint& c, XAxis axis) {
  switch (axis) {
    case XAxis::Indices:
      return static_cast<double>(c.n_indices);
    case XAxis::PointsLambda:
      return static_cast<double>(c.n_points_lambda);
    case XAxis::PointsUnion:
      return static_cast<double>(c.n_points_union);
  }
  return 0.0;
}

// log-log interpolation of the error at x; NaN if x is outside the record
double error_at(const ConvergenceRecord& r, XAxis axis, double x) {
  const auto& cp = r.checkpoints;
  for (std::size_t i = 1; i < cp.size(); ++i) {
    const double x0 = axis_value(cp[i - 1], axis), x1 = axis_value(cp[i], axis);
    if (x0 <= x && x <= x1 && x1 > x0 && cp[i - 1].abs_error > 0 && cp[i].abs_error > 0) {
      const double t = std::log(x / x0) / std::log(x1 / x0);
      return std::exp((1 - t) * std::log(cp[i - 1].abs_error) + t * std::log(cp[i].abs_error));
    }
  }
  return std::nan("");
}

bool within(double x, double target, double tol) { return std::isfinite(x) && std::abs(x - target) <= tol; }

// ---------------------------------------------------------------------------

int ac1() {
  const auto t0 = Clock::now();
  constexpr double tol = 1e-9;
  constexpr int n_max = 29;
  bool ok = true;
  for (RuleTag tag : {RuleTag::GH2, RuleTag::GK}) {
    const RuleFamily fam(tag);
    const auto q = quadrature_of_hermite(fam, 3, n_max);
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) worst = std::max(worst, std::abs(q[n] - (n == 0 ? 1.0 : 0.0)));
    note(std::string(fam.name()) + " l=3 points=" + std::to_string(fam.count(3)) + fmt(" max|Q(H_n)-d_n0|=%.3g", worst));
    ok = ok && worst <= tol;
  }
  const double t = seconds_since(t0);
  return verdict(1, ok && t < 1.0, fmt("exactness n<=29 at l=3 for gh2/gk, %.3f s", t));
}

int ac2() {
  const auto t0 = Clock::now();
  constexpr double tol = 1e-6;
  constexpr double gh1_bound = 1.536451;
  struct Case {
    RuleTag tag;
    int top;
    double bound;
  };
  bool ok = true;
  for (const Case& c : {Case{RuleTag::GH2, 5, 1.0}, Case{RuleTag::GK, 4, 1.0}, Case{RuleTag::TGKP, 6, 1.0},
                        Case{RuleTag::GH1, 20, gh1_bound}}) {
    const RuleFamily fam(c.tag);
    double worst = 0.0;
    for (int l = 0; l <= c.top; ++l) worst = std::max(worst, verify_boundedness(fam, l, 150));
    note(std::string(fam.name()) + " l<=" + std::to_string(c.top) + fmt(" max|Q_l(H_n)|=%.9f", worst));
    ok = ok && worst <= c.bound + tol;
  }
  const double t = seconds_since(t0);
  return verdict(2, ok && t < 5.0, fmt("boundedness n<=150, %.3f s", t));
}

ExperimentConfig example1(double alpha, RuleTag rule, DriverMode mode) {
  ExperimentConfig c;
  c.problem = "example1";
  c.alpha = alpha;
  c.rule = RuleFamily(rule);
  c.mode = mode;
  return c;
}

int ac3() {
  constexpr double target = 2.0, tol = 0.5;
  constexpr double stagnation_factor = 10.0;
  constexpr double matched_points = 1e4;
  bool ok = true;
  double gk_err = 0, tgkp_err = 0;
  for (RuleTag tag : {RuleTag::GH1, RuleTag::GH2, RuleTag::GK, RuleTag::TGKP}) {
    auto c = example1(2.0, tag, DriverMode::Aposteriori);
    c.nmax = 10000;
    c.pointsmax = 0;
    const auto res = run_experiment(c);
    const double s = fit_slope(res.record, XAxis::Indices, 1e2, 1e4);
    const double e = error_at(res.record, XAxis::PointsUnion, matched_points);
    note(std::string(c.rule.name()) + fmt(" slope=%.3f", s) + fmt(" err@1e4pts=%.3g", e) +
         fmt(" final_err=%.3g", res.record.checkpoints.back().abs_error));
    if (tag == RuleTag::GK) gk_err = e;
    if (tag == RuleTag::TGKP) tgkp_err = e;
    if (tag != RuleTag::TGKP) ok = ok && within(s, target, tol);
  }
  ok = ok && std::isfinite(gk_err) && std::isfinite(tgkp_err) && tgkp_err >= stagnation_factor * gk_err;
  return verdict(3, ok, fmt("slopes 2+-0.5 for gh1/gh2/gk, tgkp/gk error ratio %.3g", tgkp_err / gk_err));
}

int ac4() {
  constexpr double tol = 0.5;
  bool ok = true;
  for (double alpha : {1.0, 2.0, 3.0}) {
    for (DriverMode mode : {DriverMode::Apriori, DriverMode::Aposteriori}) {
      auto c = example1(alpha, RuleTag::GK, mode);
      c.accounting = Accounting::Union;
      c.pointsmax = 100000;
      const auto res = run_experiment(c);
      const double s = fit_slope(res.record, XAxis::PointsUnion, 1e2, 0);
      note(fmt("alpha=%.0f", alpha) + (mode == DriverMode::Apriori ? " apriori" : " aposteriori") +
           fmt(" slope=%.3f", s) + fmt(" target=%.1f", alpha - 0.5));
      ok = ok && within(s, alpha - 0.5, tol);
    }
  }
  return verdict(4, ok, "union-set slopes alpha-1/2 +- 0.5");
}

ExperimentConfig pde(RuleTag rule, DriverMode mode, int qoi) {
  ExperimentConfig c;
  c.problem = "pde";
  c.alpha = 2.0;
  c.rule = RuleFamily(rule);
  c.mode = mode;
  c.qoi = qoi;
  return c;
}

int ac5() {
  constexpr double target = 2.0, tol = 0.5;
  constexpr double reference_points = 1e5;
  constexpr double run_points = 3e4;
  bool ok = true;
  for (int qoi : {0, 1}) {
    auto rc = pde(RuleTag::GK, DriverMode::Aposteriori, qoi);
    rc.pointsmax = static_cast<std::size_t>(reference_points);
    const auto ref = make_reference(rc);
    note(std::string(qoi ? "f2" : "f1") + " reference=" + format_double(ref.value));
    std::vector<std::pair<RuleTag, ConvergenceRecord>> runs;
    for (RuleTag tag : {RuleTag::GK, RuleTag::GH1, RuleTag::GH2, RuleTag::TGKP}) {
      auto c = pde(tag, DriverMode::Aposteriori, qoi);
      c.pointsmax = static_cast<std::size_t>(run_points);
      c.reference = "value:" + format_double(ref.value);
      auto res = run_experiment(c);
      const double si = fit_slope(res.record, XAxis::Indices, 1e2, 0);
      const double sp = fit_slope(res.record, XAxis::PointsLambda, 1e2, 0);
      note("  " + std::string(c.rule.name()) + fmt(" slope_indices=%.3f", si) + fmt(" slope_points=%.3f", sp));
      if (tag == RuleTag::GK) ok = ok && within(si, target, tol) && within(sp, target, tol);
      runs.emplace_back(tag, std::move(res.record));
    }
    // rank the rules on a half-decade grid from 10^2 up to the range all runs cover
    double common = std::numeric_limits<double>::infinity();
    for (const auto& [tag, rec] : runs) common = std::min(common, axis_value(rec.checkpoints.back(), XAxis::PointsLambda));
    std::vector<double> matched;
    for (int k = 4; std::pow(10.0, k / 2.0) <= common; ++k) matched.push_back(std::pow(10.0, k / 2.0));
    ok = ok && matched.size() >= 2;
    for (double x : matched) {
      std::string line = fmt("  at %.0f points:", x);
      std::vector<double> e;
      for (const auto& [tag, rec] : runs) {
        e.push_back(error_at(rec, XAxis::PointsLambda, x));
        line += " " + std::string(RuleFamily(tag).name()) + fmt("=%.3g", e.back());
      }
      note(line);
      // runs are ordered gk, gh1, gh2, tgkp
      for (double v : e) ok = ok && std::isfinite(v);
      ok = ok && e[0] <= e[1] && e[0] <= e[2] && e[3] >= e[1] && e[3] >= e[2];
    }
  }
  return verdict(5, ok, "pde gk slopes 2+-0.5, gk best and tgkp worst at matched points");
}

int ac6() {
  constexpr double required_fraction = 0.8;
  auto a = example1(2.0, RuleTag::GK, DriverMode::Apriori);
  auto p = example1(2.0, RuleTag::GK, DriverMode::Aposteriori);
  a.nmax = p.nmax = 10000;
  a.pointsmax = p.pointsmax = 0;
  const auto ra = run_experiment(a), rp = run_experiment(p);
  std::size_t matched = 0, better = 0;
  std::size_t i = 0, j = 0;
  while (i < ra.record.checkpoints.size() && j < rp.record.checkpoints.size()) {
    const auto& ca = ra.record.checkpoints[i];
    const auto& cp = rp.record.checkpoints[j];
    if (ca.n_indices < cp.n_indices) {
      ++i;
    } else if (cp.n_indices < ca.n_indices) {
      ++j;
    } else {
      ++matched;
      better += cp.abs_error <= ca.abs_error;
      ++i;
      ++j;
    }
  }
  const double frac = matched ? static_cast<double>(better) / static_cast<double>(matched) : 0.0;
  note("example1 aposteriori <= apriori at " + std::to_string(better) + "/" + std::to_string(matched) + " checkpoints");

  // the a-priori order depends only on b_nu, never on the integrand values
  std::vector<std::vector<MultiIndex>> orders;
  for (int qoi : {0, 1}) {
    auto c = pde(RuleTag::GK, DriverMode::Apriori, qoi);
    c.nmax = 2000;
    c.pointsmax = 0;
    const auto r = run_driver(make_driver_config(c), make_integrand(c));
    orders.push_back(r.set.order());
  }
  const bool same = orders[0] == orders[1];
  note(std::string("pde apriori index sets for f1 and f2 ") + (same ? "identical" : "differ") + " (" +
       std::to_string(orders[0].size()) + " indices)");
  return verdict(6, frac >= required_fraction && matched > 0 && same,
                 fmt("aposteriori better at %.0f%% of checkpoints", 100 * frac));
}

int ac7() {
  constexpr double target = -0.5, tol = 0.15;
  constexpr double separation = 100.0;
  constexpr Dimension J = 1000;
  constexpr std::size_t trials = 20;
  constexpr std::uint64_t seed = 1;
  constexpr std::size_t sparse_evaluations = 10000;
  const Example1Problem prob{2.0, J};
  const double ref = prob.reference();
  const auto f = prob.integrand();

  std::vector<double> lx, ly;
  double mc_err_1e4 = 0;
  for (std::size_t M : {100u, 1000u, 10000u}) {
    const auto r = mc_estimate(f, J, M, trials, seed, ref, 1);
    note("mc M=" + std::to_string(M) + fmt(" mean_abs_error=%.4g", r.mean_abs_error));
    lx.push_back(std::log(static_cast<double>(M)));
    ly.push_back(std::log(r.mean_abs_error));
    if (M == 10000) mc_err_1e4 = r.mean_abs_error;
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  const double slope = sxy / sxx;

  auto c = example1(2.0, RuleTag::GK, DriverMode::Aposteriori);
  c.J = J;
  c.pointsmax = sparse_evaluations;
  const auto run = run_driver(make_driver_config(c), make_integrand(c));
  double sparse_err = std::nan("");
  std::size_t used = 0;
  for (const auto& s : run.trace.steps) {
    if (s.points_union > sparse_evaluations) break;
    sparse_err = std::abs(s.estimate[0] - ref);
    used = s.points_union;
  }
  note("sparse gk error=" + fmt("%.3g", sparse_err) + " with " + std::to_string(used) + " evaluations");
  const bool ok = within(slope, target, tol) && std::isfinite(sparse_err) && sparse_err * separation <= mc_err_1e4;
  return verdict(7, ok, fmt("mc slope %.3f", slope) + fmt(", mc/sparse error ratio %.3g", mc_err_1e4 / sparse_err));
}

// ---------------------------------------------------------------------------

bool prop_exactness() {
  std::mt19937 rng(2024);
  auto moment = [](int k) {
    if (k % 2) return 0.0;
    double m = 1.0;
    for (int i = k - 1; i > 1; i -= 2) m *= i;
    return m;
  };
  for (RuleTag tag : {RuleTag::GH1, RuleTag::GH2, RuleTag::GK}) {
    const RuleFamily fam(tag);
    for (int trial = 0; trial < 20; ++trial) {
      IndexSet set;
      const NeighborLimits limits{std::min(fam.max_level(), 3), 3};
      while (set.size() < 12) {
        const auto n = forward_neighbors(set, 1, limits);
        if (n.empty()) break;
        set.insert(n[rng() % n.size()]);
      }
      const auto& nu = set.order()[rng() % set.size()];
      std::vector<int> k(3);
      double want = 1.0;
      for (Dimension j = 1; j <= 3; ++j) {
        // Q_nu is exact for degree 2 m - 1 (gh) or the tabulated gk degree
        const int gk_deg[] = {1, 5, 15, 29, 51};
        const int deg = tag == RuleTag::GK ? gk_deg[nu[j]] : 2 * static_cast<int>(fam.count(nu[j])) - 1;
        k[j - 1] = static_cast<int>(rng() % (std::min(deg, 14) + 1));
        want *= moment(k[j - 1]);
      }
      const auto f = Integrand::scalar([k](const GridPoint& p) {
        double v = 1.0;
        for (Dimension j = 1; j <= 3; ++j) v *= std::pow(p[j], k[j - 1]);
        return v;
      });
      if (std::abs(sparse_quadrature(set, f, fam).value[0] - want) > 1e-10 * std::max(1.0, want)) return false;
    }
  }
  return true;
}

bool prop_b_monotone() {
  std::mt19937 rng(5);
  const auto tau = TauSequence::power(1.5, 15);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> dense(12);
    for (auto& v : dense) v = static_cast<int>(rng() % 9) * (rng() % 3 == 0);
    const auto nu = MultiIndex::from_dense(dense);
    const Dimension k = 1 + rng() % 14;
    if (b_weight(nu.incremented(k), tau, 15).value < b_weight(nu, tau, 15).value) return false;
  }
  return true;
}

bool prop_admissible() {
  for (DriverMode mode : {DriverMode::Apriori, DriverMode::Aposteriori}) {
    auto c = example1(1.5, RuleTag::GK, mode);
    c.J = 1000;
    c.nmax = 400;
    c.pointsmax = 0;
    const auto r = run_driver(make_driver_config(c), make_integrand(c));
    std::vector<MultiIndex> prefix;
    for (const auto& s : r.trace.steps) {
      prefix.push_back(s.index);
      if (!is_admissible(prefix)) return false;
    }
  }
  return true;
}

bool prop_telescoping() {
  auto f = [](double y) { return std::cos(y) + 0.1 * y * y * y * y + std::exp(0.3 * y); };
  for (const auto& fam : RuleFamily::all()) {
    double partial = 0.0;
    for (int l = 0; l <= std::min(fam.max_level(), 12); ++l) {
      const auto& d = difference_rule(fam, l);
      for (std::size_t k = 0; k < d.size(); ++k) partial += d.weights[k] * f(d.nodes[k]);
      const auto& q = level_nodes(fam, l);
      double direct = 0.0;
      for (std::size_t k = 0; k < q.count(); ++k) direct += q.weights[k] * f(q.nodes[k]);
      if (std::abs(partial - direct) > 1e-13) return false;
    }
  }
  return true;
}

bool prop_cache() {
  std::mt19937 rng(9);
  for (const auto& fam : RuleFamily::all()) {
    IndexSet set;
    const NeighborLimits limits{std::min(fam.max_level(), 3), 5};
    while (set.size() < 40) {
      const auto n = forward_neighbors(set, 1, limits);
      if (n.empty()) break;
      set.insert(n[rng() % n.size()]);
    }
    std::atomic<std::size_t> calls{0};
    const auto f = Integrand::scalar([&](const GridPoint& p) {
      ++calls;
      return std::cos(p[1] + 2 * p[2]);
    });
    EvaluationCache cache;
    tensor_differences(set.order(), f, fam, cache, 4);
    if (calls.load() != point_count(set, fam, false) || cache.size() != calls.load()) return false;
  }
  return true;
}

bool prop_fem() {
  for (std::size_t n : {8u, 64u, 1024u}) {
    LognormalPDEProblem p;
    p.mesh_n = n;
    p.J = n - 1;
    const auto u = assemble_and_solve(GridPoint{}, p);
    const double q = qoi_eval(u, p.h()).f1;
    if (std::abs(q - 1.0 / 12.0) > 2 * p.h() * p.h()) return false;
  }
  return true;
}

bool prop_threads() {
  auto c = example1(2.0, RuleTag::GK, DriverMode::Aposteriori);
  c.nmax = 400;
  c.accounting = Accounting::Union;
  std::vector<std::string> out;
  for (unsigned t : {1u, 8u}) {
    c.threads = t;
    const auto r = run_experiment(c);
    out.push_back(record_csv(r.record) + trace_csv(r.driver.trace, r.reference));
  }
  return out[0] == out[1];
}

int ac8() {
  constexpr double budget_s = 30.0;
  const auto t0 = Clock::now();
  const std::vector<std::pair<const char*, std::function<bool()>>> suites{
      {"polynomial exactness on random admissible sets", prop_exactness},
      {"b_nu monotone under +e_k", prop_b_monotone},
      {"admissible after every step", prop_admissible},
      {"telescoping Q_l = sum Delta_i", prop_telescoping},
      {"cache evaluations = distinct points", prop_cache},
      {"fem |Q(u_h) - 1/12| <= 2h^2", prop_fem},
      {"threads 1 vs 8 bit identical", prop_threads},
  };
  bool ok = true;
  for (const auto& [name, fn] : suites) {
    const bool pass = fn();
    note(std::string(pass ? "ok   " : "FAIL ") + name);
    ok = ok && pass;
  }
  const double t = seconds_since(t0);
  return verdict(8, ok && t < budget_s, fmt("property suites, %.1f s", t));
}

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::vector<std::function<int()>> all{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8};
  try {
    if (which >= 1 && which <= 8) return all[which - 1]();
    int failed = 0;
    for (const auto& f : all) failed += f();
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::printf("AC%d FAIL %s\n", which, e.what());
    return 1;
  }
}
