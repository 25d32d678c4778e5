#ifndef SPQ_CONSTRUCTION_HPP
#define SPQ_CONSTRUCTION_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spq/multi_index.hpp"
#include "spq/sparse_grid.hpp"
#include "spq/univariate_rules.hpp"

namespace spq {

enum class DriverMode { Apriori, Aposteriori };

/// Reduction of a difference value vector to a nonnegative score.
using Norm = std::function<double(std::span<const double>)>;

/// |x| for scalars, max |x_i| for vectors.
double max_abs_norm(std::span<const double> v);

enum class PointBudget {
  ModeDefault,  // |G_Lambda| a-priori, |G_{Lambda u N}| a-posteriori
  Lambda,
  Union,
};

struct DriverConfig {
  DriverMode mode = DriverMode::Aposteriori;
  RuleFamily family{RuleTag::GK};
  std::size_t n_max = 0;           // 0: unbounded
  std::size_t points_max = 100000;  // 0: unbounded
  unsigned K = 1;
  std::optional<TauSequence> tau;  // required a-priori; carries r
  Norm norm = max_abs_norm;
  bool work_balanced = false;
  /// Evaluate Delta_mu on the neighbor set in a-priori mode as well, so
  /// Q over Lambda u N(Lambda) and the heuristic indicator are recorded.
  bool track_union = false;
  PointBudget budget = PointBudget::ModeDefault;
  Dimension max_dimension = std::numeric_limits<Dimension>::max();
  unsigned threads = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  MultiIndex index;
  double indicator = std::numeric_limits<double>::quiet_NaN();  // b_nu or score
  std::vector<double> delta;
  std::vector<double> estimate;
  std::vector<double> union_estimate;  // empty unless neighbor differences known
  std::size_t indices = 0;             // |Lambda|
  std::size_t neighbors = 0;           // |N(Lambda)|
  std::size_t points_lambda = 0;
  std::size_t points_union = 0;
  double heuristic = std::numeric_limits<double>::quiet_NaN();  // ||sum_N Delta||
};

enum class StopReason { None, IndexLimit, PointLimit, Exhausted };

std::string_view to_string(StopReason reason);

struct RunTrace {
  std::vector<StepRecord> steps;
  StopReason stop = StopReason::None;
};

struct DriverResult {
  IndexSet set;
  QuadratureEstimate estimate;
  RunTrace trace;
  std::vector<MultiIndex> neighbors;  // N(Lambda) at termination
  std::size_t evaluations = 0;
};

/// Integrand failure during a run; carries the trace up to the failure.
class DriverError : public std::runtime_error {
 public:
  DriverError(const std::string& what, RunTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

/// Greedy construction starting from {0}: each step adopts the neighbor
/// with the smallest b_nu. Ties go to the lexicographically smallest index.
DriverResult run_apriori(const DriverConfig& config, const Integrand& f);

/// Greedy construction adopting the neighbor with the largest
/// norm(Delta_mu(f)) (divided by |G_mu| when work balanced).
DriverResult run_aposteriori(const DriverConfig& config, const Integrand& f);

/// Dispatches on config.mode.
DriverResult run_driver(const DriverConfig& config, const Integrand& f);

/// Latest heuristic indicator ||sum_{mu in N} Delta_mu(f)||. Throws
/// std::logic_error for an empty trace.
double stopping_indicator(const RunTrace& trace);

}  // namespace spq

#endif  // SPQ_CONSTRUCTION_HPP
