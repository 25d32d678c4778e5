#include "spq/construction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace spq {

double max_abs_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None:
      return "none";
    case StopReason::IndexLimit:
      return "index-limit";
    case StopReason::PointLimit:
      return "point-limit";
    case StopReason::Exhausted:
      return "exhausted";
  }
  return "?";
}

void DriverConfig::validate() const {
  if (n_max == 0 && points_max == 0) throw std::invalid_argument("driver needs an index or point bound");
  if (K < 1) throw std::invalid_argument("neighbor lookahead K must be >= 1");
  if (max_dimension < 1) throw std::invalid_argument("max_dimension must be >= 1");
  if (mode == DriverMode::Apriori) {
    if (!tau) throw std::invalid_argument("a-priori construction requires a tau sequence");
    tau->check(std::min<Dimension>(10000, max_dimension));
  }
  if (mode == DriverMode::Aposteriori && !norm) throw std::invalid_argument("a-posteriori construction requires a norm");
}

namespace {

using Priority = std::tuple<int, double, MultiIndex>;

struct Candidate {
  BWeight b;
  std::vector<double> delta;  // empty until evaluated
  double score = 0.0;
};

// Neumaier-compensated running sum, so adding and removing neighbor
// differences does not drift.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

class Engine {
 public:
  Engine(const DriverConfig& config, const Integrand& f)
      : config_(config), f_(f), cache_(f.outputs), evaluate_neighbors_(config.mode == DriverMode::Aposteriori || config.track_union) {
    config_.validate();
    neighbor_sum_.resize(f.outputs);
  }

  DriverResult run() {
    try {
      start();
      while (true) {
        const StopReason reason = should_stop();
        if (reason != StopReason::None) {
          trace_.stop = reason;
          break;
        }
        adopt(select());
      }
    } catch (const EvaluationError& e) {
      throw DriverError(e.what(), trace_);
    }
    DriverResult result{set_, {}, std::move(trace_), {}, cache_.misses()};
    result.estimate.value = estimate_;
    result.estimate.contributions = std::move(contributions_);
    for (const auto& [mu, cand] : frontier_) result.neighbors.push_back(mu);
    return result;
  }

 private:
  Dimension cap() const {
    const std::uint64_t c = static_cast<std::uint64_t>(set_.dim_bound()) + config_.K;
    return static_cast<Dimension>(std::min<std::uint64_t>(c, config_.max_dimension));
  }

  void start() {
    const MultiIndex zero;
    auto delta = tensor_difference(zero, f_, config_.family, cache_, config_.threads);
    estimate_ = delta;
    contributions_.emplace_back(zero, delta);
    lambda_points_.add(zero, config_.family);
    union_points_.add(zero, config_.family);

    std::vector<MultiIndex> fresh;
    open_dimensions(fresh);
    add_candidates(fresh);
    record(zero, std::numeric_limits<double>::quiet_NaN(), delta);
  }

  void open_dimensions(std::vector<MultiIndex>& fresh) {
    const Dimension new_cap = cap();
    if (config_.family.max_level() < 1) return;
    for (Dimension j = opened_ + 1; j <= new_cap; ++j) fresh.push_back(MultiIndex::unit(j));
    opened_ = std::max(opened_, new_cap);
  }

  void add_candidates(std::vector<MultiIndex>& fresh) {
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    for (const auto& mu : fresh) {
      Candidate c;
      if (config_.mode == DriverMode::Apriori) c.b = b_weight(mu, *config_.tau, config_.tau->r);
      if (!evaluate_neighbors_) queue_.insert(priority(c, mu));
      frontier_.emplace(mu, std::move(c));
      union_points_.add(mu, config_.family);
    }
    if (!evaluate_neighbors_ || fresh.empty()) return;
    auto deltas = tensor_differences(fresh, f_, config_.family, cache_, config_.threads);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      auto& c = frontier_.at(fresh[i]);
      c.delta = std::move(deltas[i]);
      c.score = config_.norm ? config_.norm(c.delta) : max_abs_norm(c.delta);
      if (config_.work_balanced) c.score /= static_cast<double>(tensor_grid_size(fresh[i], config_.family));
      for (std::size_t o = 0; o < f_.outputs; ++o) neighbor_sum_[o].add(c.delta[o]);
      queue_.insert(priority(c, fresh[i]));
    }
  }

  StopReason should_stop() const {
    if (config_.n_max > 0 && set_.size() >= config_.n_max) return StopReason::IndexLimit;
    if (config_.points_max > 0) {
      bool on_union = config_.mode == DriverMode::Aposteriori;
      if (config_.budget == PointBudget::Lambda) on_union = false;
      if (config_.budget == PointBudget::Union) on_union = true;
      const std::size_t used = on_union ? union_points_.size() : lambda_points_.size();
      if (used >= config_.points_max) return StopReason::PointLimit;
    }
    if (frontier_.empty()) return StopReason::Exhausted;
    return StopReason::None;
  }

  // Smaller is better; ties fall to the lexicographically smaller index
  // through the queue ordering. Unsaturated b compare by value so that equal
  // products are not split by log rounding.
  Priority priority(const Candidate& c, const MultiIndex& mu) const {
    if (config_.mode == DriverMode::Apriori) {
      return c.b.saturated ? Priority{1, c.b.log_value, mu} : Priority{0, c.b.value, mu};
    }
    return Priority{0, std::isnan(c.score) ? std::numeric_limits<double>::infinity() : -c.score, mu};
  }

  std::map<MultiIndex, Candidate>::iterator select() {
    auto top = queue_.begin();
    auto it = frontier_.find(std::get<2>(*top));
    queue_.erase(top);
    return it;
  }

  void adopt(std::map<MultiIndex, Candidate>::iterator it) {
    const MultiIndex nu = it->first;
    Candidate cand = std::move(it->second);
    frontier_.erase(it);
    if (evaluate_neighbors_) {
      for (std::size_t o = 0; o < f_.outputs; ++o) neighbor_sum_[o].add(-cand.delta[o]);
    }
    if (cand.delta.empty()) cand.delta = tensor_difference(nu, f_, config_.family, cache_, config_.threads);
    for (std::size_t o = 0; o < estimate_.size(); ++o) estimate_[o] += cand.delta[o];
    contributions_.emplace_back(nu, cand.delta);
    set_.insert(nu);
    lambda_points_.add(nu, config_.family);
    for (const auto& e : nu.support()) active_.insert(e.dimension);

    std::vector<MultiIndex> fresh;
    for (Dimension k : active_) {
      if (nu[k] + 1 > config_.family.max_level()) continue;
      auto mu = nu.incremented(k);
      if (frontier_.count(mu) == 0 && !set_.contains(mu) && set_.can_insert(mu)) fresh.push_back(std::move(mu));
    }
    open_dimensions(fresh);
    add_candidates(fresh);

    const double indicator = config_.mode == DriverMode::Apriori ? cand.b.value : cand.score;
    record(nu, indicator, cand.delta);
  }

  void record(const MultiIndex& nu, double indicator, const std::vector<double>& delta) {
    StepRecord s;
    s.step = trace_.steps.size();
    s.index = nu;
    s.indicator = indicator;
    s.delta = delta;
    s.estimate = estimate_;
    s.indices = set_.size();
    s.neighbors = frontier_.size();
    s.points_lambda = lambda_points_.size();
    s.points_union = union_points_.size();
    if (evaluate_neighbors_) {
      std::vector<double> neighbor_sum(f_.outputs);
      for (std::size_t o = 0; o < f_.outputs; ++o) neighbor_sum[o] = neighbor_sum_[o].value();
      s.union_estimate = estimate_;
      for (std::size_t o = 0; o < f_.outputs; ++o) s.union_estimate[o] += neighbor_sum[o];
      s.heuristic = config_.norm ? config_.norm(neighbor_sum) : max_abs_norm(neighbor_sum);
    }
    trace_.steps.push_back(std::move(s));
  }

  DriverConfig config_;
  const Integrand& f_;
  EvaluationCache cache_;
  bool evaluate_neighbors_;
  IndexSet set_;
  std::map<MultiIndex, Candidate> frontier_;
  std::set<Priority> queue_;
  std::vector<CompensatedSum> neighbor_sum_;
  std::set<Dimension> active_;
  Dimension opened_ = 0;
  PointSet lambda_points_;
  PointSet union_points_;
  std::vector<double> estimate_;
  std::vector<std::pair<MultiIndex, std::vector<double>>> contributions_;
  RunTrace trace_;
};

}  // namespace

DriverResult run_apriori(const DriverConfig& config, const Integrand& f) {
  DriverConfig c = config;
  c.mode = DriverMode::Apriori;
  return Engine(c, f).run();
}

DriverResult run_aposteriori(const DriverConfig& config, const Integrand& f) {
  DriverConfig c = config;
  c.mode = DriverMode::Aposteriori;
  return Engine(c, f).run();
}

DriverResult run_driver(const DriverConfig& config, const Integrand& f) {
  return config.mode == DriverMode::Apriori ? run_apriori(config, f) : run_aposteriori(config, f);
}

double stopping_indicator(const RunTrace& trace) {
  if (trace.steps.empty()) throw std::logic_error("stopping indicator requested on an empty trace");
  return trace.steps.back().heuristic;
}

}  // namespace spq
