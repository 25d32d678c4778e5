#ifndef SPQ_SPARSE_GRID_HPP
#define SPQ_SPARSE_GRID_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "spq/multi_index.hpp"
#include "spq/univariate_rules.hpp"

namespace spq {

/// One nonzero coordinate of a grid point: dimension plus canonical node.
struct NodeRef {
  Dimension dimension = 0;
  NodeId node;
  friend constexpr auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

/// Sorted by dimension; dimensions sitting on the level-0 origin node are
/// omitted, so the origin has the empty key.
using PointKey = std::vector<NodeRef>;

struct PointKeyHash {
  std::size_t operator()(const PointKey& key) const noexcept;
};

std::string key_to_string(const PointKey& key);

struct Coordinate {
  Dimension dimension = 0;
  double value = 0.0;
};

/// A point of R^J with finitely many coordinates listed; all others are 0.
struct GridPoint {
  PointKey key;
  std::vector<Coordinate> coords;

  double operator[](Dimension j) const;
};

/// Vector-valued integrand; evaluate writes `outputs` values.
struct Integrand {
  std::size_t outputs = 1;
  std::function<void(const GridPoint&, std::span<double>)> evaluate;

  static Integrand scalar(std::function<double(const GridPoint&)> f);
};

/// Raised when the integrand throws; carries the offending point.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const GridPoint& point, const std::string& what);
  const GridPoint& point() const { return point_; }

 private:
  GridPoint point_;
};

/// Function values by canonical point key. Every key is evaluated at most
/// once; batches are evaluated in parallel and inserted serially.
class EvaluationCache {
 public:
  explicit EvaluationCache(std::size_t outputs = 1) : outputs_(outputs) {}

  std::size_t outputs() const { return outputs_; }
  std::size_t size() const { return index_.size(); }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

  /// Pointer to `outputs()` values, or nullptr.
  const double* find(const PointKey& key) const;

  /// Evaluates every point whose key is not cached yet.
  void fill(const std::vector<GridPoint>& points, const Integrand& f, unsigned threads = 1);

 private:
  std::size_t outputs_;
  std::unordered_map<PointKey, std::size_t, PointKeyHash> index_;
  std::vector<double> values_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Product grid of the per-dimension difference rules of nu, in odometer
/// order (last active dimension fastest), with product weights.
struct DifferenceGrid {
  std::vector<GridPoint> points;
  std::vector<double> weights;
};

DifferenceGrid difference_grid(const MultiIndex& nu, RuleFamily family);

/// |G_nu| = prod_j m_{nu_j}.
std::size_t tensor_grid_size(const MultiIndex& nu, RuleFamily family);

/// Delta_nu(f), one value per integrand output.
std::vector<double> tensor_difference(const MultiIndex& nu, const Integrand& f, RuleFamily family,
                                      EvaluationCache& cache, unsigned threads = 1);

/// Batched form: all missing points of all indices are evaluated together.
std::vector<std::vector<double>> tensor_differences(const std::vector<MultiIndex>& nus, const Integrand& f,
                                                    RuleFamily family, EvaluationCache& cache,
                                                    unsigned threads = 1);

/// Full tensor-product quadrature Q_nu, evaluated directly without caching.
std::vector<double> tensor_quadrature(const MultiIndex& nu, const Integrand& f, RuleFamily family);

struct QuadratureEstimate {
  std::vector<double> value;
  std::vector<std::pair<MultiIndex, std::vector<double>>> contributions;
};

/// Q_Lambda(f) = sum over Lambda of Delta_nu(f) in insertion order.
QuadratureEstimate sparse_quadrature(const IndexSet& set, const Integrand& f, RuleFamily family,
                                     unsigned threads = 1);

/// Distinct canonical keys accumulated over a growing collection of indices.
class PointSet {
 public:
  /// Adds the difference grid of nu; returns the number of new keys.
  std::size_t add(const MultiIndex& nu, RuleFamily family);
  std::size_t size() const { return keys_.size(); }
  bool contains(const PointKey& key) const { return keys_.count(key) > 0; }

 private:
  std::unordered_set<PointKey, PointKeyHash> keys_;
};

/// |G_Lambda|, or |G_{Lambda u N(Lambda)}| with the neighbor cap j(Lambda)+K.
std::size_t point_count(const IndexSet& set, RuleFamily family, bool include_neighbors, unsigned K = 1);

/// Distinct points of G_Lambda with their combined sparse-quadrature weight.
struct WeightedPoint {
  GridPoint point;
  double weight = 0.0;
};
std::vector<WeightedPoint> sparse_grid_points(const IndexSet& set, RuleFamily family);

}  // namespace spq

#endif  // SPQ_SPARSE_GRID_HPP
