#include "spq/sparse_grid.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#include "spq/parallel.hpp"

namespace spq {
namespace {

struct AxisRule {
  Dimension dimension;
  std::span<const double> nodes;
  std::span<const double> weights;
  std::span<const NodeId> ids;
};

// Visits the product of the given axes in odometer order (last axis
// fastest), passing the per-axis positions.
template <typename Visit>
void for_each_product(const std::vector<AxisRule>& axes, Visit&& visit) {
  std::vector<std::size_t> pos(axes.size(), 0);
  for (const auto& a : axes) {
    if (a.nodes.empty()) return;
  }
  while (true) {
    visit(pos);
    std::size_t d = axes.size();
    while (d > 0) {
      --d;
      if (++pos[d] < axes[d].nodes.size()) break;
      pos[d] = 0;
      if (d == 0) return;
    }
    if (axes.empty()) return;
  }
}

GridPoint make_point(const std::vector<AxisRule>& axes, const std::vector<std::size_t>& pos) {
  GridPoint p;
  p.key.reserve(axes.size());
  p.coords.reserve(axes.size());
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const NodeId id = axes[d].ids[pos[d]];
    if (id.is_origin()) continue;
    p.key.push_back(NodeRef{axes[d].dimension, id});
    p.coords.push_back(Coordinate{axes[d].dimension, axes[d].nodes[pos[d]]});
  }
  return p;
}

}  // namespace

std::size_t PointKeyHash::operator()(const PointKey& key) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : key) {
    const std::size_t packed = (static_cast<std::size_t>(r.dimension) << 32) |
                               (static_cast<std::size_t>(r.node.level) << 16) | r.node.index;
    h ^= packed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::string key_to_string(const PointKey& key) {
  std::string s;
  for (const auto& r : key) {
    if (!s.empty()) s.push_back(' ');
    s += std::to_string(r.dimension) + ":" + std::to_string(r.node.level) + ":" + std::to_string(r.node.index);
  }
  return s;
}

double GridPoint::operator[](Dimension j) const {
  for (const auto& c : coords) {
    if (c.dimension == j) return c.value;
  }
  return 0.0;
}

Integrand Integrand::scalar(std::function<double(const GridPoint&)> f) {
  return Integrand{1, [f = std::move(f)](const GridPoint& p, std::span<double> out) { out[0] = f(p); }};
}

EvaluationError::EvaluationError(const GridPoint& point, const std::string& what)
    : std::runtime_error("integrand failed at point {" + key_to_string(point.key) + "}: " + what), point_(point) {}

const double* EvaluationCache::find(const PointKey& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : values_.data() + it->second;
}

void EvaluationCache::fill(const std::vector<GridPoint>& points, const Integrand& f, unsigned threads) {
  if (f.outputs != outputs_) throw std::invalid_argument("integrand output count does not match cache");
  std::vector<const GridPoint*> missing;
  std::unordered_set<PointKey, PointKeyHash> pending;
  for (const auto& p : points) {
    if (index_.count(p.key) > 0 || pending.count(p.key) > 0) {
      ++hits_;
      continue;
    }
    pending.insert(p.key);
    missing.push_back(&p);
  }
  std::vector<double> buffer(missing.size() * outputs_);
  parallel_for(missing.size(), threads, [&](std::size_t i) {
    try {
      f.evaluate(*missing[i], std::span<double>(buffer.data() + i * outputs_, outputs_));
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(*missing[i], e.what());
    }
  });
  for (std::size_t i = 0; i < missing.size(); ++i) {
    index_.emplace(missing[i]->key, values_.size());
    values_.insert(values_.end(), buffer.begin() + static_cast<std::ptrdiff_t>(i * outputs_),
                   buffer.begin() + static_cast<std::ptrdiff_t>((i + 1) * outputs_));
    ++misses_;
  }
}

DifferenceGrid difference_grid(const MultiIndex& nu, RuleFamily family) {
  std::vector<AxisRule> axes;
  for (const auto& e : nu.support()) {
    const auto& rule = difference_rule(family, e.level);
    axes.push_back(AxisRule{e.dimension, rule.nodes, rule.weights, rule.ids});
  }
  DifferenceGrid grid;
  if (axes.empty()) {
    // Delta_0 = Q_0: the origin with weight 1
    grid.points.emplace_back();
    grid.weights.push_back(level_nodes(family, 0).weights[0]);
    return grid;
  }
  for_each_product(axes, [&](const std::vector<std::size_t>& pos) {
    double w = 1.0;
    for (std::size_t d = 0; d < axes.size(); ++d) w *= axes[d].weights[pos[d]];
    grid.points.push_back(make_point(axes, pos));
    grid.weights.push_back(w);
  });
  return grid;
}

std::size_t tensor_grid_size(const MultiIndex& nu, RuleFamily family) {
  std::size_t n = 1;
  for (const auto& e : nu.support()) n *= family.count(e.level);
  return n;
}

std::vector<std::vector<double>> tensor_differences(const std::vector<MultiIndex>& nus, const Integrand& f,
                                                    RuleFamily family, EvaluationCache& cache, unsigned threads) {
  std::vector<DifferenceGrid> grids;
  grids.reserve(nus.size());
  std::vector<GridPoint> all;
  for (const auto& nu : nus) {
    grids.push_back(difference_grid(nu, family));
    all.insert(all.end(), grids.back().points.begin(), grids.back().points.end());
  }
  cache.fill(all, f, threads);

  std::vector<std::vector<double>> out;
  out.reserve(nus.size());
  for (const auto& grid : grids) {
    std::vector<double> sum(f.outputs, 0.0);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const double* v = cache.find(grid.points[i].key);
      for (std::size_t o = 0; o < f.outputs; ++o) sum[o] += grid.weights[i] * v[o];
    }
    out.push_back(std::move(sum));
  }
  return out;
}

std::vector<double> tensor_difference(const MultiIndex& nu, const Integrand& f, RuleFamily family,
                                      EvaluationCache& cache, unsigned threads) {
  return tensor_differences({nu}, f, family, cache, threads).front();
}

std::vector<double> tensor_quadrature(const MultiIndex& nu, const Integrand& f, RuleFamily family) {
  std::vector<AxisRule> axes;
  for (const auto& e : nu.support()) {
    const auto& rule = level_nodes(family, e.level);
    axes.push_back(AxisRule{e.dimension, rule.nodes, rule.weights, rule.ids});
  }
  std::vector<double> sum(f.outputs, 0.0);
  std::vector<double> value(f.outputs);
  if (axes.empty()) {
    f.evaluate(GridPoint{}, value);
    return value;
  }
  for_each_product(axes, [&](const std::vector<std::size_t>& pos) {
    double w = 1.0;
    GridPoint p;
    for (std::size_t d = 0; d < axes.size(); ++d) {
      w *= axes[d].weights[pos[d]];
      p.coords.push_back(Coordinate{axes[d].dimension, axes[d].nodes[pos[d]]});
    }
    f.evaluate(p, value);
    for (std::size_t o = 0; o < f.outputs; ++o) sum[o] += w * value[o];
  });
  return sum;
}

QuadratureEstimate sparse_quadrature(const IndexSet& set, const Integrand& f, RuleFamily family, unsigned threads) {
  EvaluationCache cache(f.outputs);
  const auto deltas = tensor_differences(set.order(), f, family, cache, threads);
  QuadratureEstimate est;
  est.value.assign(f.outputs, 0.0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    for (std::size_t o = 0; o < f.outputs; ++o) est.value[o] += deltas[i][o];
    est.contributions.emplace_back(set.order()[i], deltas[i]);
  }
  return est;
}

std::size_t PointSet::add(const MultiIndex& nu, RuleFamily family) {
  std::size_t added = 0;
  for (auto& p : difference_grid(nu, family).points) {
    if (keys_.insert(std::move(p.key)).second) ++added;
  }
  return added;
}

std::size_t point_count(const IndexSet& set, RuleFamily family, bool include_neighbors, unsigned K) {
  PointSet points;
  for (const auto& nu : set.order()) points.add(nu, family);
  if (include_neighbors) {
    for (const auto& mu : forward_neighbors(set, K, NeighborLimits{family.max_level(), NeighborLimits{}.max_dimension})) {
      points.add(mu, family);
    }
  }
  return points.size();
}

std::vector<WeightedPoint> sparse_grid_points(const IndexSet& set, RuleFamily family) {
  std::vector<WeightedPoint> out;
  std::unordered_map<PointKey, std::size_t, PointKeyHash> where;
  for (const auto& nu : set.order()) {
    auto grid = difference_grid(nu, family);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const auto [it, inserted] = where.emplace(grid.points[i].key, out.size());
      if (inserted) out.push_back(WeightedPoint{std::move(grid.points[i]), 0.0});
      out[it->second].weight += grid.weights[i];
    }
  }
  return out;
}

}  // namespace spq
