#include "spq/univariate_rules.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>

namespace spq {
namespace {

#include "nested_tables.inc"

constexpr std::array<std::size_t, 7> kPattersonCounts = {1, 3, 7, 15, 31, 63, 127};
constexpr std::array<std::size_t, 5> kGenzKeisterCounts = {1, 3, 9, 19, 35};

static_assert(kPattersonTailNodes.size() == kPattersonCounts.back());
static_assert(kGenzKeisterNodes.size() == kGenzKeisterCounts.back());
static_assert(kPattersonTailWeights.size() == 1 + 3 + 7 + 15 + 31 + 63 + 127);
static_assert(kGenzKeisterWeights.size() == 1 + 3 + 9 + 19 + 35);

void check_level(RuleFamily family, int level) {
  if (level < 0 || level > family.max_level()) {
    throw UnsupportedLevel("level " + std::to_string(level) + " unsupported for rule " +
                           std::string(family.name()) + " (max level " +
                           std::to_string(family.max_level()) + ")");
  }
}

// Orthonormal probabilists' Hermite values H_{n-1}(y), H_n(y).
std::pair<double, double> hermite_pair(int n, double y) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = (y * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {prev, cur};
}

// Nodes of a nested table in first-appearance order, the level each one
// first appears at, and the per-level weights aligned with that order.
struct NestedTable {
  std::vector<double> nodes;
  std::vector<NodeId> ids;
  std::vector<std::vector<double>> weights;
};

template <std::size_t Levels, std::size_t N, std::size_t W>
NestedTable make_nested(const std::array<std::size_t, Levels>& counts,
                        const std::array<double, N>& nodes,
                        const std::array<double, W>& weights, auto&& map_node) {
  NestedTable table;
  table.nodes.resize(N);
  table.ids.resize(N);
  std::size_t level_begin = 0;
  for (std::size_t l = 0; l < Levels; ++l) {
    for (std::size_t p = level_begin; p < counts[l]; ++p) {
      table.nodes[p] = map_node(p, nodes[p]);
      table.ids[p] = NodeId{static_cast<std::uint16_t>(l),
                            static_cast<std::uint16_t>(p - level_begin)};
    }
    level_begin = counts[l];
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l < Levels; ++l) {
    table.weights.emplace_back(weights.begin() + offset, weights.begin() + offset + counts[l]);
    offset += counts[l];
  }
  return table;
}

QuadratureLevel level_from_nested(RuleFamily family, int level, const NestedTable& table) {
  const std::size_t m = family.count(level);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return table.nodes[a] < table.nodes[b]; });
  QuadratureLevel q{family, level, {}, {}, {}};
  for (std::size_t p : order) {
    q.nodes.push_back(table.nodes[p]);
    q.weights.push_back(table.weights[level][p]);
    q.ids.push_back(table.ids[p]);
  }
  return q;
}

std::vector<QuadratureLevel> build_levels(RuleFamily family) {
  std::vector<QuadratureLevel> levels;
  switch (family.tag()) {
    case RuleTag::GH1:
    case RuleTag::GH2:
      for (int l = 0; l <= family.max_level(); ++l) {
        auto gh = gauss_hermite_nodes(static_cast<int>(family.count(l)));
        QuadratureLevel q{family, l, std::move(gh.nodes), std::move(gh.weights), {}};
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
          // the centre node of odd rules is the same point as the origin
          q.ids.push_back(q.nodes[k] == 0.0 ? NodeId{}
                                            : NodeId{static_cast<std::uint16_t>(l), static_cast<std::uint16_t>(k)});
        }
        levels.push_back(std::move(q));
      }
      break;
    case RuleTag::TGKP: {
      const auto table = make_nested(kPattersonCounts, kPattersonTailNodes,
                                     kPattersonTailWeights, [](std::size_t p, double tail) {
                                       const int side = kPattersonSide[p];
                                       if (side == 0) return 0.0;
                                       const double y = inverse_normal_cdf(tail);
                                       return side < 0 ? y : -y;
                                     });
      for (int l = 0; l <= family.max_level(); ++l) levels.push_back(level_from_nested(family, l, table));
      break;
    }
    case RuleTag::GK: {
      const auto table = make_nested(kGenzKeisterCounts, kGenzKeisterNodes, kGenzKeisterWeights,
                                     [](std::size_t, double y) { return y; });
      for (int l = 0; l <= family.max_level(); ++l) levels.push_back(level_from_nested(family, l, table));
      break;
    }
  }
  return levels;
}

DifferenceRule build_difference(const QuadratureLevel& fine, const QuadratureLevel* coarse) {
  DifferenceRule d{fine.family, fine.level, fine.nodes, fine.weights, fine.ids};
  if (coarse == nullptr) return d;
  if (fine.family.nested()) {
    for (std::size_t k = 0; k < coarse->count(); ++k) {
      const auto it = std::find(d.ids.begin(), d.ids.end(), coarse->ids[k]);
      d.weights[static_cast<std::size_t>(it - d.ids.begin())] -= coarse->weights[k];
    }
    return d;
  }
  // Non-nested: keep both node sets, ordered by node value with the finer
  // level first on ties.
  struct Entry {
    double node;
    double weight;
    NodeId id;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < fine.count(); ++k) entries.push_back({fine.nodes[k], fine.weights[k], fine.ids[k]});
  for (std::size_t k = 0; k < coarse->count(); ++k) {
    entries.push_back({coarse->nodes[k], -coarse->weights[k], coarse->ids[k]});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.node < b.node; });
  d.nodes.clear();
  d.weights.clear();
  d.ids.clear();
  for (const auto& e : entries) {
    d.nodes.push_back(e.node);
    d.weights.push_back(e.weight);
    d.ids.push_back(e.id);
  }
  return d;
}

struct FamilyTables {
  std::vector<QuadratureLevel> levels;
  std::vector<DifferenceRule> differences;
};

FamilyTables build_tables(RuleFamily family) {
  FamilyTables t;
  t.levels = build_levels(family);
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    t.differences.push_back(build_difference(t.levels[l], l == 0 ? nullptr : &t.levels[l - 1]));
  }
  return t;
}

const FamilyTables& tables(RuleFamily family) {
  static const std::array<FamilyTables, 4> all = {
      build_tables(RuleFamily(RuleTag::GH1)), build_tables(RuleFamily(RuleTag::GH2)),
      build_tables(RuleFamily(RuleTag::TGKP)), build_tables(RuleFamily(RuleTag::GK))};
  return all[static_cast<std::size_t>(family.tag())];
}

}  // namespace

std::size_t RuleFamily::count(int level) const {
  check_level(*this, level);
  switch (tag_) {
    case RuleTag::GH1:
      return static_cast<std::size_t>(level) + 1;
    case RuleTag::GH2:
    case RuleTag::TGKP:
      return (std::size_t{1} << (level + 1)) - 1;
    case RuleTag::GK:
      return kGenzKeisterCounts[static_cast<std::size_t>(level)];
  }
  return 0;
}

std::string_view RuleFamily::name() const {
  switch (tag_) {
    case RuleTag::GH1:
      return "GH1";
    case RuleTag::GH2:
      return "GH2";
    case RuleTag::TGKP:
      return "tGKP";
    case RuleTag::GK:
      return "GK";
  }
  return "?";
}

RuleFamily RuleFamily::parse(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "gh1") return RuleFamily(RuleTag::GH1);
  if (lower == "gh2") return RuleFamily(RuleTag::GH2);
  if (lower == "tgkp") return RuleFamily(RuleTag::TGKP);
  if (lower == "gk") return RuleFamily(RuleTag::GK);
  throw std::invalid_argument("unknown rule family '" + std::string(text) + "'");
}

const std::vector<RuleFamily>& RuleFamily::all() {
  static const std::vector<RuleFamily> families = {RuleFamily(RuleTag::GH1), RuleFamily(RuleTag::GH2),
                                                   RuleFamily(RuleTag::TGKP), RuleFamily(RuleTag::GK)};
  return families;
}

NodesAndWeights gauss_hermite_nodes(int n) {
  if (n < 1 || n > 200) {
    throw std::invalid_argument("Gauss-Hermite point count must be in [1, 200], got " + std::to_string(n));
  }
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd sub(std::max<Eigen::Index>(size - 1, 0));
  for (Eigen::Index k = 0; k + 1 < size; ++k) sub[k] = std::sqrt(static_cast<double>(k + 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  NodesAndWeights rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < size; ++k) {
    double y = solver.eigenvalues()[k];
    // one Newton step on H_n; H_n' = sqrt(n) H_{n-1}
    const auto [hm1, h] = hermite_pair(n, y);
    if (hm1 != 0.0) y -= h / (std::sqrt(static_cast<double>(n)) * hm1);
    rule.nodes[static_cast<std::size_t>(k)] = y;
    // Christoffel form keeps relative accuracy in the far tails, where the
    // first eigenvector component is lost below the roundoff of the others.
    const double hn1 = hermite_pair(n, y).first;
    rule.weights[static_cast<std::size_t>(k)] = 1.0 / (static_cast<double>(n) * hn1 * hn1);
  }
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;

  // exact symmetry about the origin
  const auto m = static_cast<std::size_t>(n);
  for (std::size_t k = 0; k < m / 2; ++k) {
    const double y = 0.5 * (rule.nodes[m - 1 - k] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m - 1 - k] + rule.weights[k]);
    rule.nodes[k] = -y;
    rule.nodes[m - 1 - k] = y;
    rule.weights[k] = w;
    rule.weights[m - 1 - k] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

const QuadratureLevel& level_nodes(RuleFamily family, int level) {
  check_level(family, level);
  return tables(family).levels[static_cast<std::size_t>(level)];
}

const DifferenceRule& difference_rule(RuleFamily family, int level) {
  check_level(family, level);
  return tables(family).differences[static_cast<std::size_t>(level)];
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: probability must lie in (0, 1), got " + std::to_string(p));
  }
  // Rational approximation (relative error ~1e-9) followed by a Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p == 0.5) return 0.0;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the residual is taken in the tail closest to p.
  const double e = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace spq
