#ifndef SPQ_UNIVARIATE_RULES_HPP
#define SPQ_UNIVARIATE_RULES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spq {

/// Thrown when a level beyond a family's cap is requested.
class UnsupportedLevel : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class RuleTag { GH1, GH2, TGKP, GK };

/// A hierarchical family of univariate quadrature rules for the standard
/// normal density. Level l has count(l) points; count(0) == 1.
class RuleFamily {
 public:
  constexpr RuleFamily() = default;
  constexpr explicit RuleFamily(RuleTag tag) : tag_(tag) {}

  constexpr RuleTag tag() const { return tag_; }
  constexpr bool nested() const { return tag_ == RuleTag::TGKP || tag_ == RuleTag::GK; }

  /// Highest level the family can produce.
  constexpr int max_level() const {
    switch (tag_) {
      case RuleTag::GH1:
        return 50;
      case RuleTag::GH2:
        return 6;
      case RuleTag::TGKP:
        return 6;
      case RuleTag::GK:
        return 4;
    }
    return 0;
  }

  /// Point count m_l. Throws UnsupportedLevel outside [0, max_level()].
  std::size_t count(int level) const;

  std::string_view name() const;

  /// Parses "gh1", "gh2", "tgkp", "gk" (case-insensitive).
  static RuleFamily parse(std::string_view text);

  static const std::vector<RuleFamily>& all();

  friend constexpr bool operator==(RuleFamily a, RuleFamily b) { return a.tag_ == b.tag_; }

 private:
  RuleTag tag_ = RuleTag::GH1;
};

/// Canonical identity of a univariate node: the level at which the node
/// first appears and its position among the nodes introduced there. For
/// non-nested families every level introduces all of its nodes. The
/// origin of level 0 is {0, 0} for every family.
struct NodeId {
  std::uint16_t level = 0;
  std::uint16_t index = 0;

  bool is_origin() const { return level == 0 && index == 0; }
  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct QuadratureLevel {
  RuleFamily family;
  int level = 0;
  std::vector<double> nodes;  // strictly increasing
  std::vector<double> weights;
  std::vector<NodeId> ids;

  std::size_t count() const { return nodes.size(); }
};

/// Signed node/weight list realizing Q_l - Q_{l-1}.
struct DifferenceRule {
  RuleFamily family;
  int level = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<NodeId> ids;

  std::size_t size() const { return nodes.size(); }
};

struct NodesAndWeights {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point probabilists' Gauss-Hermite rule normalized to the standard
/// normal density, computed from the symmetric Jacobi matrix. 1 <= n <= 200.
NodesAndWeights gauss_hermite_nodes(int n);

/// Cached rule of `family` at `level`. References stay valid for the
/// lifetime of the program.
const QuadratureLevel& level_nodes(RuleFamily family, int level);

const DifferenceRule& difference_rule(RuleFamily family, int level);

/// Standard normal CDF.
double normal_cdf(double x);

/// Quantile of the standard normal distribution; throws std::domain_error
/// unless 0 < p < 1.
double inverse_normal_cdf(double p);

}  // namespace spq

#endif  // SPQ_UNIVARIATE_RULES_HPP
