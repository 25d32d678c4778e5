#ifndef SPQ_MULTI_INDEX_HPP
#define SPQ_MULTI_INDEX_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace spq {

using Dimension = std::uint32_t;  // 1-based

/// Finitely supported multi-index. Only nonzero levels are stored, sorted
/// by dimension, so cost scales with the support and not with the number
/// of parameter dimensions.
class MultiIndex {
 public:
  struct Entry {
    Dimension dimension;
    int level;
    friend constexpr auto operator<=>(const Entry&, const Entry&) = default;
  };

  MultiIndex() = default;

  /// Builds from (dimension, level) pairs in any order; zero levels dropped.
  explicit MultiIndex(std::vector<Entry> entries);

  /// Dense constructor: levels[0] is dimension 1.
  static MultiIndex from_dense(const std::vector<int>& levels);
  static MultiIndex unit(Dimension j, int level = 1);

  int operator[](Dimension j) const;
  const std::vector<Entry>& support() const { return support_; }
  bool is_zero() const { return support_.empty(); }
  int total_level() const;
  int max_level() const;
  Dimension max_dimension() const { return support_.empty() ? 0 : support_.back().dimension; }

  MultiIndex incremented(Dimension j) const;
  /// Requires (*this)[j] > 0.
  MultiIndex decremented(Dimension j) const;

  /// Lexicographic on the support list of (dimension, level) pairs.
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.support_ <=> b.support_; }
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;

  /// Text form `j1:v1 j2:v2 ...`; the zero index is the empty string.
  std::string to_string() const;
  static MultiIndex parse(std::string_view text);

 private:
  std::vector<Entry> support_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& nu) const noexcept;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu);

/// Downward-closed index set with insertion order.
class IndexSet {
 public:
  /// Starts as {0}.
  IndexSet();

  bool contains(const MultiIndex& nu) const { return members_.count(nu) > 0; }
  std::size_t size() const { return order_.size(); }
  const std::vector<MultiIndex>& order() const { return order_; }

  /// j(Lambda): the largest active dimension over all members.
  Dimension dim_bound() const { return dim_bound_; }

  /// True if every backward neighbor of nu is a member.
  bool can_insert(const MultiIndex& nu) const;

  /// Throws std::invalid_argument if nu is present or would break
  /// downward closedness.
  void insert(const MultiIndex& nu);

  void write(std::ostream& os) const;
  static IndexSet read(std::istream& is);

 private:
  std::vector<MultiIndex> order_;
  std::unordered_set<MultiIndex, MultiIndexHash> members_;
  Dimension dim_bound_ = 0;
};

/// Positive weights tau_j with derivative order r used by b_weight.
struct TauSequence {
  std::function<double(Dimension)> generator;
  int r = 1;
  bool monotone = true;
  std::string description;

  double operator()(Dimension j) const { return generator(j); }

  /// tau_j = j^exponent.
  static TauSequence power(double exponent, int r);

  /// Throws std::invalid_argument if some tau_j <= 0 or, when declared
  /// monotone, tau_{j+1} < tau_j for j < count.
  void check(Dimension count = 10000) const;
};

/// floor(14 (alpha - 1)) + 1, clamped below at 1.
int default_derivative_order(double alpha);

bool is_admissible(const std::vector<MultiIndex>& set);

struct NeighborLimits {
  int max_level = std::numeric_limits<int>::max();
  Dimension max_dimension = std::numeric_limits<Dimension>::max();
};

/// N(Lambda) with the dimension cap j(Lambda) + K, sorted lexicographically.
std::vector<MultiIndex> forward_neighbors(const IndexSet& set, unsigned K = 1, NeighborLimits limits = {});

struct BWeight {
  double value = 1.0;      // +inf when saturated
  double log_value = 0.0;  // natural log, always finite for finite inputs
  bool saturated = false;
};

/// b_nu = prod_j sum_{l=0}^{min(r, nu_j)} binom(nu_j, l) tau_j^{2l}.
BWeight b_weight(const MultiIndex& nu, const TauSequence& tau, int r);

/// c_nu = prod_j (1 + nu_j)^3.
double c_weight(const MultiIndex& nu);

/// binom(n, k) by the multiplicative formula, 0 <= n <= 64.
double binomial(int n, int k);

}  // namespace spq

#endif  // SPQ_MULTI_INDEX_HPP
