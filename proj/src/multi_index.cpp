#include "spq/multi_index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spq {

MultiIndex::MultiIndex(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& e : entries) {
    if (e.dimension == 0) throw std::invalid_argument("multi-index dimensions are 1-based");
    if (e.level < 0) throw std::invalid_argument("multi-index levels must be nonnegative");
    if (e.level == 0) continue;
    if (!support_.empty() && support_.back().dimension == e.dimension) {
      throw std::invalid_argument("duplicate dimension in multi-index");
    }
    support_.push_back(e);
  }
}

MultiIndex MultiIndex::from_dense(const std::vector<int>& levels) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < levels.size(); ++i) entries.push_back({static_cast<Dimension>(i + 1), levels[i]});
  return MultiIndex(std::move(entries));
}

MultiIndex MultiIndex::unit(Dimension j, int level) { return MultiIndex({{j, level}}); }

int MultiIndex::operator[](Dimension j) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), j,
                                   [](const Entry& e, Dimension d) { return e.dimension < d; });
  return it != support_.end() && it->dimension == j ? it->level : 0;
}

int MultiIndex::total_level() const {
  int total = 0;
  for (const auto& e : support_) total += e.level;
  return total;
}

int MultiIndex::max_level() const {
  int m = 0;
  for (const auto& e : support_) m = std::max(m, e.level);
  return m;
}

MultiIndex MultiIndex::incremented(Dimension j) const {
  MultiIndex out = *this;
  auto it = std::lower_bound(out.support_.begin(), out.support_.end(), j,
                             [](const Entry& e, Dimension d) { return e.dimension < d; });
  if (it != out.support_.end() && it->dimension == j) {
    ++it->level;
  } else {
    out.support_.insert(it, Entry{j, 1});
  }
  return out;
}

MultiIndex MultiIndex::decremented(Dimension j) const {
  MultiIndex out = *this;
  auto it = std::lower_bound(out.support_.begin(), out.support_.end(), j,
                             [](const Entry& e, Dimension d) { return e.dimension < d; });
  if (it == out.support_.end() || it->dimension != j) {
    throw std::invalid_argument("cannot decrement a zero component");
  }
  if (--it->level == 0) out.support_.erase(it);
  return out;
}

std::string MultiIndex::to_string() const {
  std::string s;
  for (const auto& e : support_) {
    if (!s.empty()) s.push_back(' ');
    s += std::to_string(e.dimension) + ":" + std::to_string(e.level);
  }
  return s;
}

MultiIndex MultiIndex::parse(std::string_view text) {
  std::vector<Entry> entries;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = text.find_first_of(" \t\r", pos);
    if (end == std::string_view::npos) end = text.size();
    const auto token = text.substr(pos, end - pos);
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("malformed multi-index token '" + std::string(token) + "'");
    Dimension dim = 0;
    int level = 0;
    const auto r1 = std::from_chars(token.data(), token.data() + colon, dim);
    const auto r2 = std::from_chars(token.data() + colon + 1, token.data() + token.size(), level);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != token.data() + colon ||
        r2.ptr != token.data() + token.size()) {
      throw std::invalid_argument("malformed multi-index token '" + std::string(token) + "'");
    }
    entries.push_back({dim, level});
    pos = end;
  }
  return MultiIndex(std::move(entries));
}

std::size_t MultiIndexHash::operator()(const MultiIndex& nu) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& e : nu.support()) {
    h ^= e.dimension;
    h *= 0x100000001b3ULL;
    h ^= static_cast<std::size_t>(e.level);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu) { return os << '{' << nu.to_string() << '}'; }

IndexSet::IndexSet() {
  order_.emplace_back();
  members_.insert(MultiIndex{});
}

bool IndexSet::can_insert(const MultiIndex& nu) const {
  for (const auto& e : nu.support()) {
    if (!contains(nu.decremented(e.dimension))) return false;
  }
  return true;
}

void IndexSet::insert(const MultiIndex& nu) {
  if (contains(nu)) throw std::invalid_argument("index " + nu.to_string() + " already in set");
  if (!can_insert(nu)) throw std::invalid_argument("inserting " + nu.to_string() + " breaks downward closedness");
  order_.push_back(nu);
  members_.insert(nu);
  dim_bound_ = std::max(dim_bound_, nu.max_dimension());
}

void IndexSet::write(std::ostream& os) const {
  for (const auto& nu : order_) os << nu.to_string() << '\n';
}

IndexSet IndexSet::read(std::istream& is) {
  IndexSet set;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    const auto nu = MultiIndex::parse(line);
    if (first && nu.is_zero()) {
      first = false;
      continue;
    }
    first = false;
    set.insert(nu);
  }
  return set;
}

TauSequence TauSequence::power(double exponent, int r) {
  std::ostringstream desc;
  desc << "j^" << exponent;
  return TauSequence{[exponent](Dimension j) { return std::pow(static_cast<double>(j), exponent); }, r,
                     exponent >= 0.0, desc.str()};
}

void TauSequence::check(Dimension count) const {
  if (!generator) throw std::invalid_argument("tau sequence has no generator");
  if (r < 1) throw std::invalid_argument("derivative order r must be >= 1");
  double prev = 0.0;
  for (Dimension j = 1; j <= count; ++j) {
    const double t = generator(j);
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("tau_" + std::to_string(j) + " must be positive");
    if (monotone && t < prev) throw std::invalid_argument("tau sequence is not nondecreasing at j=" + std::to_string(j));
    prev = t;
  }
}

int default_derivative_order(double alpha) {
  return std::max(1, static_cast<int>(std::floor(14.0 * (alpha - 1.0))) + 1);
}

bool is_admissible(const std::vector<MultiIndex>& set) {
  const std::unordered_set<MultiIndex, MultiIndexHash> members(set.begin(), set.end());
  for (const auto& nu : set) {
    for (const auto& e : nu.support()) {
      if (members.count(nu.decremented(e.dimension)) == 0) return false;
    }
  }
  return true;
}

std::vector<MultiIndex> forward_neighbors(const IndexSet& set, unsigned K, NeighborLimits limits) {
  const auto cap = static_cast<Dimension>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(set.dim_bound()) + K, limits.max_dimension));
  std::vector<MultiIndex> out;
  for (const auto& nu : set.order()) {
    for (Dimension k = 1; k <= cap; ++k) {
      if (nu[k] + 1 > limits.max_level) continue;
      auto mu = nu.incremented(k);
      if (!set.contains(mu) && set.can_insert(mu)) out.push_back(std::move(mu));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double binomial(int n, int k) {
  if (n < 0 || n > 64) throw std::invalid_argument("binomial: n must be in [0, 64]");
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(result);
}

BWeight b_weight(const MultiIndex& nu, const TauSequence& tau, int r) {
  if (r < 1) throw std::invalid_argument("derivative order r must be >= 1");
  BWeight out;
  double direct = 1.0;
  bool direct_ok = true;
  for (const auto& e : nu.support()) {
    const double t = tau(e.dimension);
    const double log_t2 = 2.0 * std::log(t);
    const int top = std::min(r, e.level);

    // log-sum-exp over l = 0..top of log(binom) + l log(tau^2)
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(top) + 1);
    double peak = -std::numeric_limits<double>::infinity();
    for (int l = 0; l <= top; ++l) {
      const double v = std::log(binomial(e.level, l)) + l * log_t2;
      logs.push_back(v);
      peak = std::max(peak, v);
    }
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - peak);
    out.log_value += peak + std::log(acc);

    if (direct_ok) {
      double factor = 0.0;
      const double t2 = t * t;
      double power = 1.0;
      for (int l = 0; l <= top; ++l) {
        factor += binomial(e.level, l) * power;
        power *= t2;
      }
      direct *= factor;
      if (!std::isfinite(direct) || !std::isfinite(factor) || factor > 1e300 || direct > 1e300) direct_ok = false;
    }
  }
  if (direct_ok) {
    // equal products must compare equal in log space too
    out.value = direct;
    out.log_value = std::log(direct);
  } else if (out.log_value < std::log(std::numeric_limits<double>::max())) {
    out.value = std::exp(out.log_value);
  } else {
    out.value = std::numeric_limits<double>::infinity();
    out.saturated = true;
  }
  return out;
}

double c_weight(const MultiIndex& nu) {
  double c = 1.0;
  for (const auto& e : nu.support()) {
    const double base = 1.0 + e.level;
    c *= base * base * base;
  }
  return c;
}

}  // namespace spq
