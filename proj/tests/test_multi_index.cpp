#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "spq/multi_index.hpp"

using namespace spq;

namespace {

MultiIndex mi(const char* text) { return MultiIndex::parse(text); }

// b_nu from the double sum, binomials from tgamma.
double b_brute(const MultiIndex& nu, const TauSequence& tau, int r) {
  double b = 1.0;
  for (const auto& e : nu.support()) {
    double s = 0.0;
    for (int l = 0; l <= std::min(r, e.level); ++l) {
      const double binom = std::tgamma(e.level + 1.0) / (std::tgamma(l + 1.0) * std::tgamma(e.level - l + 1.0));
      s += binom * std::pow(tau(e.dimension), 2.0 * l);
    }
    b *= s;
  }
  return b;
}

MultiIndex random_index(std::mt19937& rng, Dimension dims, int max_level) {
  std::uniform_int_distribution<int> level(0, max_level);
  std::vector<int> dense(dims);
  for (auto& v : dense) v = level(rng) * (rng() % 3 == 0);
  return MultiIndex::from_dense(dense);
}

}  // namespace

TEST(MultiIndex, SparseRepresentation) {
  const auto nu = MultiIndex::from_dense({0, 2, 0, 1});
  ASSERT_EQ(nu.support().size(), 2u);
  EXPECT_EQ(nu[1], 0);
  EXPECT_EQ(nu[2], 2);
  EXPECT_EQ(nu[4], 1);
  EXPECT_EQ(nu[100], 0);
  EXPECT_EQ(nu.total_level(), 3);
  EXPECT_EQ(nu.max_level(), 2);
  EXPECT_EQ(nu.to_string(), "2:2 4:1");
  EXPECT_EQ(MultiIndex::parse("4:1 2:2"), nu);
  EXPECT_TRUE(MultiIndex::parse("").is_zero());
  EXPECT_THROW(MultiIndex::parse("2-1"), std::invalid_argument);
  EXPECT_THROW(MultiIndex::parse("0:1"), std::invalid_argument);
  EXPECT_THROW(MultiIndex::parse("1:1 1:2"), std::invalid_argument);
}

TEST(MultiIndex, IncrementDecrement) {
  const auto nu = mi("2:1");
  EXPECT_EQ(nu.incremented(2), mi("2:2"));
  EXPECT_EQ(nu.incremented(1), mi("1:1 2:1"));
  EXPECT_TRUE(nu.decremented(2).is_zero());
  EXPECT_THROW(nu.decremented(1), std::invalid_argument);
}

TEST(MultiIndex, LexicographicOrderOnSupportLists) {
  EXPECT_LT(MultiIndex{}, mi("1:1"));
  EXPECT_LT(mi("1:1"), mi("1:2"));
  EXPECT_LT(mi("1:2"), mi("2:1"));
  EXPECT_LT(mi("1:1 2:1"), mi("1:2"));
  EXPECT_LT(mi("1:1"), mi("1:1 2:1"));
}

TEST(IndexSet, InsertEnforcesDownwardClosure) {
  IndexSet set;
  EXPECT_EQ(set.size(), 1u);
  EXPECT_TRUE(set.contains(MultiIndex{}));
  EXPECT_FALSE(set.can_insert(mi("1:2")));
  EXPECT_THROW(set.insert(mi("1:1 2:1")), std::invalid_argument);
  set.insert(mi("1:1"));
  set.insert(mi("2:1"));
  set.insert(mi("1:1 2:1"));
  EXPECT_THROW(set.insert(mi("1:1")), std::invalid_argument);
  EXPECT_EQ(set.dim_bound(), 2u);
  EXPECT_TRUE(is_admissible(set.order()));
  EXPECT_FALSE(is_admissible({MultiIndex{}, mi("1:2")}));
}

TEST(IndexSet, TextRoundTrip) {
  IndexSet set;
  for (const char* t : {"1:1", "1:2", "3:1", "2:1", "2:1 3:1"}) set.insert(mi(t));
  std::stringstream ss;
  set.write(ss);
  EXPECT_EQ(ss.str(), "\n1:1\n1:2\n3:1\n2:1\n2:1 3:1\n");
  const auto back = IndexSet::read(ss);
  EXPECT_EQ(back.order(), set.order());
}

TEST(ForwardNeighbors, SmallExamples) {
  IndexSet set;
  EXPECT_EQ(forward_neighbors(set), std::vector<MultiIndex>{mi("1:1")});
  EXPECT_EQ(forward_neighbors(set, 3), (std::vector<MultiIndex>{mi("1:1"), mi("2:1"), mi("3:1")}));
  set.insert(mi("1:1"));
  EXPECT_EQ(forward_neighbors(set), (std::vector<MultiIndex>{mi("1:2"), mi("2:1")}));
  set.insert(mi("2:1"));
  EXPECT_EQ(forward_neighbors(set), (std::vector<MultiIndex>{mi("1:1 2:1"), mi("1:2"), mi("2:2"), mi("3:1")}));
  NeighborLimits limits;
  limits.max_level = 1;
  limits.max_dimension = 2;
  EXPECT_EQ(forward_neighbors(set, 1, limits), std::vector<MultiIndex>{mi("1:1 2:1")});
}

TEST(ForwardNeighbors, EveryNeighborIsInsertableAndNew) {
  std::mt19937 rng(7);
  IndexSet set;
  for (int step = 0; step < 200; ++step) {
    const auto n = forward_neighbors(set, 2);
    for (const auto& mu : n) {
      EXPECT_FALSE(set.contains(mu));
      EXPECT_TRUE(set.can_insert(mu));
      EXPECT_LE(mu.support().back().dimension, set.dim_bound() + 2);
    }
    set.insert(n[rng() % n.size()]);
  }
  EXPECT_TRUE(is_admissible(set.order()));
}

TEST(BWeight, MatchesDoubleSum) {
  std::mt19937 rng(11);
  for (double exponent : {0.5, 1.5, 3.0}) {
    for (int r : {1, 2, 5, 15}) {
      const auto tau = TauSequence::power(exponent, r);
      for (int trial = 0; trial < 50; ++trial) {
        const auto nu = random_index(rng, 8, 6);
        const auto b = b_weight(nu, tau, r);
        const double ref = b_brute(nu, tau, r);
        EXPECT_NEAR(b.value / ref, 1.0, 1e-12) << nu;
        EXPECT_NEAR(b.log_value, std::log(ref), 1e-11) << nu;
        EXPECT_FALSE(b.saturated);
      }
    }
  }
  EXPECT_EQ(b_weight(MultiIndex{}, TauSequence::power(1.5, 2), 2).value, 1.0);
  // nu = e_1 gives 1 + tau_1^2
  EXPECT_EQ(b_weight(mi("1:1"), TauSequence::power(1.5, 2), 2).value, 2.0);
  EXPECT_EQ(b_weight(mi("2:3"), TauSequence::power(1.0, 2), 2).value, 1.0 + 3 * 4 + 3 * 16);
}

TEST(BWeight, MonotoneUnderUnitIncrements) {
  std::mt19937 rng(5);
  const auto tau = TauSequence::power(1.5, 15);
  for (int trial = 0; trial < 500; ++trial) {
    const auto nu = random_index(rng, 12, 8);
    const Dimension k = 1 + rng() % 14;
    EXPECT_GE(b_weight(nu.incremented(k), tau, 15).log_value, b_weight(nu, tau, 15).log_value) << nu << " +e" << k;
  }
}

TEST(BWeight, SaturatesInsteadOfOverflowing) {
  const auto tau = TauSequence::power(4.0, 40);
  std::vector<MultiIndex::Entry> entries;
  for (Dimension j = 1000; j < 1040; ++j) entries.push_back({j, 40});
  const auto b = b_weight(MultiIndex(entries), tau, 40);
  EXPECT_TRUE(b.saturated);
  EXPECT_TRUE(std::isinf(b.value));
  EXPECT_TRUE(std::isfinite(b.log_value));
  EXPECT_GT(b.log_value, 700.0);
  EXPECT_THROW(b_weight(mi("1:1"), tau, 0), std::invalid_argument);
}

TEST(Weights, Binomial) {
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_NEAR(binomial(64, 32) / 1832624140942590534.0, 1.0, 1e-15);
  EXPECT_EQ(binomial(7, 9), 0.0);
  EXPECT_THROW(binomial(65, 1), std::invalid_argument);
}

TEST(Weights, CWeight) {
  EXPECT_EQ(c_weight(MultiIndex{}), 1.0);
  EXPECT_EQ(c_weight(mi("1:1 4:2")), 8.0 * 27.0);
}

TEST(TauSequence, DerivativeOrderAndChecks) {
  EXPECT_EQ(default_derivative_order(2.0), 15);
  EXPECT_EQ(default_derivative_order(1.0), 1);
  EXPECT_EQ(default_derivative_order(0.5), 1);
  EXPECT_EQ(default_derivative_order(3.0), 29);
  EXPECT_NO_THROW(TauSequence::power(1.5, 2).check());
  TauSequence bad{[](Dimension j) { return j % 2 ? 2.0 : 1.0; }, 1, true, "zigzag"};
  EXPECT_THROW(bad.check(10), std::invalid_argument);
  TauSequence zero{[](Dimension) { return 0.0; }, 1, false, "zero"};
  EXPECT_THROW(zero.check(10), std::invalid_argument);
}
