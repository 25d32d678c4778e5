#include <gtest/gtest.h>

#include <cmath>

#include "spq/hermite.hpp"
#include "spq/univariate_rules.hpp"

using namespace spq;

namespace {

// He_n(y) = n! sum_m (-1)^m y^(n-2m) / (m! (n-2m)! 2^m), normalized by sqrt(n!).
double hermite_brute(int n, double y) {
  double s = 0.0;
  for (int m = 0; 2 * m <= n; ++m) {
    s += std::pow(-1.0, m) * std::pow(y, n - 2 * m) /
         (std::tgamma(m + 1.0) * std::tgamma(n - 2 * m + 1.0) * std::pow(2.0, m));
  }
  return s * std::tgamma(n + 1.0) / std::sqrt(std::tgamma(n + 1.0));
}

}  // namespace

TEST(Hermite, MatchesMonomialExpansion) {
  for (int n = 0; n <= 14; ++n) {
    for (double y : {-2.5, -1.0, 0.0, 0.3, 1.7, 3.0}) {
      const double ref = hermite_brute(n, y);
      EXPECT_NEAR(hermite_eval(n, y), ref, 1e-11 * std::max(1.0, std::abs(ref))) << n << ' ' << y;
    }
  }
}

TEST(Hermite, ValuesVectorMatchesScalar) {
  const auto v = hermite_values(30, 1.3);
  ASSERT_EQ(v.size(), 31u);
  for (int n = 0; n <= 30; ++n) EXPECT_EQ(v[n], hermite_eval(n, 1.3));
}

TEST(Hermite, OrthonormalUnderGaussHermite) {
  const auto rule = gauss_hermite_nodes(60);
  for (int m = 0; m <= 30; m += 3) {
    for (int n = 0; n <= 30; n += 2) {
      double s = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        s += rule.weights[k] * hermite_eval(m, rule.nodes[k]) * hermite_eval(n, rule.nodes[k]);
      }
      EXPECT_NEAR(s, m == n ? 1.0 : 0.0, 1e-11) << m << ' ' << n;
    }
  }
}

TEST(Hermite, ExactnessDegrees) {
  const RuleFamily gh1(RuleTag::GH1), gh2(RuleTag::GH2), gk(RuleTag::GK), tgkp(RuleTag::TGKP);
  for (int l = 0; l <= 10; ++l) EXPECT_EQ(verify_exactness(gh1, l), 2 * l + 1) << l;
  EXPECT_GE(verify_exactness(gh2, 3), 29);
  EXPECT_EQ(verify_exactness(gk, 1), 5);
  EXPECT_GE(verify_exactness(gk, 2), 15);
  EXPECT_GE(verify_exactness(gk, 3), 29);
  // Mapped Patterson nodes integrate odd H_n by symmetry only.
  EXPECT_EQ(verify_exactness(tgkp, 1), 1);
}

TEST(Hermite, QuadratureOfHermiteIsBounded) {
  for (int l = 0; l <= 5; ++l) EXPECT_LE(verify_boundedness(RuleFamily(RuleTag::GH2), l), 1.0 + 1e-6);
  for (int l = 0; l <= 4; ++l) EXPECT_LE(verify_boundedness(RuleFamily(RuleTag::GK), l), 1.0 + 1e-6);
  for (int l = 0; l <= 6; ++l) EXPECT_LE(verify_boundedness(RuleFamily(RuleTag::TGKP), l), 1.0 + 1e-6);
  EXPECT_THROW(verify_boundedness(RuleFamily(RuleTag::GK), 1, 151), std::invalid_argument);
}
