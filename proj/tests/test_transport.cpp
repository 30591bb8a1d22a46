#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "uniord/errors.hpp"
#include "uniord/transport.hpp"

using namespace uniord;

namespace {

double flow_oracle(const ProbVector& p, const ProbVector& q, double m) {
  return oracle::min_cost_flow(p.vec(), q.vec(), [m](int i, int j) { return std::pow(std::abs(i - j), m); });
}

ProbVector random_pv(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(k));
  for (double& x : w) x = u(rng);
  return ProbVector::normalized(w);
}

}  // namespace

TEST(GroundCost, Values) {
  EXPECT_DOUBLE_EQ(GroundCost(1.0)(1, 4), 3.0);
  EXPECT_DOUBLE_EQ(GroundCost(2.0)(4, 1), 9.0);
  EXPECT_THROW(GroundCost(0.5), DomainError);
}

TEST(OtDirac, Examples) {
  for (double m : {1.0, 2.0}) EXPECT_DOUBLE_EQ(ot_dirac(ProbVector::one_hot(4, 3), 3, GroundCost(m)), 0.0);
  const ProbVector q({0.7, 0.2, 0.1});
  // hand evaluation: 0.2*1 + 0.1*2 and 0.2*1 + 0.1*4
  EXPECT_NEAR(ot_dirac(q, 1, GroundCost(1)), 0.4, 1e-15);
  EXPECT_NEAR(ot_dirac(q, 1, GroundCost(2)), 0.6, 1e-15);
  EXPECT_NEAR(flow_oracle(ProbVector::one_hot(3, 1), q, 1.0), 0.4, 1e-12);
  EXPECT_NEAR(flow_oracle(ProbVector::one_hot(3, 1), q, 2.0), 0.6, 1e-12);
  EXPECT_THROW(ot_dirac(q, 4), DomainError);
  EXPECT_THROW(ot_dirac(q, 0), DomainError);
}

TEST(OtCmfL1, Examples) {
  const ProbVector q({0.2, 0.5, 0.3});
  EXPECT_DOUBLE_EQ(ot_cmf_l1(q, q), 0.0);
  EXPECT_NEAR(ot_cmf_l1(ProbVector::one_hot(3, 2), q), 0.5, 1e-15);
  EXPECT_NEAR(ot_dirac(q, 2), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(ot_cmf_l1(ProbVector::one_hot(3, 1), ProbVector::one_hot(3, 3)), 2.0);
  EXPECT_THROW(ot_cmf_l1(ProbVector::uniform(2), ProbVector::uniform(3)), DomainError);
}

TEST(OtCmfL1, SubgradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + t % 7;
    const ProbVector p = random_pv(rng, k), q = random_pv(rng, k);
    const auto g = ot_cmf_l1_grad(p, q);
    // the function is piecewise linear in raw p; differences along coordinate l
    for (int l = 0; l < k; ++l) {
      const double h = 1e-7;
      auto up = p.vec(), dn = p.vec();
      up[static_cast<std::size_t>(l)] += h;
      dn[static_cast<std::size_t>(l)] -= h;
      double cu = 0, cd = 0, cq = 0, vu = 0, vd = 0;
      for (int i = 0; i + 1 < k; ++i) {
        cu += up[static_cast<std::size_t>(i)];
        cd += dn[static_cast<std::size_t>(i)];
        cq += q[static_cast<std::size_t>(i)];
        vu += std::abs(cu - cq);
        vd += std::abs(cd - cq);
      }
      EXPECT_NEAR(g[static_cast<std::size_t>(l)], (vu - vd) / (2 * h), 1e-6);
    }
  }
}

TEST(OtLpOracle, Examples) {
  const ProbVector q({0.2, 0.5, 0.3});
  const auto [v0, plan0] = ot_lp_oracle(q, q);
  EXPECT_DOUBLE_EQ(v0, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) EXPECT_EQ(plan0(i, j), 0.0);
  EXPECT_NEAR(ot_lp_oracle(ProbVector::one_hot(3, 1), ProbVector({0.7, 0.2, 0.1})).first, 0.4, 1e-15);
  EXPECT_NEAR(ot_lp_oracle(ProbVector({0.5, 0.5}), ProbVector({0.0, 1.0})).first, 0.5, 1e-15);
  EXPECT_THROW(ot_lp_oracle(ProbVector::uniform(17), ProbVector::uniform(17)), DomainError);
}

TEST(OtLpOracle, TwoClassPlanEnumeration) {
  // For k = 2 every feasible plan is fixed by its (1,2) entry; scan a fine grid of it.
  const ProbVector p({0.5, 0.5}), q({0.0, 1.0});
  double best = 1e9;
  for (int s = 0; s <= 1000; ++s) {
    const double t12 = 0.5 * s / 1000.0;  // mass moved 1 -> 2
    const double t11 = 0.5 - t12, t21 = q[0] - t11, t22 = 0.5 - t21;
    if (t11 < -1e-12 || t21 < -1e-12 || t22 < -1e-12) continue;
    best = std::min(best, t12 + t21);
  }
  EXPECT_NEAR(best, 0.5, 1e-12);
}

TEST(OtLpOracle, PlanIsFeasibleAndMatchesFlowSolver) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 300; ++t) {
    const int k = 2 + t % 7;
    const double m = t % 2 ? 2.0 : 1.0;
    const ProbVector p = random_pv(rng, k), q = random_pv(rng, k);
    const auto [value, plan] = ot_lp_oracle(p, q, GroundCost(m));
    const auto rows = plan.row_sums(), cols = plan.col_sums();
    double cost = 0.0;
    for (int i = 0; i < k; ++i) {
      EXPECT_NEAR(rows[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)], 1e-12);
      EXPECT_NEAR(cols[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(i)], 1e-12);
      for (int j = 0; j < k; ++j) {
        EXPECT_GE(plan(i, j), 0.0);
        cost += plan(i, j) * std::pow(std::abs(i - j), m);
      }
    }
    EXPECT_NEAR(cost, value, 1e-12);
    EXPECT_NEAR(value, flow_oracle(p, q, m), 1e-9);
    if (m == 1.0) EXPECT_NEAR(ot_cmf_l1(p, q), value, 1e-9);
  }
}

TEST(OtDirac, GradientIsGroundCostRow) {
  const auto g = ot_dirac_grad(4, 2, GroundCost(2));
  EXPECT_EQ(g, (std::vector<double>{1, 0, 1, 4}));
  EXPECT_THROW(ot_dirac_grad(4, 5), DomainError);
}
