#include "wassopt/oracles.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wassopt/error.hpp"
#include "wassopt/gaussian.hpp"
#include "wassopt/ot.hpp"

namespace wassopt {
namespace {

using testing::line_measure;
using testing::random_cloud;
using testing::vec1;

TEST(PermutationOt, HandCasesAndGuards) {
  const PermutationOtResult single =
      permutation_ot(DiscreteMeasure::dirac(vec1(0.0)), DiscreteMeasure::dirac(vec1(2.0)));
  EXPECT_DOUBLE_EQ(single.cost, 4.0);

  const PermutationOtResult pair =
      permutation_ot(line_measure({0.0, 1.0}), line_measure({2.0, 3.0}));
  EXPECT_DOUBLE_EQ(pair.cost, 4.0);
  EXPECT_EQ(pair.matching[0], 0);  // monotone
  EXPECT_EQ(pair.matching[1], 1);

  Rng rng(31);
  EXPECT_THROW(permutation_ot(random_cloud(rng, 8, 1, true), random_cloud(rng, 8, 1, true)),
               Error);
  EXPECT_THROW(permutation_ot(random_cloud(rng, 3, 1, true), random_cloud(rng, 4, 1, true)),
               Error);
  EXPECT_THROW(permutation_ot(random_cloud(rng, 3, 1, false), random_cloud(rng, 3, 1, true)),
               Error);
}

TEST(PermutationOt, AgreesWithLpOnRandomPairs) {
  Rng rng(32);
  for (int rep = 0; rep < 10; ++rep) {
    const DiscreteMeasure mu = random_cloud(rng, 5, 2, /*uniform=*/true);
    const DiscreteMeasure nu = random_cloud(rng, 5, 2, /*uniform=*/true);
    const double lp = solve_ot(mu, nu).cost();
    const double enumerated = permutation_ot(mu, nu).cost;
    EXPECT_NEAR(lp, enumerated, 1e-12 * (1.0 + enumerated));
  }
}

TEST(RandomFeasible, ContractAndDeterminism) {
  Rng rng(33);
  const DiscreteMeasure center = random_cloud(rng, 8, 2);
  OracleBudget budget;
  budget.max_candidates = 0;
  EXPECT_TRUE(random_feasible(center, 1.0, budget).empty());

  budget.max_candidates = 12;
  budget.seed = 777;
  const double eps = 0.6;
  const auto batch = random_feasible(center, eps, budget);
  ASSERT_EQ(batch.size(), 12u);
  for (const DiscreteMeasure& nu : batch) EXPECT_LE(w2(nu, center), eps + 1e-9);

  const auto again = random_feasible(center, eps, budget);
  for (std::size_t k = 0; k < batch.size(); ++k)
    EXPECT_EQ(batch[k].atoms(), again[k].atoms());

  // Vanishing radius collapses every candidate onto the center.
  for (const DiscreteMeasure& nu : random_feasible(center, 1e-7, budget))
    EXPECT_LE(w2(nu, center), 1e-7 + 1e-9);
}

TEST(GridKlOracle, TrivialAndGuardCases) {
  const GaussianMeasure g(vec1(0.3), 1.7 * Eigen::MatrixXd::Identity(1, 1));
  OracleBudget budget;
  const GridKlResult same = grid_kl_oracle(g, g, 0.5, budget);
  EXPECT_DOUBLE_EQ(same.value, 0.0);

  const GaussianMeasure far(vec1(5.0), Eigen::MatrixXd::Identity(1, 1));
  const GridKlResult huge = grid_kl_oracle(g, far, 100.0, budget);
  EXPECT_DOUBLE_EQ(huge.value, 0.0);  // ball swallows the prior

  Eigen::MatrixXd cov_p(2, 2), cov_r(2, 2);
  cov_p << 1.0, 0.5, 0.5, 1.0;
  cov_r << 1.0, 0.0, 0.0, 2.0;  // does not commute with cov_p
  EXPECT_THROW(grid_kl_oracle(GaussianMeasure(Eigen::VectorXd::Zero(2), cov_p),
                              GaussianMeasure(Eigen::VectorXd::Zero(2), cov_r), 1.0, budget),
               Error);
}

TEST(GridKlOracle, SelfConsistencyAcrossResolutions) {
  const GaussianMeasure prior(vec1(0.0), Eigen::MatrixXd::Identity(1, 1));
  const GaussianMeasure ref(vec1(3.0), Eigen::MatrixXd::Identity(1, 1));
  OracleBudget coarse;
  coarse.grid_resolution = 64;
  OracleBudget fine;
  fine.grid_resolution = 512;
  const GridKlResult a = grid_kl_oracle(prior, ref, 1.0, coarse);
  const GridKlResult b = grid_kl_oracle(prior, ref, 1.0, fine);
  EXPECT_NEAR(a.value, b.value, 1e-4 * (1.0 + b.value));
  // Analytic optimum for the unit-variance shift: KL = (c - eps)^2 / 2.
  EXPECT_NEAR(b.value, 2.0, 1e-6);
}

TEST(LoglogSlope, RecoversPowerLaws) {
  const std::vector<double> steps{1e-2, 1e-3, 1e-4};
  std::vector<double> linear, quadratic;
  for (double s : steps) {
    linear.push_back(3.0 * s);
    quadratic.push_back(0.5 * s * s);
  }
  EXPECT_NEAR(loglog_slope(steps, linear), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope(steps, quadratic), 2.0, 1e-12);
}

}  // namespace
}  // namespace wassopt
