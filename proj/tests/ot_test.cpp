#include "wassopt/ot.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "wassopt/error.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/oracles.hpp"
#include "wassopt/random.hpp"

namespace wassopt {
namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

DiscreteMeasure line_measure(std::initializer_list<double> points) {
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(points.size()), 1);
  Eigen::Index i = 0;
  for (double p : points) atoms(i++, 0) = p;
  return DiscreteMeasure(atoms);
}

DiscreteMeasure random_cloud(Rng& rng, Eigen::Index n, Eigen::Index d, bool uniform = false) {
  Eigen::MatrixXd atoms = rng.normal_matrix(n, d);
  if (uniform) return DiscreteMeasure(atoms);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = 0.1 + rng.uniform();
  w /= w.sum();
  return DiscreteMeasure(atoms, w);
}

TEST(SolveOt, IdenticalMeasuresHaveZeroCost) {
  Rng rng(3);
  const DiscreteMeasure mu = random_cloud(rng, 6, 2);
  const TransportPlan plan = solve_ot(mu, mu);
  EXPECT_NEAR(plan.cost(), 0.0, 1e-14);
}

TEST(SolveOt, SingleCoupling) {
  const TransportPlan plan =
      solve_ot(DiscreteMeasure::dirac(vec1(0.0)), DiscreteMeasure::dirac(vec1(1.0)));
  EXPECT_DOUBLE_EQ(plan.gamma()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(plan.cost(), 1.0);
  EXPECT_DOUBLE_EQ(w2(plan.source(), plan.target()), 1.0);
}

TEST(SolveOt, MonotoneMatchingBeatsCrossing) {
  // Crossing would cost 1/2 * 9 + 1/2 * 1 = 5; monotone costs 4.
  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  const DiscreteMeasure nu = line_measure({2.0, 3.0});
  const TransportPlan plan = solve_ot(mu, nu);
  EXPECT_DOUBLE_EQ(plan.cost(), 4.0);
  EXPECT_DOUBLE_EQ(plan.gamma()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(plan.gamma()(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(w2(mu, nu), 2.0);
}

TEST(SolveOt, DimensionMismatchRejected) {
  Rng rng(4);
  const DiscreteMeasure mu = random_cloud(rng, 3, 1);
  const DiscreteMeasure nu = random_cloud(rng, 3, 2);
  EXPECT_THROW(solve_ot(mu, nu), Error);
}

TEST(SolveOt, MatchesPermutationOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.integer() % 6);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.integer() % 3);
    const DiscreteMeasure mu = random_cloud(rng, n, d, /*uniform=*/true);
    const DiscreteMeasure nu = random_cloud(rng, n, d, /*uniform=*/true);
    const TransportPlan plan = solve_ot(mu, nu);
    const PermutationOtResult oracle = permutation_ot(mu, nu);
    EXPECT_NEAR(plan.cost(), oracle.cost, 1e-12 * (1.0 + oracle.cost)) << "seed " << seed;
  }
}

TEST(SolveOt, DualCertificate) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(2000 + seed);
    const DiscreteMeasure mu = random_cloud(rng, 12, 2);
    const DiscreteMeasure nu = random_cloud(rng, 9, 2);
    const TransportPlan plan = solve_ot(mu, nu);
    EXPECT_LE(plan.dual_gap(), 1e-7) << "seed " << seed;
    // Strong duality: dual objective equals the primal cost.
    const double dual = plan.source_potential().dot(mu.weights()) +
                        plan.sink_potential().dot(nu.weights());
    EXPECT_NEAR(dual, plan.cost(), 1e-9 * (1.0 + plan.cost()));
  }
}

TEST(SolveOt, HandlesZeroWeightAtoms) {
  Eigen::MatrixXd atoms(3, 1);
  atoms << 0.0, 5.0, 1.0;
  Eigen::VectorXd w(3);
  w << 0.5, 0.0, 0.5;
  const DiscreteMeasure mu(atoms, w);
  const DiscreteMeasure nu = line_measure({0.0, 1.0});
  const TransportPlan plan = solve_ot(mu, nu);
  EXPECT_NEAR(plan.cost(), 0.0, 1e-14);
}

TEST(W2, GaussianPairsUseClosedForm) {
  const GaussianMeasure a(vec1(0.0), Eigen::MatrixXd::Identity(1, 1));
  const GaussianMeasure b(vec1(2.0), Eigen::MatrixXd::Identity(1, 1));
  EXPECT_NEAR(w2(Measure(a), Measure(b)), 2.0, 1e-12);
  EXPECT_NEAR(w2(Measure(a), Measure(a)), 0.0, 1e-12);
  const Measure discrete = DiscreteMeasure::dirac(vec1(0.0));
  EXPECT_THROW(w2(discrete, Measure(a)), Error);
}

TEST(W2, TriangleInequalityAndSymmetry) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(3000 + seed);
    const DiscreteMeasure a = random_cloud(rng, 6, 2);
    const DiscreteMeasure b = random_cloud(rng, 5, 2);
    const DiscreteMeasure c = random_cloud(rng, 7, 2);
    const double ab = w2(a, b), ba = w2(b, a), bc = w2(b, c), ac = w2(a, c);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_LE(ac, ab + bc + 1e-9);
  }
}

TEST(ExtractMap, DeterministicAndBarycentric) {
  const TransportPlan point_plan =
      solve_ot(DiscreteMeasure::dirac(vec1(0.0)), DiscreteMeasure::dirac(vec1(1.0)));
  const TransportMap determin = extract_map(point_plan);
  EXPECT_TRUE(determin.deterministic());
  EXPECT_DOUBLE_EQ(determin.images()(0, 0), 1.0);

  // A split row forces the barycentric average.
  const TransportPlan split =
      solve_ot(DiscreteMeasure::dirac(vec1(0.0)), line_measure({-1.0, 1.0}));
  const TransportMap bary = extract_map(split);
  EXPECT_FALSE(bary.deterministic());
  EXPECT_NEAR(bary.images()(0, 0), 0.0, 1e-15);

  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  const DiscreteMeasure nu = line_measure({2.0, 3.0});
  const TransportMap monotone = extract_map(solve_ot(mu, nu));
  EXPECT_TRUE(monotone.deterministic());
  EXPECT_DOUBLE_EQ(monotone.images()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(monotone.images()(1, 0), 3.0);
}

TEST(InvertMap, RelabelsAtoms) {
  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  Eigen::MatrixXd images(2, 1);
  images << 2.0, 3.0;
  const TransportMap map(mu, images, true);
  const TransportMap inverse = invert_map(map);
  EXPECT_DOUBLE_EQ(inverse.base().atoms()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(inverse.images()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(inverse.images()(1, 0), 1.0);

  const TransportMap identity(mu, mu.atoms(), true);
  const TransportMap id_inv = invert_map(identity);
  EXPECT_EQ(id_inv.images(), mu.atoms());

  Eigen::MatrixXd coincident(2, 1);
  coincident << 1.0, 1.0;
  EXPECT_THROW(invert_map(TransportMap(mu, coincident, true)), Error);
}

TEST(Geodesic, EndpointsAndMidpoint) {
  const TransportPlan plan =
      solve_ot(DiscreteMeasure::dirac(vec1(0.0)), DiscreteMeasure::dirac(vec1(1.0)));
  EXPECT_DOUBLE_EQ(geodesic(plan, 0.0).atoms()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(geodesic(plan, 0.5).atoms()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(geodesic(plan, 1.0).atoms()(0, 0), 1.0);
  EXPECT_THROW(geodesic(plan, 1.5), Error);
}

TEST(Geodesic, ConstantSpeed) {
  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  const DiscreteMeasure nu = line_measure({2.0, 3.0});
  const TransportPlan plan = solve_ot(mu, nu);
  const DiscreteMeasure mid = geodesic(plan, 0.5);
  EXPECT_NEAR(w2(mu, mid), 1.0, 1e-12);  // half of W2(mu, nu) = 2

  Rng rng(77);
  const DiscreteMeasure a = random_cloud(rng, 8, 2);
  const DiscreteMeasure b = random_cloud(rng, 6, 2);
  const TransportPlan p = solve_ot(a, b);
  const double total = std::sqrt(p.cost());
  for (double s : {0.0, 0.3}) {
    for (double t : {0.6, 1.0}) {
      const double seg = w2(geodesic(p, s), geodesic(p, t));
      EXPECT_NEAR(seg, (t - s) * total, 1e-7);
    }
  }
}

TEST(GeneralizedGeodesic, ReducesToGeodesicWhenBaseIsEndpoint) {
  Rng rng(5);
  const DiscreteMeasure mu0 = random_cloud(rng, 5, 2, /*uniform=*/true);
  const DiscreteMeasure mu1 = random_cloud(rng, 5, 2, /*uniform=*/true);
  const DiscreteMeasure direct = geodesic(solve_ot(mu0, mu1), 0.4);
  const DiscreteMeasure general = generalized_geodesic(mu0, mu0, mu1, 0.4);
  EXPECT_NEAR(w2(direct, general), 0.0, 1e-9);
}

TEST(GeneralizedGeodesic, EndpointsAndPointMasses) {
  Rng rng(6);
  const DiscreteMeasure base = random_cloud(rng, 4, 1, /*uniform=*/true);
  const DiscreteMeasure mu0 = random_cloud(rng, 4, 1, /*uniform=*/true);
  const DiscreteMeasure mu1 = random_cloud(rng, 4, 1, /*uniform=*/true);
  EXPECT_NEAR(w2(generalized_geodesic(base, mu0, mu1, 0.0), mu0), 0.0, 1e-9);
  EXPECT_NEAR(w2(generalized_geodesic(base, mu0, mu1, 1.0), mu1), 0.0, 1e-9);

  const DiscreteMeasure b = DiscreteMeasure::dirac(vec1(0.0));
  const DiscreteMeasure p = DiscreteMeasure::dirac(vec1(1.0));
  const DiscreteMeasure q = DiscreteMeasure::dirac(vec1(-1.0));
  const DiscreteMeasure mid = generalized_geodesic(b, p, q, 0.5);
  EXPECT_EQ(mid.size(), 1);
  EXPECT_DOUBLE_EQ(mid.atoms()(0, 0), 0.0);
}

TEST(ProjectToBall, RetractsOntoBoundary) {
  const DiscreteMeasure center = DiscreteMeasure::dirac(vec1(0.0));
  const DiscreteMeasure far = DiscreteMeasure::dirac(vec1(4.0));
  const DiscreteMeasure projected = project_to_ball(far, center, 1.0);
  EXPECT_NEAR(projected.atoms()(0, 0), 1.0, 1e-12);

  // Inside (and exactly on) the ball nothing moves.
  const DiscreteMeasure near_pt = DiscreteMeasure::dirac(vec1(0.5));
  EXPECT_EQ(project_to_ball(near_pt, center, 1.0).atoms(), near_pt.atoms());
  const DiscreteMeasure boundary = DiscreteMeasure::dirac(vec1(1.0));
  EXPECT_EQ(project_to_ball(boundary, center, 1.0).atoms(), boundary.atoms());

  Rng rng(8);
  const DiscreteMeasure c = random_cloud(rng, 6, 2);
  const DiscreteMeasure m = random_cloud(rng, 7, 2);
  const double eps = 0.25 * w2(c, m);
  const DiscreteMeasure proj = project_to_ball(m, c, eps);
  EXPECT_NEAR(w2(proj, c), eps, 1e-9);
}

TEST(TransportMap, AffineSpdPushforwardIsOptimal) {
  // For T = grad of a convex function, ||T - Id||_{L^2} equals W2(mu, T#mu).
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(4000 + seed);
    const DiscreteMeasure mu = random_cloud(rng, 10, 2);
    const Eigen::MatrixXd a = rng.spd_matrix(2);
    const Eigen::VectorXd b = rng.normal_vector(2);
    const DiscreteMeasure nu = pushforward_affine(mu, a, b);
    const TransportMap map(mu, nu.atoms(), true);
    EXPECT_NEAR(map.displacement_norm(), w2(mu, nu), 1e-8) << "seed " << seed;
  }
}

}  // namespace
}  // namespace wassopt
