#include "wassopt/measure.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
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

TEST(DiscreteMeasure, ValidatesWeights) {
  Eigen::MatrixXd atoms(2, 1);
  atoms << 0.0, 1.0;
  Eigen::VectorXd bad(2);
  bad << 0.7, 0.2;  // off by 0.1: an input error, not rounding
  EXPECT_THROW(DiscreteMeasure(atoms, bad), Error);

  Eigen::VectorXd negative(2);
  negative << 1.1, -0.1;
  EXPECT_THROW(DiscreteMeasure(atoms, negative), Error);

  Eigen::VectorXd near(2);
  near << 0.5 + 2e-10, 0.5;  // within the renormalization window
  const DiscreteMeasure mu(atoms, near);
  EXPECT_DOUBLE_EQ(mu.weights().sum(), 1.0);
}

TEST(DiscreteMeasure, GaussianValidation) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  EXPECT_THROW(GaussianMeasure(Eigen::VectorXd::Zero(2), asym), Error);

  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(GaussianMeasure(Eigen::VectorXd::Zero(2), singular), Error);

  EXPECT_NO_THROW(GaussianMeasure(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)));
}

TEST(Pushforward, IdentityAndTranslation) {
  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  const DiscreteMeasure same = pushforward(mu, [](const Eigen::VectorXd& x) { return x; });
  EXPECT_EQ(same.atoms(), mu.atoms());
  EXPECT_EQ(same.weights(), mu.weights());

  const DiscreteMeasure delta0 = DiscreteMeasure::dirac(vec1(0.0));
  const DiscreteMeasure shifted =
      pushforward(delta0, [](const Eigen::VectorXd& x) { return (x.array() + 1.0).matrix(); });
  EXPECT_DOUBLE_EQ(shifted.atoms()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(shifted.weights()[0], 1.0);
}

TEST(Pushforward, ScalingMovesSecondMoment) {
  const DiscreteMeasure mu = line_measure({0.0, 1.0, 2.0});
  const DiscreteMeasure nu =
      pushforward(mu, [](const Eigen::VectorXd& x) { return (2.0 * x.array()).matrix(); });
  EXPECT_DOUBLE_EQ(nu.atoms()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(nu.atoms()(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(nu.atoms()(2, 0), 4.0);
  EXPECT_NEAR(moments(nu).second_moment, 20.0 / 3.0, 1e-15);
}

TEST(Pushforward, RejectsNonFiniteImages) {
  const DiscreteMeasure mu = line_measure({0.0, 1.0});
  EXPECT_THROW(pushforward(mu,
                           [](const Eigen::VectorXd& x) {
                             return (x.array() / 0.0).matrix().eval();
                           }),
               Error);
}

TEST(Pushforward, KeepsCoincidentAtomsSeparate) {
  const DiscreteMeasure mu = line_measure({-1.0, 1.0});
  const DiscreteMeasure nu =
      pushforward(mu, [](const Eigen::VectorXd& x) { return (x.array() * 0.0).matrix().eval(); });
  EXPECT_EQ(nu.size(), 2);
  EXPECT_DOUBLE_EQ(nu.weights().sum(), 1.0);
}

TEST(Moments, HandComputedCases) {
  const DiscreteMeasure dirac = DiscreteMeasure::dirac(vec1(0.0));
  const Moments m0 = moments(dirac);
  EXPECT_DOUBLE_EQ(m0.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(m0.covariance(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m0.second_moment, 0.0);

  const DiscreteMeasure pm1 = line_measure({-1.0, 1.0});
  const Moments m1 = moments(pm1);
  EXPECT_DOUBLE_EQ(m1.mean[0], 0.0);
  EXPECT_DOUBLE_EQ(m1.covariance(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m1.second_moment, 1.0);

  const GaussianMeasure g(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_DOUBLE_EQ(moments(g).second_moment, 2.0);
}

TEST(Moments, AffineCompatibility) {
  Rng rng(11);
  const Eigen::MatrixXd atoms = rng.normal_matrix(20, 3);
  const DiscreteMeasure mu(atoms);
  const Eigen::MatrixXd a = rng.normal_matrix(3, 3);
  const Eigen::VectorXd b = rng.normal_vector(3);
  const DiscreteMeasure nu = pushforward_affine(mu, a, b);
  const Eigen::VectorXd expected = a * moments(mu).mean + b;
  EXPECT_LE((moments(nu).mean - expected).norm(), 1e-12);
}

TEST(SampleGaussian, SingleSampleAndDeterminism) {
  const GaussianMeasure g(vec1(3.0), Eigen::MatrixXd::Identity(1, 1));
  const DiscreteMeasure one = sample_gaussian(g, 1, 42);
  EXPECT_EQ(one.size(), 1);
  EXPECT_DOUBLE_EQ(one.weights()[0], 1.0);

  const DiscreteMeasure a = sample_gaussian(g, 64, 9);
  const DiscreteMeasure b = sample_gaussian(g, 64, 9);
  EXPECT_EQ(a.atoms(), b.atoms());  // bitwise identical under the same seed
  const DiscreteMeasure c = sample_gaussian(g, 64, 10);
  EXPECT_NE(a.atoms(), c.atoms());
}

TEST(SampleGaussian, LawOfLargeNumbers) {
  const GaussianMeasure g(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  const DiscreteMeasure sample = sample_gaussian(g, 10000, 7);
  EXPECT_LE(moments(sample).mean.cwiseAbs().maxCoeff(), 0.05);
}

}  // namespace
}  // namespace wassopt
