#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/random.hpp"

namespace wassopt {

// Tolerances shared by the measure types.
inline constexpr double kWeightSlack = 1e-9;      // renormalization window for sum(w)
inline constexpr double kSymmetrySlack = 1e-10;   // max |S - S^T| entry for covariances
inline constexpr double kSpdEigenFloor = 1e-12;   // smallest admissible eigenvalue

// Weighted particle cloud on R^d. Atoms are rows of an n x d matrix, weights
// sum to one. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    require(atoms_.rows() >= 1, ErrorCode::InvalidMeasure, "need at least one atom");
    require(atoms_.cols() >= 1, ErrorCode::InvalidMeasure, "dimension must be >= 1");
    require(weights_.size() == atoms_.rows(), ErrorCode::InvalidMeasure,
            "weights/atoms length mismatch");
    require(atoms_.allFinite(), ErrorCode::InvalidMeasure, "non-finite atom");
    require(weights_.allFinite(), ErrorCode::InvalidMeasure, "non-finite weight");
    require((weights_.array() >= 0.0).all(), ErrorCode::InvalidMeasure, "negative weight");
    const double total = weights_.sum();
    require(std::abs(total - 1.0) <= kWeightSlack, ErrorCode::InvalidMeasure,
            "weights sum to " + std::to_string(total));
    // Absorb serialization rounding; anything past the slack was rejected above.
    weights_ /= total;
  }

  // Equal-weight cloud.
  explicit DiscreteMeasure(Eigen::MatrixXd atoms)
      : DiscreteMeasure(std::move(atoms),
                        Eigen::VectorXd::Constant(atoms.rows(), 1.0 / static_cast<double>(atoms.rows()))) {}

  static DiscreteMeasure dirac(const Eigen::VectorXd& point) {
    Eigen::MatrixXd a(1, point.size());
    a.row(0) = point;
    return DiscreteMeasure(std::move(a), Eigen::VectorXd::Ones(1));
  }

  Eigen::Index size() const { return atoms_.rows(); }
  Eigen::Index dim() const { return atoms_.cols(); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::RowVectorXd atom(Eigen::Index i) const { return atoms_.row(i); }
  double weight(Eigen::Index i) const { return weights_[i]; }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

// Gaussian N(mean, cov) with symmetric positive definite covariance.
class GaussianMeasure {
 public:
  GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    require(mean_.size() >= 1, ErrorCode::InvalidMeasure, "dimension must be >= 1");
    require(cov_.rows() == mean_.size() && cov_.cols() == mean_.size(),
            ErrorCode::InvalidMeasure, "covariance shape mismatch");
    require(mean_.allFinite() && cov_.allFinite(), ErrorCode::InvalidMeasure,
            "non-finite Gaussian parameter");
    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    require(asym <= kSymmetrySlack, ErrorCode::InvalidMeasure,
            "covariance asymmetry " + std::to_string(asym));
    cov_ = 0.5 * (cov_ + cov_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
    require(es.eigenvalues().minCoeff() > kSpdEigenFloor, ErrorCode::InvalidMeasure,
            "covariance not positive definite");
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

// Element of L^2(mu; R^d): one vector per atom of the base measure.
class VelocityField {
 public:
  VelocityField(const DiscreteMeasure& base, Eigen::MatrixXd vectors)
      : base_(&base), vectors_(std::move(vectors)) {
    require(vectors_.rows() == base.size() && vectors_.cols() == base.dim(),
            ErrorCode::DimensionMismatch, "velocity field shape mismatch");
    require(vectors_.allFinite(), ErrorCode::InvalidMeasure, "non-finite velocity");
  }

  const DiscreteMeasure& base() const { return *base_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  Eigen::RowVectorXd at(Eigen::Index i) const { return vectors_.row(i); }

  // sqrt(sum_i w_i ||v_i||^2)
  double l2_norm() const {
    return std::sqrt(base_->weights().dot(vectors_.rowwise().squaredNorm()));
  }

  // <this, other>_{L^2(mu)}; both fields must share the base.
  double inner(const VelocityField& other) const {
    require(other.base_ == base_ && other.vectors_.rows() == vectors_.rows(),
            ErrorCode::DimensionMismatch, "inner product across different bases");
    return base_->weights().dot((vectors_.array() * other.vectors_.array()).rowwise().sum().matrix());
  }

 private:
  const DiscreteMeasure* base_;
  Eigen::MatrixXd vectors_;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double second_moment = 0.0;  // E ||x||^2
};

inline Moments moments(const DiscreteMeasure& mu) {
  Moments m;
  m.mean = mu.atoms().transpose() * mu.weights();
  Eigen::MatrixXd centered = mu.atoms().rowwise() - m.mean.transpose();
  m.covariance = centered.transpose() * mu.weights().asDiagonal() * centered;
  m.second_moment = mu.weights().dot(mu.atoms().rowwise().squaredNorm());
  return m;
}

inline Moments moments(const GaussianMeasure& g) {
  Moments m;
  m.mean = g.mean();
  m.covariance = g.cov();
  m.second_moment = g.cov().trace() + g.mean().squaredNorm();
  return m;
}

// (T#mu): atoms mapped pointwise, weights unchanged. Coincident images are
// kept as separate atoms; merging would change plan dimensions downstream.
inline DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map) {
  Eigen::MatrixXd images(mu.size(), mu.dim());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    Eigen::VectorXd y = map(mu.atoms().row(i).transpose());
    require(y.size() == mu.dim(), ErrorCode::DimensionMismatch, "map changed dimension");
    require(y.allFinite(), ErrorCode::NonFiniteImage,
            "image of atom " + std::to_string(i) + " is not finite");
    images.row(i) = y.transpose();
  }
  return DiscreteMeasure(std::move(images), mu.weights());
}

// Affine pushforward x -> A x + b.
inline DiscreteMeasure pushforward_affine(const DiscreteMeasure& mu, const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& b) {
  require(a.rows() == mu.dim() && a.cols() == mu.dim() && b.size() == mu.dim(),
          ErrorCode::DimensionMismatch, "affine map shape mismatch");
  Eigen::MatrixXd images = (mu.atoms() * a.transpose()).rowwise() + b.transpose();
  require(images.allFinite(), ErrorCode::NonFiniteImage, "affine image not finite");
  return DiscreteMeasure(std::move(images), mu.weights());
}

// Displace every atom by s * field(atom).
inline DiscreteMeasure displace(const DiscreteMeasure& mu, const VelocityField& field, double s) {
  require(&field.base() == &mu, ErrorCode::DimensionMismatch, "field base differs from measure");
  Eigen::MatrixXd images = mu.atoms() + s * field.vectors();
  require(images.allFinite(), ErrorCode::NonFiniteImage, "displaced atom not finite");
  return DiscreteMeasure(std::move(images), mu.weights());
}

// n equal-weight samples from g; deterministic given seed.
inline DiscreteMeasure sample_gaussian(const GaussianMeasure& g, Eigen::Index n,
                                       std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidMeasure, "need at least one sample");
  Rng rng(seed);
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
  Eigen::MatrixXd chol = llt.matrixL();
  Eigen::MatrixXd atoms(n, g.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    atoms.row(i) = (g.mean() + chol * rng.normal_vector(g.dim())).transpose();
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace wassopt
