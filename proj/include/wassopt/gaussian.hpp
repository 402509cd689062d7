#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/measure.hpp"

namespace wassopt {

// Symmetric PSD square root; eigenvalues are clamped at zero so that tiny
// negative round-off cannot generate NaNs.
inline Eigen::MatrixXd sqrtm_spd(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

// W2 between Gaussians (Bures form):
//   sqrt(||m_a - m_b||^2 + tr(S_a + S_b - 2 (S_b^{1/2} S_a S_b^{1/2})^{1/2})).
inline double gaussian_w2(const GaussianMeasure& a, const GaussianMeasure& b) {
  require(a.dim() == b.dim(), ErrorCode::DimensionMismatch, "gaussian_w2 dimension mismatch");
  const Eigen::MatrixXd rb = sqrtm_spd(b.cov());
  const Eigen::MatrixXd cross = sqrtm_spd(rb * a.cov() * rb);
  const double trace_part = a.cov().trace() + b.cov().trace() - 2.0 * cross.trace();
  const double sq = (a.mean() - b.mean()).squaredNorm() + std::max(0.0, trace_part);
  return std::sqrt(sq);
}

// KL(a || b) in closed form.
inline double gaussian_kl(const GaussianMeasure& a, const GaussianMeasure& b) {
  require(a.dim() == b.dim(), ErrorCode::DimensionMismatch, "gaussian_kl dimension mismatch");
  const Eigen::Index d = a.dim();
  Eigen::LLT<Eigen::MatrixXd> llt_b(b.cov());
  Eigen::LLT<Eigen::MatrixXd> llt_a(a.cov());
  const Eigen::VectorXd dm = b.mean() - a.mean();
  const double trace_term = llt_b.solve(a.cov()).trace();
  const double quad_term = dm.dot(llt_b.solve(dm));
  double logdet_b = 0.0, logdet_a = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    logdet_b += 2.0 * std::log(llt_b.matrixL()(i, i));
    logdet_a += 2.0 * std::log(llt_a.matrixL()(i, i));
  }
  return 0.5 * (trace_term + quad_term - static_cast<double>(d) + logdet_b - logdet_a);
}

// Negative differential entropy functional (the internal-energy value of a
// Gaussian density): integral of rho log rho = -1/2 log det(2 pi e Sigma).
inline double gaussian_neg_entropy(const GaussianMeasure& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < g.dim(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double d = static_cast<double>(g.dim());
  return -0.5 * (logdet + d * std::log(2.0 * M_PI) + d);
}

// Optimal transport map from a to b: T(x) = m_b + C (x - m_a) with
// C = S_a^{-1/2} (S_a^{1/2} S_b S_a^{1/2})^{1/2} S_a^{-1/2}, symmetric PSD.
struct GaussianMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return linear * x + offset; }
};

inline GaussianMap gaussian_ot_map(const GaussianMeasure& a, const GaussianMeasure& b) {
  require(a.dim() == b.dim(), ErrorCode::DimensionMismatch, "gaussian_ot_map dimension mismatch");
  const Eigen::MatrixXd ra = sqrtm_spd(a.cov());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ra);
  // ra is SPD because a's covariance is; invert through the eigenbasis.
  Eigen::MatrixXd ra_inv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  GaussianMap map;
  map.linear = ra_inv * sqrtm_spd(ra * b.cov() * ra) * ra_inv;
  map.offset = b.mean() - map.linear * a.mean();
  return map;
}

}  // namespace wassopt
