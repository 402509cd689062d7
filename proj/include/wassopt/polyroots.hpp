#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wassopt/error.hpp"

namespace wassopt {

// Real roots of sum_k coeffs[k] x^k via companion-matrix eigenvalues, with a
// |Im| <= 1e-9 (1 + |Re|) realness filter and a few Newton polish steps.
// Robust for the quartics that show up here; no closed-form branch hazards.
inline std::vector<double> real_polynomial_roots(const Eigen::VectorXd& coeffs) {
  Eigen::Index degree = coeffs.size() - 1;
  while (degree > 0 && coeffs[degree] == 0.0) --degree;
  require(degree >= 1, ErrorCode::NoValidRoot, "polynomial is constant");

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs[i] / coeffs[degree];

  const auto eval = [&](double x, double* deriv) {
    double p = 0.0, dp = 0.0;
    for (Eigen::Index k = degree; k >= 0; --k) {
      dp = dp * x + p;
      p = p * x + coeffs[k];
    }
    if (deriv) *deriv = dp;
    return p;
  };

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < degree; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-9 * (1.0 + std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 3; ++it) {
      double dp = 0.0;
      const double p = eval(x, &dp);
      if (std::abs(dp) < 1e-300) break;
      const double step = p / dp;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    roots.push_back(x);
  }
  return roots;
}

}  // namespace wassopt
