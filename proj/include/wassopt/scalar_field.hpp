#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"

namespace wassopt {

// Symbolic catalog of potentials V: R^d -> R with analytic gradients. Only
// these forms are admitted so functional descriptors stay serializable.
// Curvature conventions: alpha-convex means hessian >= alpha * I; the
// concavity bound, when available, is the matching upper eigenvalue bound.
class ScalarField {
 public:
  enum class Form { Quadratic, Linear, LogSumExp, Polynomial };

  struct PolyTerm {
    double coef = 0.0;
    std::vector<int> powers;  // one exponent per coordinate
  };

  // V(x) = 1/2 x^T Q x + b^T x + c with Q symmetric.
  static ScalarField quadratic(Eigen::MatrixXd q, Eigen::VectorXd b, double c = 0.0) {
    require(q.rows() == q.cols() && q.rows() == b.size(), ErrorCode::DimensionMismatch,
            "quadratic field shape mismatch");
    require((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + q.cwiseAbs().maxCoeff()),
            ErrorCode::InvalidMeasure, "quadratic matrix must be symmetric");
    ScalarField f;
    f.form_ = Form::Quadratic;
    f.dim_ = b.size();
    f.q_ = 0.5 * (q + q.transpose().eval());
    f.b_ = std::move(b);
    f.c_ = c;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.q_);
    f.alpha_ = es.eigenvalues().minCoeff();
    f.beta_ = es.eigenvalues().maxCoeff();
    f.hess_bound_ = std::max(std::abs(*f.alpha_), std::abs(*f.beta_));
    return f;
  }

  // V(x) = b^T x + c
  static ScalarField linear(Eigen::VectorXd b, double c = 0.0) {
    ScalarField f;
    f.form_ = Form::Linear;
    f.dim_ = b.size();
    f.b_ = std::move(b);
    f.c_ = c;
    f.alpha_ = 0.0;
    f.beta_ = 0.0;
    f.hess_bound_ = 0.0;
    return f;
  }

  // V(x) = log sum_k exp(a_k^T x + b_k), rows of `a` are the a_k.
  static ScalarField log_sum_exp(Eigen::MatrixXd a, Eigen::VectorXd b) {
    require(a.rows() == b.size() && a.rows() >= 1, ErrorCode::DimensionMismatch,
            "log-sum-exp shape mismatch");
    ScalarField f;
    f.form_ = Form::LogSumExp;
    f.dim_ = a.cols();
    f.q_ = std::move(a);
    f.b_ = std::move(b);
    f.alpha_ = 0.0;  // convex
    f.hess_bound_ = f.q_.rowwise().squaredNorm().maxCoeff();
    return f;
  }

  // Multivariate polynomial; the Hessian bound must be declared by the caller
  // (it is only required to hold on the support being probed), the convexity
  // parameter may be.
  static ScalarField polynomial(Eigen::Index dim, std::vector<PolyTerm> terms, double hess_bound,
                                std::optional<double> alpha = std::nullopt) {
    for (const auto& t : terms)
      require(static_cast<Eigen::Index>(t.powers.size()) == dim, ErrorCode::DimensionMismatch,
              "polynomial term arity mismatch");
    ScalarField f;
    f.form_ = Form::Polynomial;
    f.dim_ = dim;
    f.terms_ = std::move(terms);
    f.hess_bound_ = hess_bound;
    f.alpha_ = alpha;
    return f;
  }

  Form form() const { return form_; }
  Eigen::Index dim() const { return dim_; }
  double hess_bound() const { return hess_bound_; }
  std::optional<double> convexity_alpha() const { return alpha_; }
  std::optional<double> concavity_beta() const { return beta_; }

  double operator()(const Eigen::VectorXd& x) const {
    require(x.size() == dim_, ErrorCode::DimensionMismatch, "field argument dimension");
    switch (form_) {
      case Form::Quadratic: return 0.5 * x.dot(q_ * x) + b_.dot(x) + c_;
      case Form::Linear: return b_.dot(x) + c_;
      case Form::LogSumExp: {
        Eigen::VectorXd z = q_ * x + b_;
        const double zmax = z.maxCoeff();
        return zmax + std::log((z.array() - zmax).exp().sum());
      }
      case Form::Polynomial: {
        double v = 0.0;
        for (const auto& t : terms_) {
          double prod = t.coef;
          for (Eigen::Index i = 0; i < dim_; ++i)
            for (int p = 0; p < t.powers[static_cast<std::size_t>(i)]; ++p) prod *= x[i];
          v += prod;
        }
        return v;
      }
    }
    return 0.0;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    require(x.size() == dim_, ErrorCode::DimensionMismatch, "field argument dimension");
    switch (form_) {
      case Form::Quadratic: return q_ * x + b_;
      case Form::Linear: return b_;
      case Form::LogSumExp: {
        Eigen::VectorXd z = q_ * x + b_;
        const double zmax = z.maxCoeff();
        Eigen::VectorXd p = (z.array() - zmax).exp();
        p /= p.sum();
        return q_.transpose() * p;
      }
      case Form::Polynomial: {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
        for (const auto& t : terms_) {
          for (Eigen::Index k = 0; k < dim_; ++k) {
            const int pk = t.powers[static_cast<std::size_t>(k)];
            if (pk == 0) continue;
            double prod = t.coef * pk;
            for (Eigen::Index i = 0; i < dim_; ++i) {
              const int pi = t.powers[static_cast<std::size_t>(i)] - (i == k ? 1 : 0);
              for (int p = 0; p < pi; ++p) prod *= x[i];
            }
            g[k] += prod;
          }
        }
        return g;
      }
    }
    return Eigen::VectorXd::Zero(dim_);
  }

  // Accessors for serialization.
  const Eigen::MatrixXd& matrix() const { return q_; }
  const Eigen::VectorXd& vector() const { return b_; }
  double offset() const { return c_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }

 private:
  ScalarField() = default;

  Form form_ = Form::Linear;
  Eigen::Index dim_ = 0;
  Eigen::MatrixXd q_;   // quadratic matrix, or LSE rows
  Eigen::VectorXd b_;
  double c_ = 0.0;
  std::vector<PolyTerm> terms_;
  double hess_bound_ = 0.0;
  std::optional<double> alpha_;
  std::optional<double> beta_;
};

}  // namespace wassopt
