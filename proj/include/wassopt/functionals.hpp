#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/gaussian.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/ot.hpp"
#include "wassopt/random.hpp"
#include "wassopt/scalar_field.hpp"

namespace wassopt {

// Curve class along which a convexity modulus is declared. Convexity along
// any interpolating curve implies convexity along generalized geodesics,
// which implies geodesic convexity.
enum class ConvexityMode { None, Geodesic, GeneralizedGeodesic, AnyInterpolatingCurve };

struct Convexity {
  std::optional<double> alpha;
  ConvexityMode mode = ConvexityMode::None;

  bool known() const { return alpha.has_value() && mode != ConvexityMode::None; }
};

inline int mode_strength(ConvexityMode m) {
  switch (m) {
    case ConvexityMode::None: return 0;
    case ConvexityMode::Geodesic: return 1;
    case ConvexityMode::GeneralizedGeodesic: return 2;
    case ConvexityMode::AnyInterpolatingCurve: return 3;
  }
  return 0;
}

// Affine velocity field x -> M x + v, the exact carrier for gradients of the
// Gaussian-only functionals.
struct AffineField {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Eigen::VectorXd at(const Eigen::VectorXd& x) const { return linear * x + offset; }
};

// Cost functional over the Wasserstein space: evaluation, Wasserstein
// gradient as a velocity field over the atoms, and declared convexity
// metadata. Instances are immutable; all methods are pure.
class Functional {
 public:
  virtual ~Functional() = default;

  virtual std::string kind() const = 0;

  virtual double evaluate(const DiscreteMeasure&) const {
    fail(ErrorCode::IncompatibleRepresentation, kind() + " cannot evaluate a discrete measure");
  }
  virtual double evaluate(const GaussianMeasure&) const {
    fail(ErrorCode::IncompatibleRepresentation, kind() + " cannot evaluate a Gaussian measure");
  }
  virtual VelocityField gradient(const DiscreteMeasure&) const {
    fail(ErrorCode::IncompatibleRepresentation, kind() + " has no discrete gradient");
  }
  // Gaussian-only kinds expose their analytic gradient field.
  virtual AffineField gaussian_gradient(const GaussianMeasure&) const {
    fail(ErrorCode::IncompatibleRepresentation, kind() + " has no Gaussian gradient field");
  }

  virtual Convexity convexity() const { return {}; }
  virtual Convexity negation_convexity() const { return {}; }  // convexity of -J
};

using FunctionalPtr = std::shared_ptr<const Functional>;

inline double evaluate(const Functional& j, const Measure& mu) {
  if (std::holds_alternative<DiscreteMeasure>(mu)) return j.evaluate(std::get<DiscreteMeasure>(mu));
  return j.evaluate(std::get<GaussianMeasure>(mu));
}

// --- Catalog -----------------------------------------------------------------

// J(mu) = E_mu[V]
class ExpectedValue : public Functional {
 public:
  explicit ExpectedValue(ScalarField v) : v_(std::move(v)) {}

  std::string kind() const override { return "expected_value"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const ScalarField& potential() const { return v_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) s += mu.weight(i) * v_(mu.atoms().row(i).transpose());
    return s;
  }

  VelocityField gradient(const DiscreteMeasure& mu) const override {
    Eigen::MatrixXd g(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      g.row(i) = v_.grad(mu.atoms().row(i).transpose()).transpose();
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override {
    if (!v_.convexity_alpha()) return {};
    return {v_.convexity_alpha(), ConvexityMode::AnyInterpolatingCurve};
  }
  Convexity negation_convexity() const override {
    if (!v_.concavity_beta()) return {};
    return {-*v_.concavity_beta(), ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  ScalarField v_;
};

// J(mu) = 1/2 iint U(x - y) d(mu x mu)
class Interaction : public Functional {
 public:
  explicit Interaction(ScalarField u) : u_(std::move(u)) {}

  std::string kind() const override { return "interaction"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const ScalarField& potential() const { return u_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      for (Eigen::Index j = 0; j < mu.size(); ++j)
        s += mu.weight(i) * mu.weight(j) * u_((mu.atoms().row(i) - mu.atoms().row(j)).transpose());
    return 0.5 * s;
  }

  // (grad U * mu)(x_i) = sum_j w_j grad U(x_i - x_j)
  VelocityField gradient(const DiscreteMeasure& mu) const override {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      for (Eigen::Index j = 0; j < mu.size(); ++j)
        g.row(i) += mu.weight(j) * u_.grad((mu.atoms().row(i) - mu.atoms().row(j)).transpose()).transpose();
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override {
    if (u_.convexity_alpha() && *u_.convexity_alpha() >= 0.0)
      return {0.0, ConvexityMode::AnyInterpolatingCurve};
    return {};
  }

 private:
  ScalarField u_;
};

// J(mu) = Var_mu <a, x>
class Variance : public Functional {
 public:
  explicit Variance(Eigen::VectorXd a) : a_(std::move(a)) {
    require(a_.norm() > 0.0, ErrorCode::InvalidMeasure, "variance direction must be nonzero");
  }

  std::string kind() const override { return "variance"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const Eigen::VectorXd& direction() const { return a_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * a_;
    const double mean = mu.weights().dot(proj);
    return mu.weights().dot((proj.array() - mean).square().matrix());
  }

  VelocityField gradient(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * a_;
    const double mean = mu.weights().dot(proj);
    Eigen::MatrixXd g(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i) g.row(i) = 2.0 * (proj[i] - mean) * a_.transpose();
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override { return {0.0, ConvexityMode::AnyInterpolatingCurve}; }
  Convexity negation_convexity() const override {
    return {-2.0 * a_.squaredNorm(), ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  Eigen::VectorXd a_;
};

// J(mu) = E_mu <w, x> + rho Var_mu <w, x>
class MeanVariance : public Functional {
 public:
  MeanVariance(Eigen::VectorXd w, double rho) : w_(std::move(w)), rho_(rho) {
    require(w_.norm() > 0.0, ErrorCode::InvalidMeasure, "direction must be nonzero");
    require(rho_ > 0.0, ErrorCode::InvalidMeasure, "rho must be positive");
  }

  std::string kind() const override { return "mean_variance"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const Eigen::VectorXd& direction() const { return w_; }
  double rho() const { return rho_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * w_;
    const double mean = mu.weights().dot(proj);
    const double var = mu.weights().dot((proj.array() - mean).square().matrix());
    return mean + rho_ * var;
  }

  VelocityField gradient(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * w_;
    const double mean = mu.weights().dot(proj);
    Eigen::MatrixXd g(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      g.row(i) = (1.0 + 2.0 * rho_ * (proj[i] - mean)) * w_.transpose();
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override { return {0.0, ConvexityMode::AnyInterpolatingCurve}; }
  Convexity negation_convexity() const override {
    return {-2.0 * rho_ * w_.squaredNorm(), ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  Eigen::VectorXd w_;
  double rho_;
};

// J(mu) = E_mu <w, x> + rho std_mu <w, x>; the gradient is undefined at zero
// variance and the operation errors there rather than returning a
// subgradient.
class MeanStd : public Functional {
 public:
  MeanStd(Eigen::VectorXd w, double rho) : w_(std::move(w)), rho_(rho) {
    require(w_.norm() > 0.0, ErrorCode::InvalidMeasure, "direction must be nonzero");
    require(rho_ > 0.0, ErrorCode::InvalidMeasure, "rho must be positive");
  }

  std::string kind() const override { return "mean_std"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const Eigen::VectorXd& direction() const { return w_; }
  double rho() const { return rho_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * w_;
    const double mean = mu.weights().dot(proj);
    const double var = mu.weights().dot((proj.array() - mean).square().matrix());
    return mean + rho_ * std::sqrt(std::max(0.0, var));
  }

  VelocityField gradient(const DiscreteMeasure& mu) const override {
    const Eigen::VectorXd proj = mu.atoms() * w_;
    const double mean = mu.weights().dot(proj);
    const double var = mu.weights().dot((proj.array() - mean).square().matrix());
    require(var > 1e-24, ErrorCode::ZeroStd, "mean-std gradient at zero variance");
    const double inv_std = 1.0 / std::sqrt(var);
    Eigen::MatrixXd g(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      g.row(i) = (1.0 + rho_ * (proj[i] - mean) * inv_std) * w_.transpose();
    return VelocityField(mu, std::move(g));
  }

  // Deliberately unknown; certificates for mean-std go through the explicit
  // worst-case bound instead of convexity arithmetic.
  Convexity convexity() const override { return {}; }

 private:
  Eigen::VectorXd w_;
  double rho_;
};

// J(mu) = 1/2 W2(mu, ref)^2
class SquaredW2 : public Functional {
 public:
  explicit SquaredW2(DiscreteMeasure reference) : ref_(std::move(reference)) {}

  std::string kind() const override { return "squared_w2"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const DiscreteMeasure& reference() const { return ref_; }

  double evaluate(const DiscreteMeasure& mu) const override { return 0.5 * solve_ot(mu, ref_).cost(); }

  // Id - T with T the optimal map onto the reference; mass-splitting plans
  // have no gradient here.
  VelocityField gradient(const DiscreteMeasure& mu) const override {
    const TransportMap map = extract_map(solve_ot(mu, ref_));
    require(map.deterministic(), ErrorCode::NondeterministicMap,
            "squared-W2 gradient needs a deterministic optimal map");
    return VelocityField(mu, mu.atoms() - map.images());
  }

  Convexity convexity() const override { return {1.0, ConvexityMode::GeneralizedGeodesic}; }
  Convexity negation_convexity() const override {
    return {-1.0, ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  DiscreteMeasure ref_;
};

// J(mu) = min_coupling int c(x - y) dgamma against a fixed reference, for a
// translation-invariant cost c(x, y) = phi(x - y).
class OtDiscrepancy : public Functional {
 public:
  OtDiscrepancy(ScalarField cost, DiscreteMeasure reference)
      : phi_(std::move(cost)), ref_(std::move(reference)) {
    require(phi_.dim() == ref_.dim(), ErrorCode::DimensionMismatch,
            "cost arity does not match the reference");
  }

  std::string kind() const override { return "ot_discrepancy"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const ScalarField& cost() const { return phi_; }
  const DiscreteMeasure& reference() const { return ref_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    return solve_ot_generic(mu, ref_, cost_matrix(mu)).cost;
  }

  // grad_x c(x_i, T(x_i)) = grad phi(x_i - T(x_i)) with T optimal w.r.t. c.
  VelocityField gradient(const DiscreteMeasure& mu) const override {
    const GenericPlan plan = solve_ot_generic(mu, ref_, cost_matrix(mu));
    Eigen::MatrixXd g(mu.size(), mu.dim());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      Eigen::Index nonzeros = 0, hit = -1;
      for (Eigen::Index j = 0; j < ref_.size(); ++j)
        if (plan.gamma(i, j) > 0.0) {
          ++nonzeros;
          hit = j;
        }
      if (mu.weight(i) <= 0.0) {
        g.row(i).setZero();
        continue;
      }
      require(nonzeros == 1, ErrorCode::NondeterministicMap,
              "OT-discrepancy gradient needs a deterministic optimal map");
      g.row(i) = phi_.grad((mu.atoms().row(i) - ref_.atoms().row(hit)).transpose()).transpose();
    }
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override {
    if (!phi_.convexity_alpha()) return {};
    return {phi_.convexity_alpha(), ConvexityMode::GeneralizedGeodesic};
  }
  Convexity negation_convexity() const override {
    if (!phi_.concavity_beta()) return {};
    return {-*phi_.concavity_beta(), ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  Eigen::MatrixXd cost_matrix(const DiscreteMeasure& mu) const {
    require(mu.dim() == ref_.dim(), ErrorCode::DimensionMismatch, "dimension mismatch");
    Eigen::MatrixXd c(mu.size(), ref_.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      for (Eigen::Index j = 0; j < ref_.size(); ++j)
        c(i, j) = phi_((mu.atoms().row(i) - ref_.atoms().row(j)).transpose());
    return c;
  }

  ScalarField phi_;
  DiscreteMeasure ref_;
};

// J(mu) = int rho log rho for Gaussian mu; gradient field grad(rho)/rho.
class GaussianEntropy : public Functional {
 public:
  std::string kind() const override { return "gaussian_entropy"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;

  double evaluate(const GaussianMeasure& g) const override { return gaussian_neg_entropy(g); }

  AffineField gaussian_gradient(const GaussianMeasure& g) const override {
    Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
    Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(g.dim(), g.dim()));
    return AffineField{-prec, prec * g.mean()};
  }

  Convexity convexity() const override { return {0.0, ConvexityMode::GeneralizedGeodesic}; }
};

// J(mu) = KL(mu || ref) for Gaussian mu and ref; gradient field
// grad(rho)/rho + grad V_ref.
class GaussianKl : public Functional {
 public:
  explicit GaussianKl(GaussianMeasure reference) : ref_(std::move(reference)) {}

  std::string kind() const override { return "gaussian_kl"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const GaussianMeasure& reference() const { return ref_; }

  double evaluate(const GaussianMeasure& g) const override { return gaussian_kl(g, ref_); }

  AffineField gaussian_gradient(const GaussianMeasure& g) const override {
    const Eigen::Index d = g.dim();
    Eigen::MatrixXd prec_g = Eigen::LLT<Eigen::MatrixXd>(g.cov()).solve(Eigen::MatrixXd::Identity(d, d));
    Eigen::MatrixXd prec_r = Eigen::LLT<Eigen::MatrixXd>(ref_.cov()).solve(Eigen::MatrixXd::Identity(d, d));
    return AffineField{prec_r - prec_g, prec_g * g.mean() - prec_r * ref_.mean()};
  }

  Convexity convexity() const override { return {0.0, ConvexityMode::GeneralizedGeodesic}; }

 private:
  GaussianMeasure ref_;
};

// J(mu) = value, gradient zero; the building block for constraint offsets.
class Constant : public Functional {
 public:
  explicit Constant(double value) : value_(value) {}

  std::string kind() const override { return "constant"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  double value() const { return value_; }

  double evaluate(const DiscreteMeasure&) const override { return value_; }
  double evaluate(const GaussianMeasure&) const override { return value_; }
  VelocityField gradient(const DiscreteMeasure& mu) const override {
    return VelocityField(mu, Eigen::MatrixXd::Zero(mu.size(), mu.dim()));
  }

  Convexity convexity() const override { return {0.0, ConvexityMode::AnyInterpolatingCurve}; }
  Convexity negation_convexity() const override {
    return {0.0, ConvexityMode::AnyInterpolatingCurve};
  }

 private:
  double value_;
};

// sum_k coef_k J_k. Convexity metadata combines additively whenever every
// term declares the needed side (the convex side for positive coefficients,
// the concave side otherwise); the curve class degrades to the weakest one.
class LinearCombination : public Functional {
 public:
  struct Term {
    double coef;
    FunctionalPtr functional;
  };

  explicit LinearCombination(std::vector<Term> terms) : terms_(std::move(terms)) {
    require(!terms_.empty(), ErrorCode::InvalidMeasure, "empty combination");
    for (const auto& t : terms_)
      require(t.functional != nullptr, ErrorCode::InvalidMeasure, "null term");
  }

  static FunctionalPtr scaled(double coef, FunctionalPtr f) {
    return std::make_shared<LinearCombination>(std::vector<Term>{{coef, std::move(f)}});
  }
  static FunctionalPtr shifted(FunctionalPtr f, double offset) {
    return std::make_shared<LinearCombination>(
        std::vector<Term>{{1.0, std::move(f)}, {1.0, std::make_shared<Constant>(offset)}});
  }

  std::string kind() const override { return "linear_combination"; }
  using Functional::evaluate;
  using Functional::gradient;
  using Functional::gaussian_gradient;
  const std::vector<Term>& terms() const { return terms_; }

  double evaluate(const DiscreteMeasure& mu) const override {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * t.functional->evaluate(mu);
    return s;
  }
  double evaluate(const GaussianMeasure& mu) const override {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * t.functional->evaluate(mu);
    return s;
  }

  VelocityField gradient(const DiscreteMeasure& mu) const override {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mu.size(), mu.dim());
    for (const auto& t : terms_) g += t.coef * t.functional->gradient(mu).vectors();
    return VelocityField(mu, std::move(g));
  }

  Convexity convexity() const override { return combined(false); }
  Convexity negation_convexity() const override { return combined(true); }

 private:
  Convexity combined(bool negated) const {
    double alpha = 0.0;
    int strength = mode_strength(ConvexityMode::AnyInterpolatingCurve);
    for (const auto& t : terms_) {
      const double c = negated ? -t.coef : t.coef;
      if (c == 0.0) continue;
      const Convexity side = c > 0.0 ? t.functional->convexity() : t.functional->negation_convexity();
      if (!side.known()) return {};
      alpha += std::abs(c) * *side.alpha;
      strength = std::min(strength, mode_strength(side.mode));
    }
    ConvexityMode mode = ConvexityMode::None;
    if (strength == 3) mode = ConvexityMode::AnyInterpolatingCurve;
    else if (strength == 2) mode = ConvexityMode::GeneralizedGeodesic;
    else if (strength == 1) mode = ConvexityMode::Geodesic;
    if (mode == ConvexityMode::None) return {};
    return {alpha, mode};
  }

  std::vector<Term> terms_;
};

// --- Derivative probes -------------------------------------------------------

// Finite-difference quotient (J((Id + s v)#mu) - J(mu)) / s used to validate
// <grad J, v>. The step must keep Id + s v gradient-of-convex on the atoms,
// checked through a pairwise Lipschitz estimate of the field.
inline double directional_derivative(const Functional& j, const DiscreteMeasure& mu,
                                     const VelocityField& field, double s) {
  require(s != 0.0, ErrorCode::StepTooLarge, "step must be nonzero");
  double lip = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    for (Eigen::Index k = i + 1; k < mu.size(); ++k) {
      const double dx = (mu.atoms().row(i) - mu.atoms().row(k)).norm();
      if (dx > 1e-14)
        lip = std::max(lip, (field.vectors().row(i) - field.vectors().row(k)).norm() / dx);
    }
  require(std::abs(s) * lip < 1.0, ErrorCode::StepTooLarge,
          "step times field Lipschitz estimate reaches 1");
  const DiscreteMeasure perturbed = displace(mu, field, s);
  return (j.evaluate(perturbed) - j.evaluate(mu)) / s;
}

// Deterministic family of polynomial gradient fields of degree <= `degree`
// with coefficients in [-1, 1], evaluated on the atoms of mu. Polynomials
// separate velocity fields on finite supports, so the family doubles as a
// constraint-qualification probe.
inline std::vector<VelocityField> polynomial_test_fields(const DiscreteMeasure& mu, int count,
                                                         std::uint64_t seed, int degree = 3) {
  std::vector<VelocityField> fields;
  fields.reserve(static_cast<std::size_t>(count));
  const Eigen::Index d = mu.dim();
  for (int f = 0; f < count; ++f) {
    Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(f + 1));
    std::vector<ScalarField::PolyTerm> terms;
    // Enumerate monomial exponents with total degree in [1, degree + 1]: the
    // field, as a gradient, then has degree <= `degree`.
    std::vector<int> powers(static_cast<std::size_t>(d), 0);
    const int max_total = degree + 1;
    while (true) {
      int total = 0;
      for (int p : powers) total += p;
      if (total >= 1 && total <= max_total)
        terms.push_back({rng.uniform(-1.0, 1.0), powers});
      // Odometer increment over the exponent box [0, max_total]^d.
      Eigen::Index pos = 0;
      while (pos < d) {
        if (++powers[static_cast<std::size_t>(pos)] <= max_total) break;
        powers[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == d) break;
    }
    const ScalarField psi = ScalarField::polynomial(d, std::move(terms), 0.0);
    Eigen::MatrixXd vec(mu.size(), d);
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      vec.row(i) = psi.grad(mu.atoms().row(i).transpose()).transpose();
    fields.emplace_back(mu, std::move(vec));
  }
  return fields;
}

}  // namespace wassopt
