#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/gaussian.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/network_simplex.hpp"

namespace wassopt {

using Measure = std::variant<DiscreteMeasure, GaussianMeasure>;

// Coupling between two discrete measures together with its squared-distance
// transport cost and the LP dual potentials. Source and target are stored by
// value so a plan stays valid on its own.
class TransportPlan {
 public:
  TransportPlan(DiscreteMeasure source, DiscreteMeasure target, Eigen::MatrixXd gamma, double cost,
                Eigen::VectorXd source_potential, Eigen::VectorXd sink_potential)
      : source_(std::move(source)),
        target_(std::move(target)),
        gamma_(std::move(gamma)),
        cost_(cost),
        source_potential_(std::move(source_potential)),
        sink_potential_(std::move(sink_potential)) {
    validate();
  }

  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  double cost() const { return cost_; }
  const Eigen::VectorXd& source_potential() const { return source_potential_; }
  const Eigen::VectorXd& sink_potential() const { return sink_potential_; }

  // Largest violation of phi_i + psi_j <= ||x_i - y_j||^2 over all pairs; on
  // the support the slack is zero up to round-off. An exact optimizer keeps
  // this below ~1e-7.
  double dual_gap() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < source_.size(); ++i)
      for (Eigen::Index j = 0; j < target_.size(); ++j) {
        const double c = (source_.atoms().row(i) - target_.atoms().row(j)).squaredNorm();
        worst = std::max(worst, source_potential_[i] + sink_potential_[j] - c);
      }
    return worst;
  }

 private:
  void validate() const {
    require(gamma_.rows() == source_.size() && gamma_.cols() == target_.size(),
            ErrorCode::DimensionMismatch, "plan shape mismatch");
    require((gamma_.array() >= 0.0).all(), ErrorCode::InvalidMeasure, "negative plan entry");
    const double row_err = (gamma_.rowwise().sum() - source_.weights()).cwiseAbs().maxCoeff();
    const double col_err =
        (gamma_.colwise().sum().transpose() - target_.weights()).cwiseAbs().maxCoeff();
    require(row_err <= 1e-9, ErrorCode::InvalidMeasure, "row marginals violated");
    require(col_err <= 1e-9, ErrorCode::InvalidMeasure, "column marginals violated");
    double recomputed = 0.0;
    for (Eigen::Index i = 0; i < gamma_.rows(); ++i)
      for (Eigen::Index j = 0; j < gamma_.cols(); ++j)
        if (gamma_(i, j) > 0.0)
          recomputed += gamma_(i, j) * (source_.atoms().row(i) - target_.atoms().row(j)).squaredNorm();
    require(std::abs(recomputed - cost_) <= 1e-9 * (1.0 + std::abs(cost_)),
            ErrorCode::InvalidMeasure, "stored cost disagrees with plan");
  }

  DiscreteMeasure source_;
  DiscreteMeasure target_;
  Eigen::MatrixXd gamma_;
  double cost_;
  Eigen::VectorXd source_potential_;
  Eigen::VectorXd sink_potential_;
};

// Per-atom map T(x_i); deterministic when extracted from a plan whose rows
// each hold a single atom of mass.
class TransportMap {
 public:
  TransportMap(DiscreteMeasure base, Eigen::MatrixXd images, bool deterministic)
      : base_(std::move(base)), images_(std::move(images)), deterministic_(deterministic) {
    require(images_.rows() == base_.size() && images_.cols() == base_.dim(),
            ErrorCode::DimensionMismatch, "map images shape mismatch");
    require(images_.allFinite(), ErrorCode::NonFiniteImage, "non-finite map image");
  }

  const DiscreteMeasure& base() const { return base_; }
  const Eigen::MatrixXd& images() const { return images_; }
  bool deterministic() const { return deterministic_; }

  DiscreteMeasure push() const { return DiscreteMeasure(images_, base_.weights()); }

  // ||T - Id||_{L^2(mu)}
  double displacement_norm() const {
    return std::sqrt(base_.weights().dot((images_ - base_.atoms()).rowwise().squaredNorm()));
  }

 private:
  DiscreteMeasure base_;
  Eigen::MatrixXd images_;
  bool deterministic_;
};

inline Eigen::MatrixXd squared_distance_matrix(const DiscreteMeasure& mu,
                                               const DiscreteMeasure& nu) {
  Eigen::MatrixXd c(mu.size(), nu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    c.row(i) = (nu.atoms().rowwise() - mu.atoms().row(i)).rowwise().squaredNorm().transpose();
  return c;
}

// Exact optimal coupling for the squared Euclidean cost.
inline TransportPlan solve_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.dim() == nu.dim(), ErrorCode::DimensionMismatch, "solve_ot dimension mismatch");
  const Eigen::MatrixXd cost = squared_distance_matrix(mu, nu);
  NetworkSimplex::Solution sol = NetworkSimplex::solve(cost, mu.weights(), nu.weights());
  return TransportPlan(mu, nu, std::move(sol.flow), sol.cost, std::move(sol.source_potential),
                       std::move(sol.sink_potential));
}

// Generic-cost variant used by OT-discrepancy functionals; same LP engine,
// caller-supplied cost matrix, no squared-distance validation.
struct GenericPlan {
  Eigen::MatrixXd gamma;
  double cost = 0.0;
};

inline GenericPlan solve_ot_generic(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const Eigen::MatrixXd& cost) {
  require(cost.rows() == mu.size() && cost.cols() == nu.size(), ErrorCode::DimensionMismatch,
          "cost matrix shape mismatch");
  NetworkSimplex::Solution sol = NetworkSimplex::solve(cost, mu.weights(), nu.weights());
  return GenericPlan{std::move(sol.flow), sol.cost};
}

inline double w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return std::sqrt(std::max(0.0, solve_ot(mu, nu).cost()));
}

inline double w2(const Measure& mu, const Measure& nu) {
  if (std::holds_alternative<DiscreteMeasure>(mu) && std::holds_alternative<DiscreteMeasure>(nu))
    return w2(std::get<DiscreteMeasure>(mu), std::get<DiscreteMeasure>(nu));
  if (std::holds_alternative<GaussianMeasure>(mu) && std::holds_alternative<GaussianMeasure>(nu))
    return gaussian_w2(std::get<GaussianMeasure>(mu), std::get<GaussianMeasure>(nu));
  fail(ErrorCode::MixedRepresentation, "w2 needs two discrete or two Gaussian measures");
}

// Map extraction: exact when every source row carries a single atom of mass,
// otherwise the barycentric projection T(x_i) = sum_j gamma_ij y_j / w_i,
// flagged non-deterministic. Zero-weight rows map to their own atom.
inline TransportMap extract_map(const TransportPlan& plan) {
  const Eigen::Index n = plan.source().size();
  Eigen::MatrixXd images(n, plan.source().dim());
  bool deterministic = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = plan.source().weight(i);
    if (w <= 0.0) {
      images.row(i) = plan.source().atoms().row(i);
      continue;
    }
    Eigen::Index nonzeros = 0;
    Eigen::Index last = -1;
    for (Eigen::Index j = 0; j < plan.target().size(); ++j)
      if (plan.gamma()(i, j) > 0.0) {
        ++nonzeros;
        last = j;
      }
    if (nonzeros == 1) {
      images.row(i) = plan.target().atoms().row(last);
    } else {
      deterministic = false;
      images.row(i) = (plan.gamma().row(i) * plan.target().atoms()) / w;
    }
  }
  return TransportMap(plan.source(), std::move(images), deterministic);
}

// Inverse of a deterministic atom-to-atom map: based at T#mu, sends T(x_i)
// back to x_i. Images must be pairwise distinct.
inline TransportMap invert_map(const TransportMap& map) {
  require(map.deterministic(), ErrorCode::NonInvertible, "cannot invert a barycentric map");
  const Eigen::Index n = map.base().size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      require((map.images().row(i) - map.images().row(j)).norm() > 1e-12,
              ErrorCode::NonInvertible, "coincident images");
  return TransportMap(map.push(), map.base().atoms(), true);
}

// Displacement interpolation ((1-t) proj_1 + t proj_2)#gamma: one atom per
// positive plan entry, weights from the plan. Exact endpoints up to atom
// splitting.
inline DiscreteMeasure geodesic(const TransportPlan& plan, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::TOutOfRange,
          "geodesic parameter " + std::to_string(t));
  std::vector<Eigen::Index> is, js;
  for (Eigen::Index i = 0; i < plan.source().size(); ++i)
    for (Eigen::Index j = 0; j < plan.target().size(); ++j)
      if (plan.gamma()(i, j) > 0.0) {
        is.push_back(i);
        js.push_back(j);
      }
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(is.size()), plan.source().dim());
  Eigen::VectorXd weights(static_cast<Eigen::Index>(is.size()));
  for (std::size_t k = 0; k < is.size(); ++k) {
    atoms.row(static_cast<Eigen::Index>(k)) =
        (1.0 - t) * plan.source().atoms().row(is[k]) + t * plan.target().atoms().row(js[k]);
    weights[static_cast<Eigen::Index>(k)] = plan.gamma()(is[k], js[k]);
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

// Generalized geodesic between mu0 and mu1 through `base`: the two optimal
// plans are glued over the base index, splitting base mass proportionally,
// and the last two marginals are interpolated.
inline DiscreteMeasure generalized_geodesic(const DiscreteMeasure& base, const DiscreteMeasure& mu0,
                                            const DiscreteMeasure& mu1, double t) {
  require(base.dim() == mu0.dim() && base.dim() == mu1.dim(), ErrorCode::DimensionMismatch,
          "generalized geodesic dimension mismatch");
  require(t >= 0.0 && t <= 1.0, ErrorCode::TOutOfRange,
          "geodesic parameter " + std::to_string(t));
  const TransportPlan to0 = solve_ot(base, mu0);
  const TransportPlan to1 = solve_ot(base, mu1);

  std::vector<Eigen::RowVectorXd> atoms;
  std::vector<double> weights;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    const double bk = base.weight(k);
    if (bk <= 0.0) continue;
    for (Eigen::Index i = 0; i < mu0.size(); ++i) {
      const double g0 = to0.gamma()(k, i);
      if (g0 <= 0.0) continue;
      for (Eigen::Index j = 0; j < mu1.size(); ++j) {
        const double g1 = to1.gamma()(k, j);
        if (g1 <= 0.0) continue;
        atoms.emplace_back((1.0 - t) * mu0.atoms().row(i) + t * mu1.atoms().row(j));
        weights.push_back(g0 * g1 / bk);
      }
    }
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(atoms.size()), base.dim());
  Eigen::VectorXd w(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = atoms[k];
    w[static_cast<Eigen::Index>(k)] = weights[k];
  }
  return DiscreteMeasure(std::move(a), std::move(w));
}

// Geodesic retraction onto the closed ball B(center, eps): measures inside
// the ball pass through unchanged, outside ones are pulled to the boundary
// along the geodesic from the center.
inline DiscreteMeasure project_to_ball(const DiscreteMeasure& mu, const DiscreteMeasure& center,
                                       double eps) {
  require(eps > 0.0, ErrorCode::InvalidMeasure, "ball radius must be positive");
  const TransportPlan plan = solve_ot(center, mu);
  const double dist = std::sqrt(std::max(0.0, plan.cost()));
  if (dist <= eps) return mu;
  return geodesic(plan, eps / dist);
}

}  // namespace wassopt
