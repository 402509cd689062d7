#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/ot.hpp"
#include "wassopt/polyroots.hpp"

namespace wassopt {

enum class DroKind { Linear, MeanVariance, MeanStd };

inline const char* dro_kind_name(DroKind k) {
  switch (k) {
    case DroKind::Linear: return "linear";
    case DroKind::MeanVariance: return "mean_variance";
    case DroKind::MeanStd: return "mean_std";
  }
  return "linear";
}

// Worst-case risk evaluation over the closed Wasserstein ball B(center, eps)
// for the three catalog cost functionals in direction w.
struct DroInstance {
  DroKind kind = DroKind::Linear;
  Eigen::VectorXd w;
  double rho = 0.0;  // ignored for the linear kind
  DiscreteMeasure center;
  double eps = 0.0;

  void validate() const {
    require(w.size() == center.dim(), ErrorCode::DimensionMismatch,
            "direction/center dimension mismatch");
    require(w.norm() > 0.0, ErrorCode::InvalidMeasure, "w must be nonzero");
    require(eps > 0.0, ErrorCode::InvalidMeasure, "eps must be positive");
    const double m2 = moments(center).second_moment;
    require(eps <= 1e6 * (1.0 + m2), ErrorCode::InvalidMeasure,
            "ball radius out of sane conditioning range");
    if (kind != DroKind::Linear) {
      require(rho > 0.0, ErrorCode::InvalidMeasure, "rho must be positive");
      require(projected_variance() > 1e-12, ErrorCode::ZeroStd,
              "center has (near) zero variance along w");
    }
  }

  double projected_mean() const { return (center.atoms() * w).dot(center.weights()); }

  double projected_variance() const {
    const Eigen::VectorXd proj = center.atoms() * w;
    const double mean = center.weights().dot(proj);
    return center.weights().dot((proj.array() - mean).square().matrix());
  }
};

// Closed-form worst case: an affine gradient-of-convex map T(x) = A x + b with
// A symmetric PSD, the pushforward T#center, and the attained value. The
// boundary distance is recomputed through the exact LP rather than through
// ||T - Id||, as an independent check on the map.
struct DroSolution {
  Eigen::MatrixXd map_linear;
  Eigen::VectorXd map_offset;
  DiscreteMeasure worst_measure;
  double worst_value = 0.0;
  std::optional<double> lambda_star;  // quartic root, mean-variance only
  double boundary_distance = 0.0;
};

namespace detail {

inline DroSolution assemble_dro_solution(const DroInstance& inst, Eigen::MatrixXd a,
                                         Eigen::VectorXd b, double value,
                                         std::optional<double> lambda) {
  DiscreteMeasure worst = pushforward_affine(inst.center, a, b);
  const double boundary = w2(worst, inst.center);
  return DroSolution{std::move(a), std::move(b), std::move(worst), value, lambda, boundary};
}

}  // namespace detail

// T(x) = x + eps w / ||w||, J* = E<w, x> + eps ||w||.
inline DroSolution solve_linear(const DroInstance& inst) {
  inst.validate();
  require(inst.kind == DroKind::Linear, ErrorCode::InvalidMeasure, "instance is not linear");
  const Eigen::Index d = inst.center.dim();
  const double wn = inst.w.norm();
  return detail::assemble_dro_solution(inst, Eigen::MatrixXd::Identity(d, d),
                                       (inst.eps / wn) * inst.w,
                                       inst.projected_mean() + inst.eps * wn, std::nullopt);
}

// Coefficients (ascending) of the multiplier quartic for mean-variance:
//   l^4 - 2 rho ||w||^2 l^3
//   + (-(rho^2 ||w||^2 / eps^2) Var - ||w||^2 / (4 eps^2) + rho^2 ||w||^4) l^2
//   + (rho ||w||^4 / (2 eps^2)) l - rho^2 ||w||^6 / (4 eps^2).
inline Eigen::VectorXd mean_variance_quartic(const DroInstance& inst) {
  const double wsq = inst.w.squaredNorm();
  const double var = inst.projected_variance();
  const double eps2 = inst.eps * inst.eps;
  Eigen::VectorXd c(5);
  c[4] = 1.0;
  c[3] = -2.0 * inst.rho * wsq;
  c[2] = -(inst.rho * inst.rho * wsq / eps2) * var - wsq / (4.0 * eps2) +
         inst.rho * inst.rho * wsq * wsq;
  c[1] = inst.rho * wsq * wsq / (2.0 * eps2);
  c[0] = -inst.rho * inst.rho * wsq * wsq * wsq / (4.0 * eps2);
  return c;
}

// Worst case of E<w, x> + rho Var<w, x>: the multiplier is the unique real
// quartic root strictly above rho ||w||^2; the map inflates along w.
inline DroSolution solve_mean_variance(const DroInstance& inst) {
  inst.validate();
  require(inst.kind == DroKind::MeanVariance, ErrorCode::InvalidMeasure,
          "instance is not mean-variance");
  const double wsq = inst.w.squaredNorm();
  const Eigen::VectorXd quartic = mean_variance_quartic(inst);

  // Strictness margin scaled to the root size; roots at the boundary signal
  // an instance next to the excluded degenerate set.
  std::vector<double> admissible;
  for (double root : real_polynomial_roots(quartic))
    if (root > inst.rho * wsq * (1.0 + 1e-12)) admissible.push_back(root);
  require(!admissible.empty(), ErrorCode::NoValidRoot,
          "no real quartic root above rho ||w||^2");
  require(admissible.size() == 1, ErrorCode::MultipleValidRoots,
          "several quartic roots above rho ||w||^2");
  const double lambda = admissible.front();

  const double ratio = inst.rho / lambda;                // rho / lambda*
  const double gain = 1.0 / (1.0 - ratio * wsq);         // 1 / (1 - (rho/lambda)||w||^2)
  const double mean = inst.projected_mean();
  const double var = inst.projected_variance();

  const Eigen::Index d = inst.center.dim();
  Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(d, d) + (ratio * gain) * (inst.w * inst.w.transpose());
  Eigen::VectorXd b = (1.0 / (2.0 * lambda) - ratio * gain * mean) * inst.w;
  const double value = mean + wsq / (2.0 * lambda) + inst.rho * gain * gain * var;
  return detail::assemble_dro_solution(inst, std::move(a), std::move(b), value, lambda);
}

// Worst case of E<w, x> + rho std<w, x>: attains the explicit upper bound
// J(center) + eps ||w|| sqrt(1 + rho^2).
inline DroSolution solve_mean_std(const DroInstance& inst) {
  inst.validate();
  require(inst.kind == DroKind::MeanStd, ErrorCode::InvalidMeasure, "instance is not mean-std");
  const double wn = inst.w.norm();
  const double mean = inst.projected_mean();
  const double stddev = std::sqrt(inst.projected_variance());
  const double amp = std::sqrt(1.0 + inst.rho * inst.rho);

  const Eigen::Index d = inst.center.dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) +
                      (inst.rho * inst.eps / (wn * amp * stddev)) * (inst.w * inst.w.transpose());
  Eigen::VectorXd b =
      (1.0 - inst.rho * mean / stddev) * (inst.eps / amp) * (inst.w / wn);
  const double value = mean + inst.rho * stddev + inst.eps * wn * amp;
  return detail::assemble_dro_solution(inst, std::move(a), std::move(b), value, std::nullopt);
}

// Dual objective of the linear worst case at multiplier lambda > 0:
//   lambda eps^2 + E<w, x> + ||w||^2 / (4 lambda),
// from the analytic inner infimum inf_y lambda ||x-y||^2 - <w, y>. Weak
// duality makes this an upper bound for every admissible lambda; it is tight
// at lambda = ||w|| / (2 eps).
inline double dual_value_linear(const DroInstance& inst, double lambda) {
  inst.validate();
  require(inst.kind == DroKind::Linear, ErrorCode::InvalidMeasure, "instance is not linear");
  require(lambda > 0.0, ErrorCode::NonpositiveLambda, "dual multiplier must be positive");
  return lambda * inst.eps * inst.eps + inst.projected_mean() +
         inst.w.squaredNorm() / (4.0 * lambda);
}

inline DroSolution solve_dro(const DroInstance& inst) {
  switch (inst.kind) {
    case DroKind::Linear: return solve_linear(inst);
    case DroKind::MeanVariance: return solve_mean_variance(inst);
    case DroKind::MeanStd: return solve_mean_std(inst);
  }
  fail(ErrorCode::InvalidMeasure, "unknown DRO kind");
}

}  // namespace wassopt
