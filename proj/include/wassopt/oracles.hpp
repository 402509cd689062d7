#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/ot.hpp"
#include "wassopt/parallel.hpp"
#include "wassopt/random.hpp"

namespace wassopt {

// Brute-force verifiers kept deliberately independent of the solvers they
// check: no LP, no Bures formula, no shared code path beyond the measure
// types.

struct OracleBudget {
  int max_candidates = 100;
  std::uint64_t seed = 0;
  int grid_resolution = 128;

  void validate() const {
    require(max_candidates >= 0, ErrorCode::InvalidMeasure, "negative candidate budget");
    require(grid_resolution >= 2, ErrorCode::InvalidMeasure, "grid resolution too small");
  }
};

struct PermutationOtResult {
  double cost = 0.0;
  std::vector<Eigen::Index> matching;  // matching[i] = target index for source i
};

// Exact minimum over all n! matchings for uniform-weight clouds of equal
// size; the Birkhoff extreme points of the uniform transportation polytope.
inline PermutationOtResult permutation_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require(mu.dim() == nu.dim(), ErrorCode::DimensionMismatch, "dimension mismatch");
  require(mu.size() == nu.size(), ErrorCode::TooLarge, "need equal atom counts");
  require(mu.size() <= 7, ErrorCode::TooLarge, "permutation oracle capped at n = 7");
  const double uniform = 1.0 / static_cast<double>(mu.size());
  require((mu.weights().array() - uniform).abs().maxCoeff() <= 1e-12 &&
              (nu.weights().array() - uniform).abs().maxCoeff() <= 1e-12,
          ErrorCode::InvalidMeasure, "permutation oracle needs uniform weights");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(mu.size()));
  std::iota(perm.begin(), perm.end(), 0);
  PermutationOtResult best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      cost += uniform * (mu.atoms().row(i) - nu.atoms().row(perm[static_cast<std::size_t>(i)]))
                            .squaredNorm();
    if (cost < best.cost) {
      best.cost = cost;
      best.matching = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Random measures inside the closed ball B(center, eps): gradient-of-convex
// pushforwards (random SPD linear part, random shift) retracted into the
// ball. Deterministic per (seed, index), so candidates may be generated in
// any order.
inline std::vector<DiscreteMeasure> random_feasible(const DiscreteMeasure& center, double eps,
                                                    const OracleBudget& budget) {
  budget.validate();
  require(eps > 0.0, ErrorCode::InvalidMeasure, "eps must be positive");
  std::vector<std::optional<DiscreteMeasure>> slots(
      static_cast<std::size_t>(budget.max_candidates));
  parallel_for(slots.size(), [&](std::size_t k) {
    Rng rng(budget.seed + 0x2545f4914f6cdd1dull * static_cast<std::uint64_t>(k + 1));
    const Eigen::MatrixXd a = rng.spd_matrix(center.dim());
    const Eigen::VectorXd b = eps * rng.normal_vector(center.dim());
    slots[k] = project_to_ball(pushforward_affine(center, a, b), center, eps);
  });
  std::vector<DiscreteMeasure> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

// --- Gaussian KL grid oracle -------------------------------------------------

struct GridKlResult {
  double value = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // per-axis, in the common eigenbasis
};

namespace detail {

inline double kl_1d(double m, double s, double mp, double sp) {
  const double r = (s * s) / (sp * sp);
  return 0.5 * (r + (m - mp) * (m - mp) / (sp * sp) - 1.0 - std::log(r));
}

// Candidate KL as a function of the offset u from the reference parameters;
// the first half of u shifts means, the second half shifts axis stddevs.
struct KlObjective {
  Eigen::VectorXd ref_mean, ref_std, prior_mean, prior_std;

  double operator()(const Eigen::VectorXd& u) const {
    const Eigen::Index d = ref_mean.size();
    double kl = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double s = ref_std[i] + u[d + i];
      if (s <= 1e-8) return std::numeric_limits<double>::infinity();
      kl += kl_1d(ref_mean[i] + u[i], s, prior_mean[i], prior_std[i]);
    }
    return kl;
  }
};

// Map hyperspherical angles to a point of norm eps in R^p.
inline Eigen::VectorXd sphere_point(const Eigen::VectorXd& angles, double eps) {
  const Eigen::Index p = angles.size() + 1;
  Eigen::VectorXd u(p);
  double sin_prod = 1.0;
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    u[i] = eps * sin_prod * std::cos(angles[i]);
    sin_prod *= std::sin(angles[i]);
  }
  u[p - 1] = eps * sin_prod;
  return u;
}

inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             int iters) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

// Grid + golden-section minimization of the Gaussian KL over the sphere
// W2 = eps around the reference, for d = 1 or commuting d = 2 instances
// (candidates share the common eigenbasis, where both the KL and the
// constraint split across axes). Declared accurate to about 1e-4 relative.
inline GridKlResult grid_kl_oracle(const GaussianMeasure& prior, const GaussianMeasure& reference,
                                   double eps, const OracleBudget& budget) {
  budget.validate();
  require(prior.dim() == reference.dim(), ErrorCode::DimensionMismatch, "dimension mismatch");
  require(eps > 0.0, ErrorCode::InvalidMeasure, "eps must be positive");
  const Eigen::Index d = prior.dim();
  require(d <= 2, ErrorCode::TooLarge, "grid oracle handles d = 1 or commuting d = 2");

  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(d, d);
  if (d == 2) {
    const Eigen::MatrixXd commutator =
        prior.cov() * reference.cov() - reference.cov() * prior.cov();
    require(commutator.norm() <= 1e-10 * (1.0 + prior.cov().norm() * reference.cov().norm()),
            ErrorCode::TooLarge, "grid oracle needs commuting covariances");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reference.cov());
    basis = es.eigenvectors();
  }

  detail::KlObjective objective;
  objective.ref_mean = basis.transpose() * reference.mean();
  objective.prior_mean = basis.transpose() * prior.mean();
  objective.ref_std = (basis.transpose() * reference.cov() * basis).diagonal().cwiseSqrt();
  objective.prior_std = (basis.transpose() * prior.cov() * basis).diagonal().cwiseSqrt();

  // Interior candidate: the prior itself, when feasible. In the common basis
  // the squared distance splits across axes.
  double prior_dist_sq = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double dm = objective.prior_mean[i] - objective.ref_mean[i];
    const double ds = objective.prior_std[i] - objective.ref_std[i];
    prior_dist_sq += dm * dm + ds * ds;
  }
  if (prior_dist_sq <= eps * eps) {
    GridKlResult res;
    res.value = 0.0;
    res.mean = prior.mean();
    res.stddev = objective.prior_std;
    return res;
  }

  // Boundary search over hyperspherical angles (1 angle for d = 1, 3 for
  // d = 2). Coarse grid first, then cyclic golden-section sweeps.
  const Eigen::Index num_angles = 2 * d - 1;
  const int res = budget.grid_resolution;
  Eigen::VectorXd best_angles = Eigen::VectorXd::Zero(num_angles);
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> idx(static_cast<std::size_t>(num_angles), 0);
  while (true) {
    Eigen::VectorXd angles(num_angles);
    for (Eigen::Index i = 0; i < num_angles; ++i)
      angles[i] = 2.0 * M_PI * idx[static_cast<std::size_t>(i)] / res;
    const double val = objective(detail::sphere_point(angles, eps));
    if (val < best) {
      best = val;
      best_angles = angles;
    }
    Eigen::Index pos = 0;
    while (pos < num_angles) {
      if (++idx[static_cast<std::size_t>(pos)] < res) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == num_angles) break;
  }

  double window = 2.0 * M_PI / res;
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (Eigen::Index i = 0; i < num_angles; ++i) {
      Eigen::VectorXd angles = best_angles;
      const double refined = detail::golden_section(
          [&](double a) {
            angles[i] = a;
            return objective(detail::sphere_point(angles, eps));
          },
          best_angles[i] - window, best_angles[i] + window, 48);
      angles[i] = refined;
      const double val = objective(detail::sphere_point(angles, eps));
      if (val < best) {
        best = val;
        best_angles = angles;
      }
    }
    window *= 0.5;
  }

  const Eigen::VectorXd u = detail::sphere_point(best_angles, eps);
  GridKlResult out;
  out.value = best;
  out.mean = basis * (objective.ref_mean + u.head(d));
  out.stddev = objective.ref_std + u.tail(d);
  return out;
}

// Least-squares slope of log(remainder) against log(step); steps and
// remainders must be positive and equally sized.
inline double loglog_slope(const std::vector<double>& steps, const std::vector<double>& values) {
  require(steps.size() == values.size() && steps.size() >= 2, ErrorCode::InvalidMeasure,
          "need matching step/value samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double x = std::log(steps[i]);
    const double y = std::log(values[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace wassopt
