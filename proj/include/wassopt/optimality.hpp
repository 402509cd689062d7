#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "wassopt/error.hpp"
#include "wassopt/functionals.hpp"
#include "wassopt/measure.hpp"

namespace wassopt {

inline constexpr double kDefaultResidualTol = 1e-8;

struct StationarityReport {
  double residual = 0.0;  // L^2(mu) norm of the Wasserstein gradient
  bool satisfied = false;
  double tolerance = kDefaultResidualTol;
};

// First-order necessary condition for unconstrained optimality: the gradient
// vanishes mu-almost everywhere.
inline StationarityReport check_stationarity(const Functional& j, const DiscreteMeasure& mu,
                                             double tol = kDefaultResidualTol) {
  StationarityReport report;
  report.tolerance = tol;
  report.residual = j.gradient(mu).l2_norm();
  report.satisfied = report.residual <= tol;
  return report;
}

struct LagrangeReport {
  double lambda_hat = 0.0;       // least-squares multiplier in grad J = lambda grad K
  double residual = 0.0;         // || grad J - lambda_hat grad K ||_{L^2(mu)}
  double constraint_value = 0.0; // K(mu)
  double qualification = 0.0;    // max_psi |<grad K, grad psi>| over the test family
};

// Alignment residual for the Lagrange condition grad J = lambda grad K. The
// qualification entry is a sampled proxy for "grad K is non-vanishing": the
// largest pairing of grad K against the polynomial test-field family.
inline LagrangeReport estimate_multiplier(const Functional& j, const Functional& k,
                                          const DiscreteMeasure& mu) {
  const VelocityField gj = j.gradient(mu);
  const VelocityField gk = k.gradient(mu);
  const double gk_sq = gk.inner(gk);
  require(gk_sq > 1e-24, ErrorCode::DegenerateConstraintGradient,
          "constraint gradient vanishes in L^2(mu)");

  LagrangeReport report;
  report.lambda_hat = gj.inner(gk) / gk_sq;
  report.residual =
      VelocityField(mu, gj.vectors() - report.lambda_hat * gk.vectors()).l2_norm();
  report.constraint_value = k.evaluate(mu);
  for (const VelocityField& psi : polynomial_test_fields(mu, 16, 0x517cc1b727220a95ull))
    report.qualification = std::max(report.qualification, std::abs(gk.inner(psi)));
  return report;
}

enum class ConstraintKind { Unconstrained, EqualityLinear, InequalityConvex, OtBall };
enum class Verdict { GlobalMin, StrictMin, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::GlobalMin: return "global_min";
    case Verdict::StrictMin: return "strict_min";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct SufficiencyCertificate {
  ConstraintKind kind = ConstraintKind::Unconstrained;
  double lambda = 0.0;
  double threshold = 0.0;  // lower bound the multiplier had to clear
  bool strict = false;
  Verdict verdict = Verdict::Inconclusive;
  double residual = 0.0;   // first-order residual actually measured
};

// Sufficiency rules, stated for minimization with the multiplier convention
// grad J + lambda grad K = 0 (maximization is certified by negating J):
//  - unconstrained: alpha_J >= 0 at a stationary point gives a global
//    minimizer, strict when alpha_J > 0;
//  - equality with geodesically linear K: any multiplier works, strict when
//    alpha_J > 0;
//  - inequality with both convex, lambda >= 0 and K active: global, strict
//    when alpha_J + lambda alpha_K > 0;
//  - OT-ball constraint with alpha_c-convex cost: lambda >= alpha_J^- /
//    alpha_c, strict when alpha_J > 0 or the inequality is strict.
// Unknown convexity metadata is never an error: the verdict degrades to
// inconclusive, as does any residual or activity failure.
inline SufficiencyCertificate certify(const Functional& j, const Functional* k,
                                      const DiscreteMeasure& mu, double lambda,
                                      ConstraintKind kind, double tol = kDefaultResidualTol,
                                      double constraint_level = 0.0) {
  SufficiencyCertificate cert;
  cert.kind = kind;
  cert.lambda = lambda;

  const VelocityField gj = j.gradient(mu);
  if (kind == ConstraintKind::Unconstrained) {
    cert.residual = gj.l2_norm();
  } else {
    require(k != nullptr, ErrorCode::InvalidMeasure, "constrained certificate needs K");
    const VelocityField gk = k->gradient(mu);
    cert.residual = VelocityField(mu, gj.vectors() + lambda * gk.vectors()).l2_norm();
  }
  if (cert.residual > tol) return cert;

  const Convexity cj = j.convexity();
  const bool j_geodesic = cj.known() && mode_strength(cj.mode) >= mode_strength(ConvexityMode::Geodesic);

  switch (kind) {
    case ConstraintKind::Unconstrained: {
      if (!j_geodesic || *cj.alpha < 0.0) break;
      cert.strict = *cj.alpha > 0.0;
      cert.verdict = cert.strict ? Verdict::StrictMin : Verdict::GlobalMin;
      break;
    }
    case ConstraintKind::EqualityLinear: {
      const Convexity ck = k->convexity();
      const Convexity ckn = k->negation_convexity();
      const bool k_linear = ck.known() && ckn.known() && *ck.alpha == 0.0 && *ckn.alpha == 0.0;
      if (!k_linear || !j_geodesic || *cj.alpha < 0.0) break;
      if (std::abs(k->evaluate(mu) - constraint_level) > tol * (1.0 + std::abs(constraint_level)))
        break;
      cert.strict = *cj.alpha > 0.0;
      cert.verdict = cert.strict ? Verdict::StrictMin : Verdict::GlobalMin;
      break;
    }
    case ConstraintKind::InequalityConvex: {
      const Convexity ck = k->convexity();
      const bool k_geodesic =
          ck.known() && mode_strength(ck.mode) >= mode_strength(ConvexityMode::Geodesic);
      if (!j_geodesic || !k_geodesic || *cj.alpha < 0.0 || *ck.alpha < 0.0 || lambda < 0.0) break;
      if (std::abs(k->evaluate(mu) - constraint_level) > tol * (1.0 + std::abs(constraint_level)))
        break;
      cert.strict = *cj.alpha + lambda * *ck.alpha > 0.0;
      cert.verdict = cert.strict ? Verdict::StrictMin : Verdict::GlobalMin;
      break;
    }
    case ConstraintKind::OtBall: {
      // J must be convex along curves interpolating through the ball center;
      // generalized geodesics suffice for the squared-distance cost.
      if (!cj.known() || mode_strength(cj.mode) < mode_strength(ConvexityMode::GeneralizedGeodesic))
        break;
      std::optional<double> alpha_c;
      if (const auto* disc = dynamic_cast<const OtDiscrepancy*>(k))
        alpha_c = disc->cost().convexity_alpha();
      else if (dynamic_cast<const SquaredW2*>(k))
        alpha_c = 1.0;  // cost 1/2 ||x - y||^2
      if (!alpha_c || *alpha_c <= 0.0) break;
      if (std::abs(k->evaluate(mu) - constraint_level) > tol * (1.0 + std::abs(constraint_level)))
        break;
      const double alpha_j_neg = std::abs(std::min(*cj.alpha, 0.0));
      cert.threshold = alpha_j_neg / *alpha_c;
      if (lambda < cert.threshold) break;
      cert.strict = *cj.alpha > 0.0 || lambda > cert.threshold;
      cert.verdict = cert.strict ? Verdict::StrictMin : Verdict::GlobalMin;
      break;
    }
  }
  return cert;
}

}  // namespace wassopt
