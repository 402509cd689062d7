#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "wassopt/error.hpp"
#include "wassopt/functionals.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/ot.hpp"

namespace wassopt {

struct BallConstraint {
  DiscreteMeasure center;
  double eps = 0.0;
};

enum class FlowDirection { Descent, Ascent };

struct FlowConfig {
  double step = 0.1;
  int max_iters = 1000;
  double stationarity_tol = 1e-8;
  std::optional<BallConstraint> ball;
  FlowDirection direction = FlowDirection::Descent;
  std::uint64_t seed = 0;

  void validate() const {
    require(step > 0.0, ErrorCode::InvalidMeasure, "step must be positive");
    require(max_iters >= 1, ErrorCode::InvalidMeasure, "need at least one iteration");
    if (ball) require(ball->eps > 0.0, ErrorCode::InvalidMeasure, "ball radius must be positive");
  }
};

struct FlowStep {
  int iter = 0;
  double value = 0.0;     // J at the iterate
  double residual = 0.0;  // stationarity or Lagrange alignment residual
  double distance = std::numeric_limits<double>::quiet_NaN();  // W2 to ball center
};

struct FlowTrace {
  std::vector<FlowStep> iterates;
  DiscreteMeasure final;
  bool converged = false;
  double multiplier = 0.0;  // last alignment multiplier (constrained runs)
};

// Explicit Euler particle flow mu_{k+1} = (Id -/+ step * grad J(mu_k))#mu_k,
// projected onto the Wasserstein ball after each step when constrained.
// Unconstrained runs stop once the gradient norm falls below the tolerance;
// constrained runs stop when the gradient aligns with Id - T (the gradient of
// the squared-distance-to-center functional) with a multiplier of the sign
// the optimization direction demands.
inline FlowTrace run_flow(const Functional& j, const DiscreteMeasure& mu0, const FlowConfig& cfg) {
  cfg.validate();
  const double sign = cfg.direction == FlowDirection::Descent ? -1.0 : 1.0;

  DiscreteMeasure mu = mu0;
  FlowTrace trace{.iterates = {}, .final = mu0, .converged = false, .multiplier = 0.0};
  trace.iterates.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);

  for (int iter = 0;; ++iter) {
    const VelocityField grad = j.gradient(mu);

    FlowStep step;
    step.iter = iter;
    step.value = j.evaluate(mu);

    bool stop = false;
    if (!cfg.ball) {
      step.residual = grad.l2_norm();
      stop = step.residual <= cfg.stationarity_tol;
    } else {
      const TransportPlan plan = solve_ot(mu, cfg.ball->center);
      step.distance = std::sqrt(std::max(0.0, plan.cost()));
      // Complementary slackness: inside the ball the constraint is inactive
      // and plain stationarity is demanded; on the boundary the gradient must
      // align with Id - T (the gradient of 1/2 W2^2 to the center, with the
      // barycentric image standing in when the plan splits mass) with a
      // multiplier of the correct sign.
      const bool boundary_active = cfg.ball->eps - step.distance <= 1e-8 * (1.0 + cfg.ball->eps);
      const TransportMap to_center = extract_map(plan);
      const VelocityField gk = VelocityField(mu, mu.atoms() - to_center.images());
      const double gk_sq = gk.inner(gk);
      if (!boundary_active || gk_sq <= 1e-24) {
        step.residual = grad.l2_norm();
        stop = step.residual <= cfg.stationarity_tol;
        if (stop) trace.multiplier = 0.0;
      } else {
        const double lambda = grad.inner(gk) / gk_sq;
        step.residual = VelocityField(mu, grad.vectors() - lambda * gk.vectors()).l2_norm();
        const bool sign_ok =
            cfg.direction == FlowDirection::Ascent ? lambda >= -1e-12 : lambda <= 1e-12;
        stop = sign_ok && step.residual <= cfg.stationarity_tol;
        trace.multiplier = lambda;
      }
    }
    trace.iterates.push_back(step);

    if (stop) {
      trace.converged = true;
      break;
    }
    if (iter == cfg.max_iters) break;

    DiscreteMeasure next = displace(mu, grad, sign * cfg.step);
    require(next.atoms().cwiseAbs().maxCoeff() < 1e12, ErrorCode::NonFiniteIterate,
            "flow iterate diverged");
    if (cfg.ball) next = project_to_ball(next, cfg.ball->center, cfg.ball->eps);
    mu = std::move(next);
  }

  trace.final = mu;
  return trace;
}

}  // namespace wassopt
