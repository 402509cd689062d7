#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "wassopt/dro.hpp"
#include "wassopt/error.hpp"
#include "wassopt/flows.hpp"
#include "wassopt/functionals.hpp"
#include "wassopt/kl_ball.hpp"
#include "wassopt/measure.hpp"
#include "wassopt/optimality.hpp"
#include "wassopt/scalar_field.hpp"

namespace wassopt::io {

// Serialization uses ordered json so identical inputs yield byte-identical
// output; doubles go through the round-trip-exact shortest representation.
using json = nlohmann::ordered_json;

inline json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  require(j.is_array(), ErrorCode::ParseError, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) {
    require(x.is_number(), ErrorCode::ParseError, "expected a number");
    v[i++] = x.get<double>();
  }
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), ErrorCode::ParseError, "expected a nonempty matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  Eigen::Index i = 0;
  for (const auto& row : j) {
    const Eigen::VectorXd r = vector_from_json(row);
    if (cols < 0) {
      cols = r.size();
      m.resize(rows, cols);
    }
    require(r.size() == cols, ErrorCode::ParseError, "ragged matrix rows");
    m.row(i++) = r.transpose();
  }
  return m;
}

// --- Measures ------------------------------------------------------------

inline json to_json(const DiscreteMeasure& mu) {
  return json{{"type", "discrete"}, {"atoms", to_json(mu.atoms())}, {"weights", to_json(mu.weights())}};
}

inline json to_json(const GaussianMeasure& g) {
  return json{{"type", "gaussian"}, {"mean", to_json(g.mean())}, {"cov", to_json(g.cov())}};
}

inline json to_json(const Measure& m) {
  if (std::holds_alternative<DiscreteMeasure>(m)) return to_json(std::get<DiscreteMeasure>(m));
  return to_json(std::get<GaussianMeasure>(m));
}

inline Measure measure_from_json(const json& j) {
  require(j.is_object() && j.contains("type"), ErrorCode::ParseError,
          "measure needs a \"type\" tag");
  const std::string type = j.at("type").get<std::string>();
  if (type == "discrete")
    return DiscreteMeasure(matrix_from_json(j.at("atoms")), vector_from_json(j.at("weights")));
  if (type == "gaussian")
    return GaussianMeasure(vector_from_json(j.at("mean")), matrix_from_json(j.at("cov")));
  fail(ErrorCode::ParseError, "unknown measure type \"" + type + "\"");
}

inline DiscreteMeasure discrete_from_json(const json& j) {
  Measure m = measure_from_json(j);
  require(std::holds_alternative<DiscreteMeasure>(m), ErrorCode::IncompatibleRepresentation,
          "expected a discrete measure");
  return std::get<DiscreteMeasure>(std::move(m));
}

inline GaussianMeasure gaussian_from_json(const json& j) {
  Measure m = measure_from_json(j);
  require(std::holds_alternative<GaussianMeasure>(m), ErrorCode::IncompatibleRepresentation,
          "expected a gaussian measure");
  return std::get<GaussianMeasure>(std::move(m));
}

// --- Scalar fields ---------------------------------------------------------

inline json to_json(const ScalarField& f) {
  switch (f.form()) {
    case ScalarField::Form::Quadratic:
      return json{{"form", "quadratic"}, {"Q", to_json(f.matrix())}, {"b", to_json(f.vector())},
                  {"c", f.offset()}};
    case ScalarField::Form::Linear:
      return json{{"form", "linear"}, {"b", to_json(f.vector())}, {"c", f.offset()}};
    case ScalarField::Form::LogSumExp:
      return json{{"form", "log_sum_exp"}, {"A", to_json(f.matrix())}, {"b", to_json(f.vector())}};
    case ScalarField::Form::Polynomial: {
      json terms = json::array();
      for (const auto& t : f.terms()) terms.push_back(json{{"coef", t.coef}, {"powers", t.powers}});
      json out{{"form", "polynomial"}, {"dim", f.dim()}, {"terms", terms},
               {"hess_bound", f.hess_bound()}};
      if (f.convexity_alpha()) out["alpha"] = *f.convexity_alpha();
      return out;
    }
  }
  fail(ErrorCode::ParseError, "unknown scalar field form");
}

inline ScalarField scalar_field_from_json(const json& j) {
  require(j.is_object() && j.contains("form"), ErrorCode::ParseError,
          "scalar field needs a \"form\" tag");
  const std::string form = j.at("form").get<std::string>();
  if (form == "quadratic")
    return ScalarField::quadratic(matrix_from_json(j.at("Q")), vector_from_json(j.at("b")),
                                  j.value("c", 0.0));
  if (form == "linear") return ScalarField::linear(vector_from_json(j.at("b")), j.value("c", 0.0));
  if (form == "log_sum_exp")
    return ScalarField::log_sum_exp(matrix_from_json(j.at("A")), vector_from_json(j.at("b")));
  if (form == "polynomial") {
    std::vector<ScalarField::PolyTerm> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()});
    std::optional<double> alpha;
    if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
    return ScalarField::polynomial(j.at("dim").get<Eigen::Index>(), std::move(terms),
                                   j.at("hess_bound").get<double>(), alpha);
  }
  fail(ErrorCode::ParseError, "unknown scalar field form \"" + form + "\"");
}

// --- Functionals -----------------------------------------------------------

inline json to_json(const Functional& f);

inline json functional_body(const Functional& f) {
  if (const auto* ev = dynamic_cast<const ExpectedValue*>(&f))
    return json{{"kind", "expected_value"}, {"potential", to_json(ev->potential())}};
  if (const auto* in = dynamic_cast<const Interaction*>(&f))
    return json{{"kind", "interaction"}, {"potential", to_json(in->potential())}};
  if (const auto* var = dynamic_cast<const Variance*>(&f))
    return json{{"kind", "variance"}, {"a", to_json(var->direction())}};
  if (const auto* mv = dynamic_cast<const MeanVariance*>(&f))
    return json{{"kind", "mean_variance"}, {"w", to_json(mv->direction())}, {"rho", mv->rho()}};
  if (const auto* ms = dynamic_cast<const MeanStd*>(&f))
    return json{{"kind", "mean_std"}, {"w", to_json(ms->direction())}, {"rho", ms->rho()}};
  if (const auto* sw = dynamic_cast<const SquaredW2*>(&f))
    return json{{"kind", "squared_w2"}, {"reference", to_json(sw->reference())}};
  if (const auto* od = dynamic_cast<const OtDiscrepancy*>(&f))
    return json{{"kind", "ot_discrepancy"}, {"cost", to_json(od->cost())},
                {"reference", to_json(od->reference())}};
  if (dynamic_cast<const GaussianEntropy*>(&f)) return json{{"kind", "gaussian_entropy"}};
  if (const auto* kl = dynamic_cast<const GaussianKl*>(&f))
    return json{{"kind", "gaussian_kl"}, {"reference", to_json(kl->reference())}};
  if (const auto* c = dynamic_cast<const Constant*>(&f))
    return json{{"kind", "constant"}, {"value", c->value()}};
  if (const auto* lc = dynamic_cast<const LinearCombination*>(&f)) {
    json terms = json::array();
    for (const auto& t : lc->terms())
      terms.push_back(json{{"coef", t.coef}, {"functional", to_json(*t.functional)}});
    return json{{"kind", "linear_combination"}, {"terms", terms}};
  }
  fail(ErrorCode::ParseError, "unserializable functional kind \"" + f.kind() + "\"");
}

inline json to_json(const Functional& f) { return functional_body(f); }

inline FunctionalPtr functional_from_json(const json& j) {
  require(j.is_object() && j.contains("kind"), ErrorCode::ParseError,
          "functional needs a \"kind\" tag");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "expected_value")
    return std::make_shared<ExpectedValue>(scalar_field_from_json(j.at("potential")));
  if (kind == "interaction")
    return std::make_shared<Interaction>(scalar_field_from_json(j.at("potential")));
  if (kind == "variance") return std::make_shared<Variance>(vector_from_json(j.at("a")));
  if (kind == "mean_variance")
    return std::make_shared<MeanVariance>(vector_from_json(j.at("w")), j.at("rho").get<double>());
  if (kind == "mean_std")
    return std::make_shared<MeanStd>(vector_from_json(j.at("w")), j.at("rho").get<double>());
  if (kind == "squared_w2")
    return std::make_shared<SquaredW2>(discrete_from_json(j.at("reference")));
  if (kind == "ot_discrepancy")
    return std::make_shared<OtDiscrepancy>(scalar_field_from_json(j.at("cost")),
                                           discrete_from_json(j.at("reference")));
  if (kind == "gaussian_entropy") return std::make_shared<GaussianEntropy>();
  if (kind == "gaussian_kl")
    return std::make_shared<GaussianKl>(gaussian_from_json(j.at("reference")));
  if (kind == "constant") return std::make_shared<Constant>(j.at("value").get<double>());
  if (kind == "linear_combination") {
    std::vector<LinearCombination::Term> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({t.at("coef").get<double>(), functional_from_json(t.at("functional"))});
    return std::make_shared<LinearCombination>(std::move(terms));
  }
  fail(ErrorCode::ParseError, "unknown functional kind \"" + kind + "\"");
}

// --- Reports and solutions ---------------------------------------------------

inline json to_json(const StationarityReport& r) {
  return json{{"residual", r.residual}, {"satisfied", r.satisfied}, {"tolerance", r.tolerance}};
}

inline json to_json(const LagrangeReport& r) {
  return json{{"lambda_hat", r.lambda_hat}, {"residual", r.residual},
              {"constraint_value", r.constraint_value}, {"qualification", r.qualification}};
}

inline json to_json(const SufficiencyCertificate& c) {
  const char* kind = "unconstrained";
  switch (c.kind) {
    case ConstraintKind::Unconstrained: kind = "unconstrained"; break;
    case ConstraintKind::EqualityLinear: kind = "equality_linear"; break;
    case ConstraintKind::InequalityConvex: kind = "inequality_convex"; break;
    case ConstraintKind::OtBall: kind = "ot_ball"; break;
  }
  return json{{"kind", kind}, {"lambda", c.lambda}, {"threshold", c.threshold},
              {"strict", c.strict}, {"verdict", verdict_name(c.verdict)},
              {"residual", c.residual}};
}

inline DroInstance dro_instance_from_json(const json& j) {
  require(j.is_object() && j.contains("kind"), ErrorCode::ParseError,
          "DRO instance needs a \"kind\" tag");
  const std::string kind = j.at("kind").get<std::string>();
  DroKind k = DroKind::Linear;
  if (kind == "linear") k = DroKind::Linear;
  else if (kind == "mean_variance") k = DroKind::MeanVariance;
  else if (kind == "mean_std") k = DroKind::MeanStd;
  else fail(ErrorCode::ParseError, "unknown DRO kind \"" + kind + "\"");
  DroInstance inst{k, vector_from_json(j.at("w")), j.value("rho", 0.0),
                   discrete_from_json(j.at("center")), j.at("eps").get<double>()};
  inst.validate();
  return inst;
}

inline json to_json(const DroInstance& inst) {
  json out{{"kind", dro_kind_name(inst.kind)}, {"w", to_json(inst.w)}};
  if (inst.kind != DroKind::Linear) out["rho"] = inst.rho;
  out["center"] = to_json(inst.center);
  out["eps"] = inst.eps;
  return out;
}

inline json to_json(const DroSolution& sol) {
  json out{{"map", json{{"A", to_json(sol.map_linear)}, {"b", to_json(sol.map_offset)}}},
           {"worst_measure", to_json(sol.worst_measure)}, {"worst_value", sol.worst_value}};
  if (sol.lambda_star) out["lambda_star"] = *sol.lambda_star;
  out["boundary_distance"] = sol.boundary_distance;
  return out;
}

inline KlBallInstance kl_instance_from_json(const json& j) {
  KlBallInstance inst{gaussian_from_json(j.at("prior")), gaussian_from_json(j.at("reference")),
                      j.at("eps").get<double>()};
  inst.validate();
  return inst;
}

inline json to_json(const KlBallInstance& inst) {
  return json{{"prior", to_json(inst.prior)}, {"reference", to_json(inst.reference)},
              {"eps", inst.eps}};
}

inline json to_json(const KlBallSolution& sol) {
  return json{{"optimum", to_json(sol.optimum)}, {"A", to_json(sol.a)}, {"lambda", sol.lambda},
              {"kkt_residual", sol.kkt_residual}, {"distance_residual", sol.distance_residual},
              {"matrix_residual", sol.matrix_residual}, {"interior", sol.interior},
              {"multiple_brackets", sol.multiple_brackets}};
}

inline json to_json(const FlowTrace& trace) {
  json steps = json::array();
  for (const FlowStep& s : trace.iterates) {
    json row{{"iter", s.iter}, {"value", s.value}, {"residual", s.residual}};
    if (std::isfinite(s.distance)) row["distance"] = s.distance;
    steps.push_back(row);
  }
  return json{{"final", to_json(trace.final)}, {"converged", trace.converged},
              {"multiplier", trace.multiplier}, {"trace", steps}};
}

}  // namespace wassopt::io
