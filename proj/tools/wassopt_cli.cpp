// Command-line front end: instance I/O, solver invocation, trace emission.
// Exit codes: 0 success, 1 domain error, 2 I/O or parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wassopt/json_io.hpp"
#include "wassopt/oracles.hpp"
#include "wassopt/wassopt.hpp"

namespace {

using wassopt::io::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

struct IoOptions {
  std::string in_path;
  std::string out_path;
  std::string format = "json";
};

void add_io_options(CLI::App* cmd, IoOptions* io) {
  cmd->add_option("--in", io->in_path, "input JSON file")->required();
  cmd->add_option("--out", io->out_path, "output file (stdout when omitted)");
  cmd->add_option("--format", io->format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
}

json load_input(const IoOptions& io) {
  std::ifstream stream(io.in_path);
  wassopt::require(stream.good(), wassopt::ErrorCode::ParseError,
                   "cannot open input file " + io.in_path);
  return json::parse(stream);
}

void emit(const IoOptions& io, const std::string& text) {
  if (io.out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream stream(io.out_path);
  wassopt::require(stream.good(), wassopt::ErrorCode::ParseError,
                   "cannot open output file " + io.out_path);
  stream << text;
  if (text.empty() || text.back() != '\n') stream << '\n';
}

void emit_json(const IoOptions& io, const json& value) { emit(io, value.dump(2)); }

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void require_json_format(const IoOptions& io) {
  wassopt::require(io.format == "json", wassopt::ErrorCode::ParseError,
                   "this command only emits json");
}

std::string measure_csv(const wassopt::DiscreteMeasure& mu) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < mu.dim(); ++j) out << "x" << j << ",";
  out << "weight\n";
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (Eigen::Index j = 0; j < mu.dim(); ++j) out << fmt_double(mu.atoms()(i, j)) << ",";
    out << fmt_double(mu.weight(i)) << "\n";
  }
  return out.str();
}

wassopt::FlowConfig flow_config_from_json(const json& j) {
  wassopt::FlowConfig cfg;
  if (j.contains("step")) cfg.step = j.at("step").get<double>();
  if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
  if (j.contains("stationarity_tol")) cfg.stationarity_tol = j.at("stationarity_tol").get<double>();
  if (j.contains("direction")) {
    const std::string dir = j.at("direction").get<std::string>();
    if (dir == "descent") cfg.direction = wassopt::FlowDirection::Descent;
    else if (dir == "ascent") cfg.direction = wassopt::FlowDirection::Ascent;
    else wassopt::fail(wassopt::ErrorCode::ParseError, "direction must be descent or ascent");
  }
  if (j.contains("ball"))
    cfg.ball = wassopt::BallConstraint{
        wassopt::io::discrete_from_json(j.at("ball").at("center")),
        j.at("ball").at("eps").get<double>()};
  return cfg;
}

struct CommandFlags {
  double tol = wassopt::kDefaultResidualTol;
  std::uint64_t seed = 0;
  std::optional<int> steps;
  std::optional<double> step_size;
};

int dispatch(const std::string& command, const IoOptions& io, const CommandFlags& flags) {
  using namespace wassopt;

  if (command == "ot_distance") {
    const json in = load_input(io);
    const Measure mu = io::measure_from_json(in.at("mu"));
    const Measure nu = io::measure_from_json(in.at("nu"));
    emit(io, fmt_double(w2(mu, nu)));
    return kExitOk;
  }

  if (command == "ot_plan") {
    const json in = load_input(io);
    const TransportPlan plan = solve_ot(io::discrete_from_json(in.at("mu")),
                                        io::discrete_from_json(in.at("nu")));
    if (io.format == "csv") {
      std::ostringstream out;
      out << "i,j,gamma\n";
      for (Eigen::Index i = 0; i < plan.gamma().rows(); ++i)
        for (Eigen::Index j = 0; j < plan.gamma().cols(); ++j)
          if (plan.gamma()(i, j) > 0.0)
            out << i << "," << j << "," << fmt_double(plan.gamma()(i, j)) << "\n";
      emit(io, out.str());
    } else {
      emit_json(io, json{{"gamma", io::to_json(plan.gamma())}, {"cost", plan.cost()}});
    }
    return kExitOk;
  }

  if (command == "grad_eval") {
    const json in = load_input(io);
    const FunctionalPtr j = io::functional_from_json(in.at("functional"));
    const DiscreteMeasure mu = io::discrete_from_json(in.at("measure"));
    const VelocityField field = j->gradient(mu);
    if (io.format == "csv") {
      std::ostringstream out;
      for (Eigen::Index c = 0; c < field.vectors().cols(); ++c)
        out << "v" << c << (c + 1 < field.vectors().cols() ? "," : "\n");
      for (Eigen::Index i = 0; i < field.vectors().rows(); ++i)
        for (Eigen::Index c = 0; c < field.vectors().cols(); ++c)
          out << fmt_double(field.vectors()(i, c))
              << (c + 1 < field.vectors().cols() ? "," : "\n");
      emit(io, out.str());
    } else {
      emit_json(io, json{{"vectors", io::to_json(field.vectors())},
                         {"l2_norm", field.l2_norm()}});
    }
    return kExitOk;
  }

  if (command == "stationarity") {
    require_json_format(io);
    const json in = load_input(io);
    const FunctionalPtr j = io::functional_from_json(in.at("functional"));
    const DiscreteMeasure mu = io::discrete_from_json(in.at("measure"));
    emit_json(io, io::to_json(check_stationarity(*j, mu, flags.tol)));
    return kExitOk;
  }

  if (command == "lagrange") {
    require_json_format(io);
    const json in = load_input(io);
    const FunctionalPtr j = io::functional_from_json(in.at("objective"));
    const FunctionalPtr k = io::functional_from_json(in.at("constraint"));
    const DiscreteMeasure mu = io::discrete_from_json(in.at("measure"));
    emit_json(io, io::to_json(estimate_multiplier(*j, *k, mu)));
    return kExitOk;
  }

  if (command == "flow_run") {
    const json in = load_input(io);
    const FunctionalPtr j = io::functional_from_json(in.at("functional"));
    const DiscreteMeasure mu0 = io::discrete_from_json(in.at("initial"));
    FlowConfig cfg =
        in.contains("config") ? flow_config_from_json(in.at("config")) : FlowConfig{};
    cfg.seed = flags.seed;
    cfg.stationarity_tol = flags.tol;
    if (flags.steps) cfg.max_iters = *flags.steps;
    if (flags.step_size) cfg.step = *flags.step_size;
    const FlowTrace trace = run_flow(*j, mu0, cfg);
    if (io.format == "csv") {
      std::ostringstream out;
      out << "iter,value,residual,distance\n";
      for (const FlowStep& s : trace.iterates)
        out << s.iter << "," << fmt_double(s.value) << "," << fmt_double(s.residual) << ","
            << (std::isfinite(s.distance) ? fmt_double(s.distance) : "") << "\n";
      emit(io, out.str());
    } else {
      emit_json(io, io::to_json(trace));
    }
    return kExitOk;
  }

  if (command == "dro_solve") {
    const json in = load_input(io);
    const DroInstance inst = io::dro_instance_from_json(in);
    const DroSolution sol = solve_dro(inst);
    if (io.format == "csv") emit(io, measure_csv(sol.worst_measure));
    else emit_json(io, io::to_json(sol));
    return kExitOk;
  }

  if (command == "dro_dual") {
    require_json_format(io);
    const json in = load_input(io);
    const DroInstance inst = io::dro_instance_from_json(in);
    require(inst.kind == DroKind::Linear, ErrorCode::IncompatibleRepresentation,
            "the dual evaluator covers the linear kind");
    const double lambda =
        in.contains("lambda") ? in.at("lambda").get<double>() : inst.w.norm() / (2.0 * inst.eps);
    emit(io, fmt_double(dual_value_linear(inst, lambda)));
    return kExitOk;
  }

  if (command == "klmin_solve") {
    require_json_format(io);
    const json in = load_input(io);
    const KlBallInstance inst = io::kl_instance_from_json(in);
    emit_json(io, io::to_json(solve_kl_ball(inst)));
    return kExitOk;
  }

  if (command == "oracle_ot_check") {
    require_json_format(io);
    const json in = load_input(io);
    const DiscreteMeasure mu = io::discrete_from_json(in.at("mu"));
    const DiscreteMeasure nu = io::discrete_from_json(in.at("nu"));
    const double lp = solve_ot(mu, nu).cost();
    const PermutationOtResult oracle = permutation_ot(mu, nu);
    const bool match = std::abs(lp - oracle.cost) <= 1e-12 * (1.0 + std::abs(oracle.cost));
    emit_json(io, json{{"lp_cost", lp}, {"oracle_cost", oracle.cost}, {"match", match}});
    return match ? kExitOk : kExitDomain;
  }

  wassopt::fail(wassopt::ErrorCode::ParseError, "unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order optimization machinery in the Wasserstein space"};
  app.require_subcommand(1);

  IoOptions io;
  CommandFlags flags;
  std::string command;

  const auto register_leaf = [&](CLI::App* parent, const std::string& name,
                                 const std::string& description, const std::string& id,
                                 bool with_tol = false, bool with_flow_flags = false) {
    CLI::App* cmd = parent->add_subcommand(name, description);
    add_io_options(cmd, &io);
    if (with_tol) cmd->add_option("--tol", flags.tol, "residual tolerance");
    if (with_flow_flags) {
      cmd->add_option("--seed", flags.seed, "deterministic seed")->required();
      cmd->add_option("--steps", [&flags](const CLI::results_t& res) {
        flags.steps = std::stoi(res[0]);
        return true;
      }, "iteration budget");
      cmd->add_option("--step-size", [&flags](const CLI::results_t& res) {
        flags.step_size = std::stod(res[0]);
        return true;
      }, "Euler step size");
    }
    cmd->callback([&command, id] { command = id; });
    return cmd;
  };

  CLI::App* ot = app.add_subcommand("ot", "optimal transport");
  ot->require_subcommand(1);
  register_leaf(ot, "distance", "W2 distance between two measures", "ot_distance");
  register_leaf(ot, "plan", "optimal coupling for two discrete measures", "ot_plan");

  CLI::App* grad = app.add_subcommand("grad", "Wasserstein gradients");
  grad->require_subcommand(1);
  register_leaf(grad, "eval", "gradient field of a functional at a measure", "grad_eval");

  register_leaf(&app, "stationarity", "first-order stationarity report", "stationarity",
                /*with_tol=*/true);
  register_leaf(&app, "lagrange", "Lagrange alignment report", "lagrange");

  CLI::App* flow = app.add_subcommand("flow", "particle flows");
  flow->require_subcommand(1);
  register_leaf(flow, "run", "projected Wasserstein gradient flow", "flow_run",
                /*with_tol=*/true, /*with_flow_flags=*/true);

  CLI::App* dro = app.add_subcommand("dro", "distributionally robust worst cases");
  dro->require_subcommand(1);
  register_leaf(dro, "solve", "closed-form worst-case measure and value", "dro_solve");
  register_leaf(dro, "dual", "dual bound for the linear worst case", "dro_dual");

  CLI::App* klmin = app.add_subcommand("klmin", "KL minimization on Wasserstein balls");
  klmin->require_subcommand(1);
  register_leaf(klmin, "solve", "Gaussian minimum-KL over a Wasserstein ball", "klmin_solve");

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force verifiers");
  oracle->require_subcommand(1);
  register_leaf(oracle, "ot-check", "LP vs permutation-enumeration comparison",
                "oracle_ot_check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitIo;
  }

  try {
    return dispatch(command, io, flags);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ParseError: " << e.what() << "\n";
    return kExitIo;
  } catch (const wassopt::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == wassopt::ErrorCode::ParseError ? kExitIo : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return kExitDomain;
  }
}
