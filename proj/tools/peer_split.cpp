// peer-split: divide credit among peers from their mutual pairwise comparisons.
//
// Exit codes: 0 converged, 2 parse/schema/usage error, 3 validation error,
// 4 no solution within epsilon.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "peersplit/peersplit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNoSolution = 4;

int exit_code_for(peersplit::ErrorCode code) {
  using peersplit::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidConfig:
      return kExitParse;
    case ErrorCode::NoConvergence:
    case ErrorCode::SingularSystem:
      return kExitNoSolution;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split credit among peers from their mutual pairwise comparisons"};
  app.name("peer-split");

  std::string input_path;
  std::string mode, method, solver, format = "table";
  std::size_t gamma = 0;
  double delta = 0.0, epsilon = 0.0;
  std::uint64_t seed = 0;
  bool trace = false;

  app.add_option("input", input_path, "Panel document (JSON)")->required();
  auto* mode_opt = app.add_option("--mode", mode, "Aggregation: gaip or aaip")->check(CLI::IsMember({"gaip", "aaip"}));
  auto* method_opt =
      app.add_option("--method", method, "Derivation: evm, gmm or llsm")->check(CLI::IsMember({"evm", "gmm", "llsm"}));
  auto* solver_opt = app.add_option("--solver", solver, "Solver: dia, nm, de, sa or exact")
                         ->check(CLI::IsMember({"dia", "nm", "de", "sa", "exact"}));
  auto* gamma_opt = app.add_option("--gamma", gamma, "Max DIA iterations")->check(CLI::PositiveNumber);
  auto* delta_opt = app.add_option("--delta", delta, "Iterate-difference tolerance")->check(CLI::PositiveNumber);
  auto* epsilon_opt = app.add_option("--epsilon", epsilon, "Largest acceptable residual")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  app.add_option("--format", format, "Output: machine or table")->check(CLI::IsMember({"machine", "table"}));
  app.add_flag("--trace", trace, "Include DIA iterates in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParse;
  }

  std::ifstream in(input_path, std::ios::binary);
  if (!in) {
    std::cerr << "peer-split: cannot read " << input_path << "\n";
    return kExitParse;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  try {
    const auto doc = peersplit::parse_input(buf.str());
    peersplit::SolverConfig cfg;
    peersplit::apply_options(doc.options, cfg);
    if (*mode_opt) cfg.aggregation_mode = peersplit::mode_from_string(mode);
    if (*method_opt) cfg.derivation_method = peersplit::method_from_string(method);
    if (*solver_opt) cfg.solver = peersplit::solver_from_string(solver);
    if (*gamma_opt) cfg.gamma = gamma;
    if (*delta_opt) cfg.delta = delta;
    if (*epsilon_opt) cfg.epsilon = epsilon;
    if (*seed_opt) cfg.seed = seed;
    if (trace) cfg.trace = true;

    const auto report = peersplit::run_pipeline(doc, cfg);
    std::cout << peersplit::render_report(
        report, format == "machine" ? peersplit::ReportFormat::Machine : peersplit::ReportFormat::Table);
    if (!report.converged) {
      std::cerr << "peer-split: no solution with residual <= " << cfg.epsilon << " (best " << report.residual
                << ")\n";
      return kExitNoSolution;
    }
    return kExitOk;
  } catch (const peersplit::Error& e) {
    std::cerr << "peer-split: ";
    if (!e.expert().empty()) std::cerr << "expert '" << e.expert() << "': ";
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  }
}
