// ondamp: simulate, certify and reproduce figures for the nonlinear-damping
// tracking controller.
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ondamp/commands.hpp"

namespace {

void add_overrides(CLI::App* cmd, ondamp::Overrides& ov) {
  cmd->add_option("--k", ov.k, "Gain k of the nonlinear systems");
  cmd->add_option("--mu", ov.mu, "Regularization mu of the nonlinear systems");
  cmd->add_option("--dt", ov.dt, "Integration step");
  cmd->add_option("--t-end", ov.t_end, "Simulated horizon");
  cmd->add_option("--seed", ov.seed, "Noise seed (when noise is configured)");
}

std::string default_out_dir() {
  const char* env = std::getenv("ONDAMP_OUT_DIR");
  return env && *env ? env : ".";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear damping control: simulation and certification"};
  app.set_version_flag("--version", ONDAMP_VERSION);
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  app.add_option("--out-dir", out_dir,
                 "Output directory (default: $ONDAMP_OUT_DIR or .)")
      ->configurable();

  ondamp::Overrides ov;
  std::string scenario_path;
  std::string figure;
  std::vector<double> k_values;
  ondamp::CertifyOptions cert;
  bool no_refine = false;

  auto* simulate = app.add_subcommand("simulate", "Run every init of a scenario");
  simulate->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  add_overrides(simulate, ov);

  auto* certify =
      app.add_subcommand("certify", "Evaluate the convergence certificate");
  certify->add_option("--k", cert.k, "Gain k")->capture_default_str();
  certify->add_option("--mu", cert.mu, "Regularization mu")
      ->capture_default_str();
  certify->add_option("--e1-lo", cert.grid.e1.lo)->capture_default_str();
  certify->add_option("--e1-hi", cert.grid.e1.hi)->capture_default_str();
  certify->add_option("--e1-n", cert.grid.e1.n)->capture_default_str();
  certify->add_option("--e2-lo", cert.grid.e2.lo)->capture_default_str();
  certify->add_option("--e2-hi", cert.grid.e2.hi)->capture_default_str();
  certify->add_option("--e2-n", cert.grid.e2.n)->capture_default_str();
  certify->add_flag("--no-refine", no_refine,
                    "Skip the log-spaced e1 refinement near zero");
  certify->add_option("--csv", cert.csv, "Certificate file name")
      ->capture_default_str();

  auto* fig = app.add_subcommand("figure", "Reproduce a figure bundle");
  fig->add_option("name", figure, "fig1 ... fig5")->required();
  add_overrides(fig, ov);

  auto* compare =
      app.add_subcommand("compare", "Nonlinear vs PD metrics for a scenario");
  compare->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  add_overrides(compare, ov);

  auto* sweep = app.add_subcommand("sweep", "Repeat a scenario over gains k");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  sweep->add_option("--k-values", k_values, "Gains, comma separated")
      ->delimiter(',');
  add_overrides(sweep, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ondamp::kExitInvalid;
  }

  const ondamp::CommandContext ctx{out_dir, std::cout, std::cerr};
  try {
    if (*simulate) {
      return ondamp::cmd_simulate(ondamp::load_scenario(scenario_path, ov), ctx);
    }
    if (*certify) {
      if (no_refine) {
        cert.grid.e1_extra.clear();
      }
      return ondamp::cmd_certify(cert, ctx);
    }
    if (*fig) {
      return ondamp::cmd_figure(figure, ov, ctx);
    }
    if (*compare) {
      return ondamp::cmd_compare(ondamp::load_scenario(scenario_path, ov), ctx);
    }
    if (*sweep) {
      return ondamp::cmd_sweep(ondamp::load_scenario(scenario_path, ov),
                               k_values, ctx);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ondamp::kExitInvalid;
  }
  return ondamp::kExitInvalid;
}
