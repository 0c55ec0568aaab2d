// Subcommands of the ondamp tool. Each returns a process exit code:
// 0 success, 1 invalid input, 2 a run diverged or hit a singularity.
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ondamp/certify.hpp"
#include "ondamp/scenario.hpp"

namespace ondamp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRunFailure = 2;

struct CommandContext {
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

/// One CSV per (system, init); manifest at the end.
int cmd_simulate(const Scenario& s, const CommandContext& ctx);

struct CertifyOptions {
  double k = 100.0;
  double mu = 1e-4;
  GridSpec grid = GridSpec::default_grid();
  std::string csv = "certificate.csv";
};
int cmd_certify(const CertifyOptions& opt, const CommandContext& ctx);

/// Runs a committed figure scenario. Outcomes of individual runs are part
/// of the figure data, so this returns 0 once the bundle is written.
int cmd_figure(const std::string& name, const Overrides& ov,
               const CommandContext& ctx);

/// Needs systems labelled "nonlinear" and "pd" with equal stiffness.
int cmd_compare(const Scenario& s, const CommandContext& ctx);

/// Repeats the scenario for each gain (nonlinear systems only). An empty
/// list falls back to the scenario's sweep block.
int cmd_sweep(const Scenario& s, const std::vector<double>& ks,
              const CommandContext& ctx);

std::vector<std::string> figure_names();
std::optional<std::string_view> embedded_scenario(std::string_view name);

}  // namespace ondamp
