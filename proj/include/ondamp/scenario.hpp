// Scenario files: JSON documents describing one experiment (systems,
// integrator settings, initial states, reference, noise, outputs).
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ondamp/certify.hpp"
#include "ondamp/integrator.hpp"
#include "ondamp/reference.hpp"

namespace ondamp {

/// Malformed or inconsistent scenario. The message names the offending
/// field path or the line and column of a syntax error.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct ReferenceSpec {
  enum class Kind { constant, slope, trapezoid };
  Kind kind = Kind::constant;
  double value = 0.0;
  double rate = 1.0;
  double v_max = 1.0;
  double accel = 1.0;
  double t_cruise = 0.0;

  RefProfile build(double t_end) const;
};

struct NamedSystem {
  std::string label;
  SystemSpec spec;
};

struct EnergyGridSpec {
  Axis e1;
  Axis e2;
};

struct AnalysisSpec {
  double fit_floor = 1e-12;
  /// Per-system start of the log-scale fit window; absent labels use 0.
  std::map<std::string, double> fit_t_from;
  /// Start of the window for noisy error RMS.
  double rms_from = 0.0;

  double t_from(const std::string& label) const;
};

struct Scenario {
  std::string name;
  /// Declared through "system" (one entry, no label in file names) or
  /// "systems" (label order as in the canonical text).
  std::vector<NamedSystem> systems;
  bool single_system = true;
  IntegratorConfig integrator;
  std::vector<PlantState> inits;
  ReferenceSpec reference;
  std::optional<NoiseConfig> noise;
  std::string csv_stem;
  std::optional<std::string> plotdata;
  std::size_t plot_stride = 10;
  std::optional<EnergyGridSpec> energy_grid;
  std::vector<double> sweep_k;
  AnalysisSpec analysis;
  /// Key-sorted JSON dump of the effective scenario.
  std::string canonical;

  const NamedSystem* find(const std::string& label) const;
  RefProfile build_reference() const { return reference.build(integrator.t_end); }
};

/// Command-line overrides applied before validation. k and mu affect the
/// nonlinear systems only; PD gains stay as written.
struct Overrides {
  std::optional<double> k;
  std::optional<double> mu;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
};

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const Overrides& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const Overrides& overrides = {});

/// SHA-256 of the canonical text, hex encoded.
std::string scenario_hash(const Scenario& s);

}  // namespace ondamp
