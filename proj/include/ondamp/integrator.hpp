// Fixed-step RK4 simulation of the closed loops on a uniform grid.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ondamp/model.hpp"
#include "ondamp/reference.hpp"

namespace ondamp {

using Vec2 = std::array<double, 2>;

/// One classical Runge-Kutta step of ds/dt = field(t, s).
template <class Field>
Vec2 rk4_step(Field&& field, double t, const Vec2& s, double dt) {
  const double half = 0.5 * dt;
  const Vec2 k1 = field(t, s);
  const Vec2 k2 = field(t + half, Vec2{s[0] + half * k1[0], s[1] + half * k1[1]});
  const Vec2 k3 = field(t + half, Vec2{s[0] + half * k2[0], s[1] + half * k2[1]});
  const Vec2 k4 = field(t + dt, Vec2{s[0] + dt * k3[0], s[1] + dt * k3[1]});
  const double w = dt / 6.0;
  return {s[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          s[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

struct IntegratorConfig {
  double dt = 1e-4;
  double t_end = 5.0;
  double conv_eps = 1e-6;
  double conv_hold = 0.05;
  double blowup_bound = 1e6;
  /// When false the run always reaches t_end; converged_at is still reported.
  bool stop_on_convergence = true;

  void validate() const;
  std::size_t steps() const;
};

enum class SystemKind { setpoint, tracking, pd };

std::string to_string(SystemKind kind);

/// The controller closing the loop around the double integrator.
struct SystemSpec {
  SystemKind kind = SystemKind::tracking;
  GainParams gains;  // setpoint / tracking
  PdGains pd;        // pd

  static SystemSpec setpoint(const GainParams& p) {
    return {SystemKind::setpoint, p, {}};
  }
  static SystemSpec tracking(const GainParams& p) {
    return {SystemKind::tracking, p, {}};
  }
  static SystemSpec pd_baseline(double kp, double kd) {
    return {SystemKind::pd, {}, {kp, kd}};
  }

  void validate() const;
  /// Proportional gain (k or kp); also the spring constant of V.
  double stiffness() const;
};

/// Column-major record on t[i] = t0 + i * dt.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> t, x1, x2, r, rdot, e1, e2, u, V, Vdot;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  double error_norm(std::size_t i) const;
  void reserve(std::size_t n);
};

enum class Termination { completed, converged, diverged, singular };

std::string to_string(Termination t);

struct SimOutcome {
  TimeSeries series;
  /// Time at which the hold window below conv_eps was confirmed.
  std::optional<double> converged_at;
  Termination terminated = Termination::completed;
  std::string detail;
};

SimOutcome simulate(const SystemSpec& system, const PlantState& init,
                    const RefProfile& ref,
                    const std::optional<NoiseConfig>& noise,
                    const IntegratorConfig& cfg);

/// Earliest sample time t such that every sample in [t, t + hold] has error
/// norm below eps. The window must be covered by the series.
std::optional<double> detect_convergence(const TimeSeries& ts, double eps,
                                         double hold);

/// Max Euclidean plant-state discrepancy between runs at cfg.dt and fine_dt
/// on the shared coarse grid. cfg.dt / fine_dt must be an integer.
double verify_step(const SystemSpec& system, const PlantState& init,
                   const RefProfile& ref, const IntegratorConfig& cfg,
                   double fine_dt);

inline double verify_step(const SystemSpec& system, const PlantState& init,
                          const RefProfile& ref, const IntegratorConfig& cfg) {
  return verify_step(system, init, ref, cfg, 0.5 * cfg.dt);
}

}  // namespace ondamp
