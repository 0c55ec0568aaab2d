// Closed-loop vector fields of the optimal nonlinear damping controller and
// its linear PD baseline, together with the analytic tracking Jacobian.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace ondamp {

/// Raised when a field is evaluated where the unregularized damping term
/// |e2| e2 / |e1| is undefined (mu = 0, e1 = 0, e2 != 0).
class SingularInput : public std::domain_error {
 public:
  explicit SingularInput(const std::string& what) : std::domain_error(what) {}
};

/// Raised on parameter sets violating their invariants.
class InvalidParams : public std::invalid_argument {
 public:
  explicit InvalidParams(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Controller gain k [1/s^2], regularization mu [m] and an optional bound on
/// the control acceleration.
struct GainParams {
  double k = 100.0;
  double mu = 1e-4;
  std::optional<double> sat;

  /// Throws InvalidParams unless k > 0, mu >= 0 and sat > 0 when present.
  void validate() const;
  /// mu = 0 admits singular inputs on the e1 = 0 axis.
  bool singular_capable() const { return mu == 0.0; }
};

struct PdGains {
  double kp = 100.0;
  double kd = 20.0;
};

struct PlantState {
  double x1 = 0.0;  // m
  double x2 = 0.0;  // m/s
};

struct ErrorState {
  double e1 = 0.0;  // x1 - r
  double e2 = 0.0;  // x2 - rdot
};

struct Deriv2 {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Row-major 2x2 matrix.
struct Mat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 0.0;

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

int signum(double v);

/// Regularized nonlinear damping acceleration -|v| v / (|p| + mu), with the
/// singular case reported. Zero whenever v == 0.
double damping_term(double position, double velocity, double mu);

Deriv2 rhs_setpoint(const PlantState& s, const GainParams& p);
Deriv2 rhs_tracking(const ErrorState& e, const GainParams& p);
Deriv2 rhs_pd(const ErrorState& e, double kp, double kd);

/// Unclamped second component of rhs_tracking.
double control_accel(const ErrorState& e, const GainParams& p);

/// d(rhs_tracking)/d(e1, e2), valid off e1 = 0 or for mu > 0. On e1 = 0 the
/// (2,1) correction vanishes since signum(0) = 0.
Mat2 jacobian_tracking(const ErrorState& e, const GainParams& p);

/// Clamp to [-sat, sat] when a bound is configured.
double saturate(double u, const std::optional<double>& sat);

}  // namespace ondamp
