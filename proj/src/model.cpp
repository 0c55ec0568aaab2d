#include "ondamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ondamp {

void GainParams::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw InvalidParams("gain k must be positive and finite");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InvalidParams("regularization mu must be non-negative and finite");
  }
  if (sat && (!(*sat > 0.0) || std::isnan(*sat))) {
    throw InvalidParams("saturation bound must be positive");
  }
}

int signum(double v) { return (v > 0.0) - (v < 0.0); }

double damping_term(double position, double velocity, double mu) {
  if (velocity == 0.0) {
    return 0.0;
  }
  const double denom = std::abs(position) + mu;
  if (denom == 0.0) {
    std::ostringstream msg;
    msg << "damping term undefined at position 0 with velocity " << velocity
        << " and mu = 0";
    throw SingularInput(msg.str());
  }
  return -std::abs(velocity) * velocity / denom;
}

double saturate(double u, const std::optional<double>& sat) {
  if (!sat) {
    return u;
  }
  return std::clamp(u, -*sat, *sat);
}

Deriv2 rhs_setpoint(const PlantState& s, const GainParams& p) {
  // x2^2 sign(x2) == |x2| x2
  const double u = -p.k * s.x1 + damping_term(s.x1, s.x2, p.mu);
  return {s.x2, saturate(u, p.sat)};
}

double control_accel(const ErrorState& e, const GainParams& p) {
  return -p.k * e.e1 + damping_term(e.e1, e.e2, p.mu);
}

Deriv2 rhs_tracking(const ErrorState& e, const GainParams& p) {
  return {e.e2, saturate(control_accel(e, p), p.sat)};
}

Deriv2 rhs_pd(const ErrorState& e, double kp, double kd) {
  return {e.e2, -kp * e.e1 - kd * e.e2};
}

Mat2 jacobian_tracking(const ErrorState& e, const GainParams& p) {
  const double denom = std::abs(e.e1) + p.mu;
  if (denom == 0.0) {
    std::ostringstream msg;
    msg << "tracking Jacobian undefined at e1 = 0 with mu = 0 (e2 = " << e.e2
        << ")";
    throw SingularInput(msg.str());
  }
  const double abs_e2 = std::abs(e.e2);
  Mat2 a;
  a.a11 = 0.0;
  a.a12 = 1.0;
  a.a21 = -p.k + abs_e2 * e.e2 * signum(e.e1) / (denom * denom);
  a.a22 = -2.0 * abs_e2 / denom;
  return a;
}

}  // namespace ondamp
