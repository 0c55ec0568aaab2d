#include "ondamp/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ondamp {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("integrator dt and t_end must be positive");
  }
  if (!(dt < t_end)) {
    throw std::invalid_argument("integrator dt must be smaller than t_end");
  }
  if (!(conv_eps > 0.0) || !(conv_hold > 0.0)) {
    throw std::invalid_argument("conv_eps and conv_hold must be positive");
  }
  if (!(blowup_bound > conv_eps)) {
    throw std::invalid_argument("blowup_bound must exceed conv_eps");
  }
}

std::size_t IntegratorConfig::steps() const {
  // Grid times never pass t_end beyond rounding.
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::setpoint:
      return "setpoint";
    case SystemKind::tracking:
      return "tracking";
    case SystemKind::pd:
      return "pd";
  }
  return "unknown";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed:
      return "completed";
    case Termination::converged:
      return "converged";
    case Termination::diverged:
      return "diverged";
    case Termination::singular:
      return "singular";
  }
  return "unknown";
}

void SystemSpec::validate() const {
  if (kind == SystemKind::pd) {
    if (!(pd.kp > 0.0) || !(pd.kd > 0.0)) {
      throw InvalidParams("PD gains kp and kd must be positive");
    }
    return;
  }
  gains.validate();
}

double SystemSpec::stiffness() const {
  return kind == SystemKind::pd ? pd.kp : gains.k;
}

double TimeSeries::error_norm(std::size_t i) const {
  return std::hypot(e1[i], e2[i]);
}

void TimeSeries::reserve(std::size_t n) {
  for (auto* col : {&t, &x1, &x2, &r, &rdot, &e1, &e2, &u, &V, &Vdot}) {
    col->reserve(n);
  }
}

namespace {

// Unclamped control demand on a measured error.
double control_demand(const SystemSpec& sys, const ErrorState& e) {
  switch (sys.kind) {
    case SystemKind::setpoint:
      return -sys.gains.k * e.e1 + damping_term(e.e1, e.e2, sys.gains.mu);
    case SystemKind::tracking:
      return control_accel(e, sys.gains);
    case SystemKind::pd:
      return rhs_pd(e, sys.pd.kp, sys.pd.kd).d2;
  }
  return 0.0;
}

double applied_control(const SystemSpec& sys, const ErrorState& e) {
  switch (sys.kind) {
    case SystemKind::setpoint:
      return rhs_setpoint(PlantState{e.e1, e.e2}, sys.gains).d2;
    case SystemKind::tracking:
      return rhs_tracking(e, sys.gains).d2;
    case SystemKind::pd:
      return rhs_pd(e, sys.pd.kp, sys.pd.kd).d2;
  }
  return 0.0;
}

double energy_rate(const SystemSpec& sys, const ErrorState& e) {
  if (sys.kind == SystemKind::pd) {
    return -sys.pd.kd * e.e2 * e.e2;
  }
  // -|e2| e2^2 / (|e1| + mu) == e2 * damping_term
  return e.e2 * damping_term(e.e1, e.e2, sys.gains.mu);
}

struct Offsets {
  double x1 = 0.0;
  double x2 = 0.0;
};

class Recorder {
 public:
  Recorder(const SystemSpec& sys, const RefProfile& ref, TimeSeries& ts)
      : sys_(sys), ref_(ref), ts_(ts) {}

  // Throws SingularInput before touching the series.
  void record(double t, const Vec2& e, const Offsets& noise) {
    const RefSample rs = ref_.eval(t);
    const double e1 = e[0];
    const double e2 = e[1];
    const ErrorState measured{e1 + noise.x1, e2 + noise.x2};
    const double u = control_demand(sys_, measured);
    const double k = sys_.stiffness();
    const double v = 0.5 * k * e1 * e1 + 0.5 * e2 * e2;
    const double vdot = energy_rate(sys_, ErrorState{e1, e2});
    ts_.t.push_back(t);
    ts_.x1.push_back(e1 + rs.r);
    ts_.x2.push_back(e2 + rs.rdot);
    ts_.r.push_back(rs.r);
    ts_.rdot.push_back(rs.rdot);
    ts_.e1.push_back(e1);
    ts_.e2.push_back(e2);
    ts_.u.push_back(u);
    ts_.V.push_back(v);
    ts_.Vdot.push_back(vdot);
  }

 private:
  const SystemSpec& sys_;
  const RefProfile& ref_;
  TimeSeries& ts_;
};

}  // namespace

SimOutcome simulate(const SystemSpec& system, const PlantState& init,
                    const RefProfile& ref,
                    const std::optional<NoiseConfig>& noise,
                    const IntegratorConfig& cfg) {
  cfg.validate();
  system.validate();
  if (noise) {
    noise->validate(cfg.dt);
  }
  if (ref.t_end() < cfg.t_end * (1.0 - 1e-12)) {
    throw std::invalid_argument("reference profile ends before t_end");
  }

  SimOutcome out;
  TimeSeries& ts = out.series;
  ts.t0 = 0.0;
  ts.dt = cfg.dt;
  const std::size_t n = cfg.steps();
  ts.reserve(n + 1);

  std::optional<NoiseChannel> channel;
  if (noise) {
    channel.emplace(*noise);
  }
  auto offsets_at = [&](double t) {
    if (!channel) {
      return Offsets{};
    }
    const auto m = channel->measure(0.0, 0.0, t);
    return Offsets{m.x1, m.x2};
  };

  // The state is integrated in error coordinates so that e keeps full
  // relative precision near the origin; x = e + r is rebuilt per sample.
  // The plant receives no r'' feedforward, hence the -rddot term.
  Recorder recorder(system, ref, ts);
  const RefSample r0 = ref.eval(0.0);
  Vec2 x{init.x1 - r0.r, init.x2 - r0.rdot};
  Offsets held = offsets_at(0.0);
  constexpr std::size_t kNoEntry = static_cast<std::size_t>(-1);
  std::size_t entry = kNoEntry;
  const auto hold_steps = cfg.conv_hold / cfg.dt;

  auto field = [&](double t, const Vec2& s) -> Vec2 {
    const ErrorState measured{s[0] + held.x1, s[1] + held.x2};
    return {s[1], applied_control(system, measured) - ref.eval(t).rddot};
  };

  // Returns true when the run must stop at sample i.
  auto inspect = [&](std::size_t i) {
    const double norm = ts.error_norm(i);
    if (!std::isfinite(norm) || norm > cfg.blowup_bound) {
      out.terminated = Termination::diverged;
      out.detail = "error norm exceeded blowup bound";
      return true;
    }
    if (norm < cfg.conv_eps) {
      if (entry == kNoEntry) {
        entry = i;
      }
      if (!out.converged_at &&
          static_cast<double>(i - entry) >= hold_steps * (1.0 - 1e-12)) {
        out.converged_at = ts.t[i];
        if (cfg.stop_on_convergence) {
          out.terminated = Termination::converged;
          return true;
        }
      }
    } else {
      entry = kNoEntry;
    }
    return false;
  };

  try {
    recorder.record(0.0, x, held);
    if (inspect(0)) {
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * cfg.dt;
      x = rk4_step(field, t, x, cfg.dt);
      if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
        out.terminated = Termination::diverged;
        out.detail = "state became non-finite";
        return out;
      }
      const double t_next = static_cast<double>(i + 1) * cfg.dt;
      held = offsets_at(t_next);
      recorder.record(t_next, x, held);
      if (inspect(i + 1)) {
        return out;
      }
    }
  } catch (const SingularInput& err) {
    out.terminated = Termination::singular;
    out.detail = err.what();
    return out;
  }
  out.terminated = Termination::completed;
  return out;
}

std::optional<double> detect_convergence(const TimeSeries& ts, double eps,
                                         double hold) {
  if (ts.empty()) {
    return std::nullopt;
  }
  std::optional<std::size_t> entry;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts.error_norm(i) < eps)) {
      entry.reset();
      continue;
    }
    if (!entry) {
      entry = i;
    }
    if (ts.t[i] - ts.t[*entry] >= hold * (1.0 - 1e-12)) {
      return ts.t[*entry];
    }
  }
  return std::nullopt;
}

double verify_step(const SystemSpec& system, const PlantState& init,
                   const RefProfile& ref, const IntegratorConfig& cfg,
                   double fine_dt) {
  const double ratio_exact = cfg.dt / fine_dt;
  const auto ratio = static_cast<std::size_t>(std::llround(ratio_exact));
  if (ratio < 1 || std::abs(ratio_exact - static_cast<double>(ratio)) > 1e-9) {
    throw std::invalid_argument("dt / fine_dt must be a positive integer");
  }
  IntegratorConfig coarse = cfg;
  coarse.stop_on_convergence = false;
  IntegratorConfig fine = coarse;
  fine.dt = fine_dt;

  const SimOutcome a = simulate(system, init, ref, std::nullopt, coarse);
  const SimOutcome b = simulate(system, init, ref, std::nullopt, fine);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.series.size(); ++i) {
    const std::size_t j = i * ratio;
    if (j >= b.series.size()) {
      break;
    }
    worst = std::max(worst, std::hypot(a.series.x1[i] - b.series.x1[j],
                                       a.series.x2[i] - b.series.x2[j]));
  }
  return worst;
}

}  // namespace ondamp
