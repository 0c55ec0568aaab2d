#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ondamp/integrator.hpp"

namespace ondamp {
namespace {

GainParams gains(double k, double mu) {
  GainParams p;
  p.k = k;
  p.mu = mu;
  return p;
}

IntegratorConfig config(double t_end, bool stop = true) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.stop_on_convergence = stop;
  return cfg;
}

const std::vector<PlantState> kFigureInits{
    {0.5, 50}, {0.1, 20}, {1, 0}, {1.5, -30}, {0.3, -20}};

TEST(Rk4Step, PureIntegratorIsExact) {
  auto field = [](double, const Vec2& s) {
    const Deriv2 d = rhs_pd({s[0], s[1]}, 0.0, 0.0);
    return Vec2{d.d1, d.d2};
  };
  const Vec2 next = rk4_step(field, 0.0, Vec2{0.0, 1.0}, 0.1);
  EXPECT_DOUBLE_EQ(next[0], 0.1);
  EXPECT_EQ(next[1], 1.0);
}

TEST(Rk4Step, ExponentialDecayLocalAccuracy) {
  auto field = [](double, const Vec2& s) { return Vec2{-s[0], -s[1]}; };
  const Vec2 next = rk4_step(field, 0.0, Vec2{1.0, 1.0}, 0.1);
  EXPECT_NEAR(next[0], std::exp(-0.1), 1e-7);
  EXPECT_NEAR(next[1], std::exp(-0.1), 1e-7);
}

TEST(Rk4Step, ZeroStepIsIdentity) {
  auto field = [](double, const Vec2& s) { return Vec2{s[1], -4.0 * s[0]}; };
  const Vec2 s{0.3, -0.7};
  EXPECT_EQ(rk4_step(field, 1.0, s, 0.0), s);
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 10.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = IntegratorConfig{};
  cfg.blowup_bound = cfg.conv_eps;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = IntegratorConfig{};
  cfg.conv_eps = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Simulate, StartingOnTheLimitSolutionConvergesAfterTheHold) {
  const RefProfile ref = make_slope(1.0, 5.0);
  const IntegratorConfig cfg = config(5.0);
  const SimOutcome out = simulate(SystemSpec::tracking(gains(100, 1e-4)),
                                  {0.0, 1.0}, ref, std::nullopt, cfg);
  EXPECT_EQ(out.terminated, Termination::converged);
  ASSERT_TRUE(out.converged_at);
  EXPECT_NEAR(*out.converged_at, cfg.conv_hold, 1e-12);
  for (std::size_t i = 0; i < out.series.size(); ++i) {
    EXPECT_EQ(out.series.e1[i], 0.0);
    EXPECT_EQ(out.series.e2[i], 0.0);
  }
}

TEST(Simulate, SeriesLayoutAndErrorIdentity) {
  NoiseConfig noise;
  noise.seed = 4;
  const RefProfile ref = make_trapezoid(1.0, 2.0, 1.0, 3.0);
  const SimOutcome out = simulate(SystemSpec::tracking(gains(100, 1e-4)),
                                  {0.2, 0.0}, ref, noise, config(3.0, false));
  const TimeSeries& ts = out.series;
  ASSERT_EQ(ts.size(), 30001u);
  EXPECT_EQ(out.terminated, Termination::completed);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(ts.t[i], static_cast<double>(i) * 1e-4);
    EXPECT_EQ(ts.x1[i], ts.e1[i] + ts.r[i]);
    EXPECT_EQ(ts.x2[i], ts.e2[i] + ts.rdot[i]);
  }
}

TEST(Simulate, FigureInitsSettleWithoutFailures) {
  // With mu > 0 the origin is only algebraically attractive; the error
  // enters a 1e-4 ball within ~1.3 s but lingers near 1e-5 afterwards.
  const RefProfile ref = make_slope(1.0, 5.0);
  for (const PlantState& init : kFigureInits) {
    const SimOutcome out = simulate(SystemSpec::tracking(gains(100, 1e-4)),
                                    init, ref, std::nullopt, config(5.0));
    EXPECT_EQ(out.terminated, Termination::completed);
    const auto settle = detect_convergence(out.series, 1e-4, 0.05);
    ASSERT_TRUE(settle);
    EXPECT_LT(*settle, 2.0);
  }
}

TEST(Simulate, UnregularizedTrackingConvergesFast) {
  const RefProfile ref = make_slope(1.0, 5.0);
  for (const PlantState& init : kFigureInits) {
    const SimOutcome out = simulate(SystemSpec::tracking(gains(100, 0.0)),
                                    init, ref, std::nullopt, config(5.0));
    EXPECT_EQ(out.terminated, Termination::converged);
    ASSERT_TRUE(out.converged_at);
    EXPECT_LT(*out.converged_at, 1.0);
  }
}

TEST(Simulate, StepHalvingAgreementOnFigureRun) {
  const RefProfile ref = make_slope(1.0, 5.0);
  EXPECT_LT(verify_step(SystemSpec::tracking(gains(100, 1e-4)), {1.0, 0.0},
                        ref, config(5.0)),
            1e-8);
}

TEST(Simulate, SingularSetpointStart) {
  const SimOutcome out =
      simulate(SystemSpec::setpoint(gains(100, 0.0)), {0.0, 1.0},
               make_constant(0.0, 1.0), std::nullopt, config(1.0));
  EXPECT_EQ(out.terminated, Termination::singular);
  EXPECT_TRUE(out.series.empty());
  EXPECT_FALSE(out.detail.empty());
}

TEST(Simulate, DivergenceGuard) {
  IntegratorConfig cfg = config(1.0);
  cfg.blowup_bound = 5.0;
  const SimOutcome out =
      simulate(SystemSpec::pd_baseline(100, 20), {10.0, 0.0},
               make_constant(0.0, 1.0), std::nullopt, cfg);
  EXPECT_EQ(out.terminated, Termination::diverged);
  EXPECT_EQ(out.series.size(), 1u);
}

TEST(Simulate, RejectsShortReference) {
  EXPECT_THROW(simulate(SystemSpec::pd_baseline(100, 20), {1.0, 0.0},
                        make_constant(0.0, 0.5), std::nullopt, config(1.0)),
               std::invalid_argument);
}

TEST(Simulate, DeterministicWithNoise) {
  NoiseConfig noise;
  noise.seed = 77;
  const RefProfile ref = make_trapezoid(1.0, 2.0, 2.0, 4.0);
  const SystemSpec sys = SystemSpec::tracking(gains(100, 1e-4));
  const SimOutcome a = simulate(sys, {0, 0}, ref, noise, config(4.0, false));
  const SimOutcome b = simulate(sys, {0, 0}, ref, noise, config(4.0, false));
  ASSERT_EQ(a.series.size(), b.series.size());
  EXPECT_EQ(a.series.x1, b.series.x1);
  EXPECT_EQ(a.series.x2, b.series.x2);
  EXPECT_EQ(a.series.u, b.series.u);
}

TEST(Simulate, EnergyIsMonotoneOnConstantVelocityReference) {
  const RefProfile ref = make_slope(1.0, 3.0);
  for (const PlantState& init : kFigureInits) {
    const SimOutcome out = simulate(SystemSpec::tracking(gains(100, 1e-4)),
                                    init, ref, std::nullopt, config(3.0));
    const auto& v = out.series.V;
    const double tol = 1e-9 * std::max(1.0, v.front());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      ASSERT_LE(v[i + 1], v[i] + tol) << "sample " << i;
    }
  }
}

TEST(Simulate, SetpointNeverCrossesTheVelocityAxis) {
  for (double x1 : {1.0, -1.0, 0.1, -0.1}) {
    for (double x2 : {0.0, 10.0, -10.0}) {
      const SimOutcome out =
          simulate(SystemSpec::setpoint(gains(100, 0.0)), {x1, x2},
                   make_constant(0.0, 3.0), std::nullopt, config(3.0));
      ASSERT_EQ(out.terminated, Termination::converged);
      for (double v : out.series.x1) {
        ASSERT_EQ(signum(v), signum(x1));
      }
    }
  }
}

TEST(Simulate, PairsForgetTheirInitialConditions) {
  const RefProfile ref = make_slope(1.0, 2.0);
  const SystemSpec sys = SystemSpec::tracking(gains(100, 0.0));
  const SimOutcome a = simulate(sys, kFigureInits[0], ref, std::nullopt,
                                config(2.0, false));
  for (std::size_t j = 1; j < kFigureInits.size(); ++j) {
    const SimOutcome b = simulate(sys, kFigureInits[j], ref, std::nullopt,
                                  config(2.0, false));
    ASSERT_TRUE(a.converged_at && b.converged_at);
    EXPECT_LT(std::hypot(a.series.x1.back() - b.series.x1.back(),
                         a.series.x2.back() - b.series.x2.back()),
              1e-6);
  }
}

TEST(Simulate, SaturatedSetpointStillConverges) {
  GainParams p = gains(100, 0.0);
  p.sat = 60.0;
  const SimOutcome out = simulate(SystemSpec::setpoint(p), {1.0, 0.0},
                                  make_constant(0.0, 5.0), std::nullopt,
                                  config(5.0));
  EXPECT_EQ(out.terminated, Termination::converged);
}

TimeSeries synthetic(const std::vector<double>& e1, double dt) {
  TimeSeries ts;
  ts.dt = dt;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    ts.t.push_back(static_cast<double>(i) * dt);
    ts.e1.push_back(e1[i]);
    ts.e2.push_back(0.0);
  }
  return ts;
}

TEST(DetectConvergence, AllZeroSeries) {
  const TimeSeries ts = synthetic(std::vector<double>(200, 0.0), 0.01);
  EXPECT_EQ(detect_convergence(ts, 1e-6, 0.5), 0.0);
}

TEST(DetectConvergence, MonotoneDecay) {
  // e1 = exp(-(t - 1.3)) * eps crosses eps at t = 1.3.
  const double dt = 1e-3;
  std::vector<double> e1;
  for (int i = 0; i <= 4000; ++i) {
    e1.push_back(1e-6 * std::exp(-(i * dt - 1.3)));
  }
  const auto t = detect_convergence(synthetic(e1, dt), 1e-6, 0.5);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 1.3, dt);
}

TEST(DetectConvergence, NeverBelowThreshold) {
  EXPECT_FALSE(detect_convergence(synthetic(std::vector<double>(100, 1.0), 0.1),
                                  1e-6, 0.1));
}

TEST(DetectConvergence, HoldMustBeCovered) {
  std::vector<double> e1(100, 1.0);
  e1.resize(120, 0.0);
  EXPECT_FALSE(detect_convergence(synthetic(e1, 0.1), 1e-6, 5.0));
  EXPECT_NEAR(*detect_convergence(synthetic(e1, 0.1), 1e-6, 1.0), 10.0, 1e-12);
}

// Exact RK4 propagation of a linear system: s[n] = R^n s[0] with
// R = I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24.
std::vector<Vec2> linear_rk4(double kp, double kd, Vec2 s, double h,
                             std::size_t n) {
  using M = std::array<double, 4>;
  auto mul = [](const M& a, const M& b) {
    return M{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
             a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
  };
  const M ha{0.0, h, -kp * h, -kd * h};
  M term{1, 0, 0, 1};
  M r = term;
  for (int j = 1; j <= 4; ++j) {
    term = mul(term, ha);
    for (int c = 0; c < 4; ++c) {
      term[c] /= j;
      r[c] += term[c];
    }
  }
  std::vector<Vec2> out{s};
  for (std::size_t i = 0; i < n; ++i) {
    s = {r[0] * s[0] + r[1] * s[1], r[2] * s[0] + r[3] * s[1]};
    out.push_back(s);
  }
  return out;
}

TEST(VerifyStep, LinearPdMatchesAmplificationMatrix) {
  IntegratorConfig cfg = config(3.0);
  cfg.dt = 1e-3;
  const auto coarse = linear_rk4(100, 20, {1.0, 0.0}, 1e-3, 3000);
  const auto fine = linear_rk4(100, 20, {1.0, 0.0}, 5e-4, 6000);
  double expected = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    expected = std::max(expected, std::hypot(coarse[i][0] - fine[2 * i][0],
                                             coarse[i][1] - fine[2 * i][1]));
  }
  const double got = verify_step(SystemSpec::pd_baseline(100, 20), {1.0, 0.0},
                                 make_constant(0.0, 3.0), cfg);
  EXPECT_NEAR(got, expected, 1e-4 * expected);
  EXPECT_LT(got, 2e-9);
}

TEST(VerifyStep, LinearPdUnitVelocityStart) {
  IntegratorConfig cfg = config(3.0);
  cfg.dt = 1e-3;
  EXPECT_LT(verify_step(SystemSpec::pd_baseline(100, 20), {0.0, 1.0},
                        make_constant(0.0, 3.0), cfg),
            1e-9);
}

TEST(VerifyStep, TrackingAtDefaultStep) {
  EXPECT_LT(verify_step(SystemSpec::tracking(gains(100, 1e-4)), {1.0, 0.0},
                        make_slope(1.0, 5.0), config(5.0)),
            1e-6);
}

TEST(VerifyStep, SameStepGivesZero) {
  IntegratorConfig cfg = config(1.0);
  EXPECT_EQ(verify_step(SystemSpec::tracking(gains(100, 1e-4)), {1.0, 0.0},
                        make_slope(1.0, 1.0), cfg, cfg.dt),
            0.0);
  EXPECT_THROW(verify_step(SystemSpec::tracking(gains(100, 1e-4)), {1.0, 0.0},
                           make_slope(1.0, 1.0), cfg, cfg.dt / 2.5),
               std::invalid_argument);
}

}  // namespace
}  // namespace ondamp
