#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ondamp/reference.hpp"

namespace ondamp {
namespace {

TEST(EvalRef, SlopeProfile) {
  const RefProfile ref = make_slope(1.0, 5.0);
  const RefSample s = eval_ref(ref, 2.0);
  EXPECT_EQ(s.r, 2.0);
  EXPECT_EQ(s.rdot, 1.0);
  EXPECT_EQ(s.rddot, 0.0);
  EXPECT_EQ(eval_ref(ref, 1.0).r, 1.0);
}

TEST(EvalRef, ConstantProfile) {
  const RefProfile ref = make_constant(0.0, 3.0);
  for (double t : {0.0, 1.234, 3.0}) {
    const RefSample s = eval_ref(ref, t);
    EXPECT_EQ(s.r, 0.0);
    EXPECT_EQ(s.rdot, 0.0);
    EXPECT_EQ(s.rddot, 0.0);
  }
}

TEST(EvalRef, OutOfDomain) {
  const RefProfile ref = make_slope(1.0, 2.0);
  EXPECT_THROW(eval_ref(ref, -1e-3), OutOfDomain);
  EXPECT_THROW(eval_ref(ref, 2.1), OutOfDomain);
  EXPECT_NO_THROW(eval_ref(ref, 2.0));
}

TEST(MakeSlope, Examples) {
  EXPECT_EQ(eval_ref(make_slope(0.0, 4.0), 3.0).r, 0.0);
  EXPECT_EQ(eval_ref(make_slope(-2.0, 4.0), 3.0).r, -6.0);
  EXPECT_THROW(make_slope(1.0, 0.0), InvalidProfile);
}

TEST(MakeTrapezoid, Examples) {
  const RefProfile ref = make_trapezoid(1.0, 1.0, 2.0, 6.0);
  const RefSample a = eval_ref(ref, 0.5);
  EXPECT_DOUBLE_EQ(a.r, 0.125);
  EXPECT_DOUBLE_EQ(a.rdot, 0.5);
  EXPECT_DOUBLE_EQ(a.rddot, 1.0);
  EXPECT_DOUBLE_EQ(eval_ref(ref, 1.5).rdot, 1.0);
  EXPECT_DOUBLE_EQ(eval_ref(ref, 3.5).rdot, 0.5);
  EXPECT_DOUBLE_EQ(eval_ref(ref, 3.5).rddot, -1.0);
  // Final position: 0.5 + 2 + 0.5.
  EXPECT_DOUBLE_EQ(eval_ref(ref, 5.0).r, 3.0);
  EXPECT_EQ(eval_ref(ref, 5.0).rddot, 0.0);
  EXPECT_DOUBLE_EQ(ref.transient_end(), 4.0);
}

TEST(MakeTrapezoid, ZeroVelocityIsIdenticallyZero) {
  const RefProfile ref = make_trapezoid(0.0, 1.0, 2.0, 5.0);
  for (double t = 0.0; t <= 5.0; t += 0.25) {
    const RefSample s = eval_ref(ref, t);
    EXPECT_EQ(s.r, 0.0);
    EXPECT_EQ(s.rdot, 0.0);
    EXPECT_EQ(s.rddot, 0.0);
  }
}

TEST(MakeTrapezoid, NegativeVelocityMirrors) {
  const RefProfile up = make_trapezoid(1.0, 2.0, 1.0, 4.0);
  const RefProfile down = make_trapezoid(-1.0, 2.0, 1.0, 4.0);
  for (double t = 0.0; t <= 4.0; t += 0.1) {
    EXPECT_EQ(eval_ref(down, t).r, -eval_ref(up, t).r);
    EXPECT_EQ(eval_ref(down, t).rdot, -eval_ref(up, t).rdot);
  }
}

TEST(MakeTrapezoid, RejectsProfilesThatDoNotFit) {
  EXPECT_THROW(make_trapezoid(1.0, 1.0, 2.0, 3.5), InvalidProfile);
  EXPECT_THROW(make_trapezoid(1.0, 0.0, 2.0, 10.0), InvalidProfile);
  EXPECT_THROW(make_trapezoid(1.0, 1.0, -1.0, 10.0), InvalidProfile);
}

TEST(RefProfile, JointsAreExactlyC1) {
  for (double v : {1.0, 0.7, -3.3, 1.0 / 3.0}) {
    for (double a : {1.0, 3.0, 0.9}) {
      const double ramp = std::abs(v) / a;
      const RefProfile ref = make_trapezoid(v, a, 1.3, 2.0 * ramp + 3.0);
      const auto& segs = ref.segments();
      for (std::size_t i = 1; i < segs.size(); ++i) {
        const RefSegment& p = segs[i - 1];
        const double tau = p.t_end - p.t_start;
        EXPECT_EQ(p.c0 + (p.c1 + p.c2 * tau) * tau, segs[i].c0);
        EXPECT_EQ(p.c1 + 2.0 * p.c2 * tau, segs[i].c1);
      }
      // rddot vanishes after the last curved segment.
      EXPECT_EQ(eval_ref(ref, ref.t_end()).rddot, 0.0);
      EXPECT_EQ(eval_ref(ref, 0.5 * (ref.transient_end() + ref.t_end())).rddot,
                0.0);
    }
  }
}

TEST(RefProfile, RejectsDiscontinuousSegments) {
  std::vector<RefSegment> segs{{0.0, 1.0, 0.0, 1.0, 0.0},
                               {1.0, 2.0, 1.0, 2.0, 0.0}};
  EXPECT_THROW(RefProfile{segs}, InvalidProfile);
  segs[1].c1 = 1.0;
  EXPECT_NO_THROW(RefProfile{segs});
  segs[1].t_start = 1.5;
  EXPECT_THROW(RefProfile{segs}, InvalidProfile);
}

NoiseConfig noise(double s1, double s2, std::uint64_t seed) {
  NoiseConfig cfg;
  cfg.sigma1 = s1;
  cfg.sigma2 = s2;
  cfg.sample_dt = 1e-3;
  cfg.seed = seed;
  return cfg;
}

TEST(Noise, ZeroSigmaLeavesStatesUntouched) {
  NoiseChannel ch(noise(0.0, 0.0, 5));
  for (int i = 0; i < 100; ++i) {
    const auto m = ch.measure(1.25, -3.5, i * 1e-4);
    EXPECT_EQ(m.x1, 1.25);
    EXPECT_EQ(m.x2, -3.5);
  }
}

TEST(Noise, SameSeedSameSequence) {
  NoiseChannel a(noise(1e-3, 1e-2, 99));
  NoiseChannel b(noise(1e-3, 1e-2, 99));
  NoiseChannel c(noise(1e-3, 1e-2, 100));
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto ma = a.measure(0, 0, i * 1e-3);
    const auto mb = b.measure(0, 0, i * 1e-3);
    const auto mc = c.measure(0, 0, i * 1e-3);
    EXPECT_EQ(ma.x1, mb.x1);
    EXPECT_EQ(ma.x2, mb.x2);
    differs = differs || ma.x1 != mc.x1;
  }
  EXPECT_TRUE(differs);
}

TEST(Noise, HeldBetweenRefreshes) {
  NoiseChannel ch(noise(1.0, 1.0, 3));
  const auto first = ch.measure(0, 0, 0.0);
  for (int i = 1; i < 10; ++i) {
    const auto m = ch.measure(0, 0, i * 1e-4);
    EXPECT_EQ(m.x1, first.x1);
    EXPECT_EQ(m.x2, first.x2);
  }
  EXPECT_NE(ch.measure(0, 0, 1e-3).x1, first.x1);
}

TEST(Noise, SkippedIntervalsKeepTheSequenceAligned) {
  NoiseChannel dense(noise(1.0, 1.0, 11));
  NoiseChannel sparse(noise(1.0, 1.0, 11));
  double last = 0.0;
  for (int i = 0; i <= 50; ++i) {
    last = dense.measure(0, 0, i * 1e-3).x1;
  }
  EXPECT_EQ(sparse.measure(0, 0, 0.05).x1, last);
}

TEST(Noise, SampleStatistics) {
  constexpr int kSamples = 100000;
  NoiseChannel ch(noise(1e-3, 1e-3, 2024));
  double sum1 = 0, sum2 = 0, sq1 = 0, sq2 = 0, cross = 0;
  for (int i = 0; i < kSamples; ++i) {
    const auto m = ch.measure(0, 0, i * 1e-3);
    sum1 += m.x1;
    sum2 += m.x2;
    sq1 += m.x1 * m.x1;
    sq2 += m.x2 * m.x2;
    cross += m.x1 * m.x2;
  }
  const double n = kSamples;
  const double mean1 = sum1 / n, mean2 = sum2 / n;
  const double sd1 = std::sqrt(sq1 / n - mean1 * mean1);
  const double sd2 = std::sqrt(sq2 / n - mean2 * mean2);
  EXPECT_LT(std::abs(mean1), 5.0 * 1e-3 / std::sqrt(n));
  EXPECT_NEAR(sd1, 1e-3, 0.02 * 1e-3);
  EXPECT_NEAR(sd2, 1e-3, 0.02 * 1e-3);
  const double corr = (cross / n - mean1 * mean2) / (sd1 * sd2);
  EXPECT_LT(std::abs(corr), 0.02);
}

TEST(Noise, ConfigValidation) {
  EXPECT_THROW(noise(-1.0, 0.0, 0).validate(1e-4), std::invalid_argument);
  NoiseConfig cfg = noise(1.0, 1.0, 0);
  cfg.sample_dt = 1e-5;
  EXPECT_THROW(cfg.validate(1e-4), std::invalid_argument);
  cfg.sample_dt = 1e-4;
  EXPECT_NO_THROW(cfg.validate(1e-4));
}

}  // namespace
}  // namespace ondamp
